#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "scout/classifier.hpp"

using namespace scout;

namespace {

Dataset make(std::vector<std::vector<double>> x, std::vector<int> y) {
  Dataset d;
  for (std::size_t i = 0; i < x.at(0).size(); ++i) d.feature_names.push_back("f" + std::to_string(i + 1));
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

Dataset xor_data() {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int rep = 0; rep < 5; ++rep)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        x.push_back({double(a), double(b)});
        y.push_back(a ^ b);
      }
  return make(x, y);
}

double accuracy_on(const ForestModel& m, const Dataset& d) { return evaluate(m, d).accuracy; }

ForestParams single_tree() {
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.mtry = 10;
  return p;
}

}  // namespace

TEST(Classifier, SeparableDataIsLearnedExactly) {
  const auto d = make({{0, 5}, {1, 3}, {2, 9}, {10, 4}, {11, 1}, {12, 7}}, {0, 0, 0, 1, 1, 1});
  ForestParams p;
  p.n_trees = 25;
  const auto m = train(d, p);
  EXPECT_DOUBLE_EQ(accuracy_on(m, d), 1.0);
  EXPECT_EQ(train(d, p), m);
  p.threads = 4;
  EXPECT_EQ(train(d, p), m);
}

TEST(Classifier, XorNeedsDepthTwo) {
  const auto d = xor_data();
  auto p = single_tree();
  p.max_depth = 2;
  EXPECT_DOUBLE_EQ(accuracy_on(train(d, p), d), 1.0);
  p.max_depth = 1;
  EXPECT_LE(accuracy_on(train(d, p), d), 0.75);
}

TEST(Classifier, ProbabilityIsMeanOfLeafFractions) {
  const auto d = make({{0}, {0}, {0}, {1}, {1}, {1}, {1}}, {0, 0, 1, 1, 1, 1, 0});
  auto p = single_tree();
  const auto m = train(d, p);
  const std::vector<double> low{0}, high{1};
  EXPECT_DOUBLE_EQ(predict(m, low).probability, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(predict(m, high).probability, 0.75);
  EXPECT_TRUE(predict(m, high).phishing);

  const auto sep = make({{0}, {1}}, {0, 1});
  p.n_trees = 15;
  const auto unanimous = train(sep, p);
  const std::vector<double> one{1};
  EXPECT_DOUBLE_EQ(predict(unanimous, one).probability, 1.0);
}

TEST(Classifier, Errors) {
  const auto d = make({{0}, {1}}, {0, 1});
  const auto m = train(d, single_tree());
  const std::vector<double> nine(9, 0.0);
  EXPECT_THROW(predict(m, nine), DataError);
  EXPECT_THROW(train(make({{0}, {1}}, {1, 1})), DataError);
  EXPECT_THROW(make({{0}, {1, 2}}, {0, 1}).validate(), DataError);
  EXPECT_THROW(make({{NAN}, {1}}, {0, 1}).validate(), DataError);
  EXPECT_THROW(make({{0}, {1}}, {0, 2}).validate(), DataError);
  EXPECT_THROW(evaluate(m, make({{0}}, {0}).subset(std::vector<std::size_t>{})), DataError);
}

TEST(Classifier, Folds) {
  const std::vector<int> ten{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  const auto folds = assign_folds(ten, 5, 3);
  std::map<std::size_t, std::array<int, 2>> per;
  for (std::size_t i = 0; i < ten.size(); ++i) ++per[folds[i]][ten[i]];
  ASSERT_EQ(per.size(), 5u);
  for (const auto& [fold, counts] : per) EXPECT_EQ(counts, (std::array<int, 2>{1, 1})) << fold;

  std::vector<std::string> warnings;
  const std::vector<int> skewed{1, 1, 1, 1, 1, 1, 1, 0, 0, 0};
  assign_folds(skewed, 5, 3, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(assign_folds(skewed, 5, 3), assign_folds(skewed, 5, 3));
}

TEST(Classifier, CrossValidationAndHoldout) {
  const auto d = oracle::synthetic_corpus(200, 0.0, 5);
  ForestParams p;
  p.n_trees = 20;
  const auto cv = cross_validate(d, 5, 1, p);
  ASSERT_EQ(cv.folds.size(), 5u);
  EXPECT_EQ(cv.mean.tp + cv.mean.fp + cv.mean.tn + cv.mean.fn, d.size());
  EXPECT_GT(cv.mean.accuracy, 0.9);

  const auto h = holdout_evaluate(d, 0.7, 1, p);
  EXPECT_EQ(h.train_rows.size() + h.test_rows.size(), d.size());
  EXPECT_NEAR(double(h.train_rows.size()), 140.0, 1.0);
  EXPECT_GT(h.metrics.accuracy, 0.9);
}

TEST(Classifier, Metrics) {
  const auto m = metrics_from_confusion(2, 1, 1, 0);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.8);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  const auto none = metrics_from_confusion(0, 0, 3, 0);
  EXPECT_DOUBLE_EQ(none.precision, 0.0);
  EXPECT_DOUBLE_EQ(none.f1, 0.0);
}

TEST(Classifier, RocAuc) {
  const std::vector<int> labels{0, 0, 1, 1};
  const std::vector<double> perfect{0.1, 0.2, 0.8, 0.9}, inverted{0.9, 0.8, 0.2, 0.1}, flat{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(roc_auc(perfect, labels), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(inverted, labels), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(flat, labels), 0.5);
  const std::vector<int> one_class{1, 1, 1, 1};
  EXPECT_TRUE(std::isnan(roc_auc(perfect, one_class)));
}

TEST(Classifier, ImportanceFavoursTheInformativeFeature) {
  std::mt19937_64 rng(1);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    x.push_back({double(rng() % 100), label + 0.1 * double(rng() % 5), double(rng() % 7)});
    y.push_back(label);
  }
  ForestParams p;
  p.n_trees = 30;
  p.mtry = 3;
  const auto imp = feature_importance(train(make(x, y), p));
  double total = 0;
  for (const auto& [name, v] : imp) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(imp[1].first, "f2");
  EXPECT_GT(imp[1].second, 0.5);
}

TEST(Classifier, ModelJsonRoundTrip) {
  ForestParams p;
  p.n_trees = 10;
  const auto m = train(oracle::synthetic_corpus(80, 0.1, 2), p);
  EXPECT_EQ(model_from_json(model_to_json(m)), m);
  EXPECT_THROW(model_from_json("{\"trees\": 3}"), ParseError);
}

TEST(ClassifierProperty, GiniBounds) {
  for (std::uint64_t b = 0; b <= 30; ++b)
    for (std::uint64_t p = 0; p <= 30; ++p) {
      if (b + p == 0) continue;
      const double g = gini(b, p);
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 0.5);
      if (b == 0 || p == 0) EXPECT_DOUBLE_EQ(g, 0.0);
    }
  EXPECT_DOUBLE_EQ(gini(5, 5), 0.5);
}

TEST(ClassifierProperty, RootSplitMatchesOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    const std::size_t n = 4 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back({double(rng() % 6), double(rng() % 3), double(rng() % 9)});
      y.push_back(int(rng() % 2));
    }
    if (std::count(y.begin(), y.end(), 1) % int(n) == 0) continue;
    const auto d = make(x, y);
    auto p = single_tree();
    p.max_depth = 1;
    const auto m = train(d, p);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto expect = oracle::best_split(d, all);
    if (!expect) {
      EXPECT_EQ(m.trees[0].nodes[0].feature, -1);
      continue;
    }
    EXPECT_EQ(m.trees[0].nodes[0].feature, expect->feature);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, expect->threshold);
  }
}

TEST(ClassifierProperty, ScaleInvariance) {
  const auto d = oracle::synthetic_corpus(120, 0.1, 9);
  auto scaled = d;
  for (auto& row : scaled.x)
    for (auto& v : row) v = 3.0 * v + 11.0;
  auto p = single_tree();
  const auto a = train(d, p), b = train(scaled, p);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_EQ(predict(a, d.x[i]).phishing, predict(b, scaled.x[i]).phishing) << i;
}

TEST(ClassifierProperty, AucMatchesPairwiseOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s;
    std::vector<int> l;
    const std::size_t n = 2 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(double(rng() % 10) / 10.0);
      l.push_back(int(rng() % 2));
    }
    if (std::count(l.begin(), l.end(), 1) % int(n) == 0) continue;
    EXPECT_NEAR(roc_auc(s, l), oracle::pairwise_auc(s, l), 1e-12);
  }
}

TEST(ClassifierProperty, BootstrapIsReproducible) {
  for (std::size_t i = 0; i < 20; ++i) {
    const auto s = tree_seed(7, i);
    const auto sample = bootstrap_sample(s, 50);
    EXPECT_EQ(sample, bootstrap_sample(s, 50));
    EXPECT_EQ(sample.size(), 50u);
    for (auto r : sample) EXPECT_LT(r, 50u);
    EXPECT_NE(s, tree_seed(7, i + 1));
  }
}
