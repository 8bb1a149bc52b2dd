#include "scout/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <thread>

namespace scout {

namespace {

__extension__ using u128 = unsigned __int128;

// Uniform integer in [0, n) by rejection; independent of the standard library's distributions.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do r = rng();
  while (r >= limit);
  return r % n;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

// Split quality as the fraction S / D, S = (PL^2+NL^2) nR + (PR^2+NR^2) nL, D = nL nR.
// Larger is better; it is an affine transform of the weighted Gini decrease.
struct Score {
  u128 s = 0, d = 1;
  bool operator>(const Score& o) const { return s * o.d > o.s * d; }
};

struct Candidate {
  int feature = -1;
  double threshold = 0;
  Score score;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(seed), mtry_(std::clamp<std::size_t>(params.mtry, 1, data.arity())) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::uint32_t pos = 0;
    for (auto r : rows) pos += static_cast<std::uint32_t>(data_.y[r]);
    nodes_[id].n_phishing = pos;
    nodes_[id].n_benign = static_cast<std::uint32_t>(rows.size()) - pos;

    const bool pure = pos == 0 || pos == rows.size();
    const bool depth_ok = params_.max_depth == 0 || depth < params_.max_depth;
    if (pure || !depth_ok || rows.size() < 2 * params_.min_leaf) return id;

    const Candidate best = best_split(rows);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (data_.x[r][best.feature] <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const double n = static_cast<double>(left.size() + right.size());
    auto weighted = [&](const std::vector<std::size_t>& part) {
      std::uint64_t p = 0;
      for (auto r : part) p += static_cast<std::uint64_t>(data_.y[r]);
      return static_cast<double>(part.size()) * gini(part.size() - p, p);
    };
    const double decrease = n * gini(nodes_[id].n_benign, nodes_[id].n_phishing) - weighted(left) - weighted(right);

    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    auto& node = nodes_[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    node.impurity_decrease = std::max(0.0, decrease);
    return id;
  }

  std::vector<int> sample_features() {
    std::vector<int> all(data_.arity());
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < mtry_ && i + 1 < all.size(); ++i)
      std::swap(all[i], all[i + bounded(rng_, all.size() - i)]);
    all.resize(mtry_);
    std::sort(all.begin(), all.end());
    return all;
  }

  Candidate best_split(const std::vector<std::size_t>& rows) {
    Candidate best;
    const std::uint64_t n = rows.size();
    std::uint64_t total_pos = 0;
    for (auto r : rows) total_pos += static_cast<std::uint64_t>(data_.y[r]);
    std::vector<std::pair<double, int>> col(rows.size());
    for (int f : sample_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = {data_.x[rows[i]][f], data_.y[rows[i]]};
      std::sort(col.begin(), col.end());
      std::uint64_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        left_pos += static_cast<std::uint64_t>(col[i].second);
        if (col[i].first == col[i + 1].first) continue;
        const std::uint64_t nl = i + 1, nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const std::uint64_t pl = left_pos, ql = nl - pl, pr = total_pos - pl, qr = nr - pr;
        Score s{(u128(pl) * pl + u128(ql) * ql) * nr + (u128(pr) * pr + u128(qr) * qr) * nl, u128(nl) * nr};
        if (best.feature < 0 || s > best.score) {
          double t = col[i].first + (col[i + 1].first - col[i].first) / 2.0;
          if (!(t < col[i + 1].first)) t = col[i].first;
          best = {f, t, s};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestParams& params_;
  std::mt19937_64 rng_;
  std::size_t mtry_;
  std::vector<TreeNode> nodes_;
};

void check_trainable(const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
  if (data.arity() == 0) throw DataError("dataset has no features");
  const auto pos = std::count(data.y.begin(), data.y.end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == data.size())
    throw DataError("training data contains a single class");
}

double safe_div(double a, double b) { return b == 0 ? 0.0 : a / b; }

}  // namespace

void Dataset::validate() const {
  if (x.size() != y.size()) throw DataError("feature rows and labels differ in count");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != arity())
      throw DataError("row " + std::to_string(i) + " has " + std::to_string(x[i].size()) + " features, expected " +
                      std::to_string(arity()));
    if (y[i] != 0 && y[i] != 1) throw DataError("row " + std::to_string(i) + " has a label outside {0,1}");
    for (double v : x[i])
      if (std::isnan(v)) throw DataError("row " + std::to_string(i) + " contains NaN");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.feature_names = feature_names;
  for (auto r : rows) {
    out.x.push_back(x.at(r));
    out.y.push_back(y.at(r));
  }
  return out;
}

Dataset dataset_from_rows(const std::vector<FeatureRow>& rows) {
  Dataset d;
  for (auto n : kFeatureNames) d.feature_names.emplace_back(n);
  for (const auto& r : rows) {
    if (!r.features.label) throw DataError("row '" + r.snapshot_id + "' has no label");
    const auto v = r.features.values();
    d.x.emplace_back(v.begin(), v.end());
    d.y.push_back(*r.features.label == Label::phishing ? 1 : 0);
  }
  return d;
}

double gini(std::uint64_t n_benign, std::uint64_t n_phishing) {
  const double n = static_cast<double>(n_benign + n_phishing);
  if (n == 0) return 0.0;
  const double p = static_cast<double>(n_phishing) / n, q = static_cast<double>(n_benign) / n;
  return 1.0 - p * p - q * q;
}

std::uint64_t tree_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> bootstrap_sample(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = bounded(rng, n);
  std::sort(rows.begin(), rows.end());
  return rows;
}

double DecisionTree::predict_proba(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  const auto& leaf = nodes[i];
  return static_cast<double>(leaf.n_phishing) / static_cast<double>(leaf.n_phishing + leaf.n_benign);
}

ForestModel train(const Dataset& data, const ForestParams& params) {
  check_trainable(data);
  if (params.n_trees == 0) throw DataError("n_trees must be positive");
  if (params.min_leaf == 0) throw DataError("min_leaf must be positive");
  ForestModel model;
  model.feature_names = data.feature_names;
  model.params = params;
  model.params.mtry = std::clamp<std::size_t>(params.mtry, 1, data.arity());
  model.params.threads = 1;  // scheduling detail, not part of the model
  model.training_rows = data.size();
  model.training_phishing = static_cast<std::size_t>(std::count(data.y.begin(), data.y.end(), 1));
  model.trees.resize(params.n_trees);

  auto build = [&](std::size_t t) {
    const std::uint64_t seed = tree_seed(params.seed, t);
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      rows = bootstrap_sample(seed, data.size());
    } else {
      rows.resize(data.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    // The split RNG is decorrelated from the bootstrap RNG.
    model.trees[t] = {seed, TreeBuilder(data, model.params, tree_seed(seed, 0)).build(std::move(rows))};
  };

  const std::size_t workers = std::clamp<std::size_t>(params.threads, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < params.n_trees;) build(t);
      });
  }
  return model;
}

Prediction predict(const ForestModel& model, std::span<const double> row) {
  if (row.size() != model.feature_names.size())
    throw DataError("feature vector has arity " + std::to_string(row.size()) + ", model expects " +
                    std::to_string(model.feature_names.size()));
  if (model.trees.empty()) throw DataError("model has no trees");
  double sum = 0;
  for (const auto& t : model.trees) sum += t.predict_proba(row);
  Prediction p;
  p.probability = sum / static_cast<double>(model.trees.size());
  p.phishing = p.probability >= 0.5;
  return p;
}

Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const double total = static_cast<double>(tp + fp + tn + fn);
  m.accuracy = safe_div(static_cast<double>(tp + tn), total);
  m.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  m.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  m.f1 = safe_div(2 * m.precision * m.recall, m.precision + m.recall);
  m.roc_auc = std::numeric_limits<double>::quiet_NaN();
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1) / 2.0) / (np * static_cast<double>(n_neg));
}

Metrics evaluate(const ForestModel& model, const Dataset& test) {
  test.validate();
  if (test.size() == 0) throw DataError("cannot evaluate on an empty test set");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::vector<double> scores;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = predict(model, test.x[i]);
    scores.push_back(p.probability);
    if (p.phishing)
      (test.y[i] ? tp : fp)++;
    else
      (test.y[i] ? fn : tn)++;
  }
  Metrics m = metrics_from_confusion(tp, fp, tn, fn);
  m.roc_auc = roc_auc(scores, test.y);
  return m;
}

std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k, std::uint64_t split_seed,
                                      std::vector<std::string>* warnings) {
  if (k < 2) throw DataError("cross-validation needs k >= 2");
  if (k > labels.size())
    throw DataError("k = " + std::to_string(k) + " exceeds the " + std::to_string(labels.size()) + " rows");
  std::mt19937_64 rng(split_seed);
  std::vector<std::size_t> order;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (warnings && !members.empty() && members.size() < k)
      warnings->push_back("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                          " rows, fewer than k = " + std::to_string(k) + "; some folds lack it");
    shuffle(members, rng);
    order.insert(order.end(), members.begin(), members.end());
  }
  std::vector<std::size_t> fold(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = i % k;
  return fold;
}

CrossValidation cross_validate(const Dataset& data, std::size_t k, std::uint64_t split_seed,
                               const ForestParams& params) {
  data.validate();
  CrossValidation cv;
  cv.fold_of = assign_folds(data.y, k, split_seed, &cv.warnings);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) (cv.fold_of[i] == f ? test_rows : train_rows).push_back(i);
    ForestParams p = params;
    p.seed = tree_seed(params.seed, 1000000 + f);
    cv.folds.push_back(evaluate(train(data.subset(train_rows), p), data.subset(test_rows)));
  }
  auto mean_of = [&](double Metrics::*field) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& m : cv.folds)
      if (!std::isnan(m.*field)) {
        sum += m.*field;
        ++n;
      }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  };
  for (const auto& m : cv.folds) {
    cv.mean.tp += m.tp;
    cv.mean.fp += m.fp;
    cv.mean.tn += m.tn;
    cv.mean.fn += m.fn;
  }
  cv.mean.accuracy = mean_of(&Metrics::accuracy);
  cv.mean.precision = mean_of(&Metrics::precision);
  cv.mean.recall = mean_of(&Metrics::recall);
  cv.mean.f1 = mean_of(&Metrics::f1);
  cv.mean.roc_auc = mean_of(&Metrics::roc_auc);
  return cv;
}

Holdout holdout_evaluate(const Dataset& data, double train_fraction, std::uint64_t split_seed,
                         const ForestParams& params) {
  data.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DataError("train fraction must be in (0, 1)");
  std::mt19937_64 rng(split_seed);
  Holdout h;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.y[i] == cls) members.push_back(i);
    shuffle(members, rng);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    h.train_rows.insert(h.train_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(cut));
    h.test_rows.insert(h.test_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(cut), members.end());
  }
  std::sort(h.train_rows.begin(), h.train_rows.end());
  std::sort(h.test_rows.begin(), h.test_rows.end());
  h.metrics = evaluate(train(data.subset(h.train_rows), params), data.subset(h.test_rows));
  return h;
}

std::vector<std::pair<std::string, double>> feature_importance(const ForestModel& model) {
  std::vector<double> sum(model.feature_names.size(), 0.0);
  for (const auto& t : model.trees)
    for (const auto& n : t.nodes)
      if (n.feature >= 0) sum[static_cast<std::size_t>(n.feature)] += n.impurity_decrease;
  const double total = std::accumulate(sum.begin(), sum.end(), 0.0);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < sum.size(); ++i)
    out.emplace_back(model.feature_names[i], total > 0 ? sum[i] / total : 0.0);
  return out;
}

namespace {
constexpr const char* kModelFormat = "scout-forest-v1";
}

std::string model_to_json(const ForestModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["feature_names"] = model.feature_names;
  const auto& p = model.params;
  j["params"] = {{"n_trees", p.n_trees}, {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf},
                 {"mtry", p.mtry},       {"seed", p.seed},           {"bootstrap", p.bootstrap}};
  j["training"] = {{"rows", model.training_rows}, {"phishing", model.training_phishing}};
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : model.trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n_benign, n.n_phishing, n.impurity_decrease});
    trees.push_back({{"seed", t.seed}, {"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("unsupported model format");
    ForestModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<std::size_t>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.min_leaf = p.at("min_leaf").get<std::size_t>();
    m.params.mtry = p.at("mtry").get<std::size_t>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.params.bootstrap = p.at("bootstrap").get<bool>();
    m.training_rows = j.at("training").at("rows").get<std::size_t>();
    m.training_phishing = j.at("training").at("phishing").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      tree.seed = t.at("seed").get<std::uint64_t>();
      for (const auto& n : t.at("nodes")) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<std::int32_t>();
        node.right = n.at(3).get<std::int32_t>();
        node.n_benign = n.at(4).get<std::uint32_t>();
        node.n_phishing = n.at(5).get<std::uint32_t>();
        node.impurity_decrease = n.at(6).get<double>();
        tree.nodes.push_back(node);
      }
      // Children must point forward inside the tree.
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        if (n.feature < 0) {
          if (n.n_benign + n.n_phishing == 0) throw DataError("empty leaf in model");
          continue;
        }
        if (static_cast<std::size_t>(n.feature) >= m.feature_names.size() || n.left <= static_cast<std::int32_t>(i) ||
            n.right <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(n.left) >= tree.nodes.size() ||
            static_cast<std::size_t>(n.right) >= tree.nodes.size())
          throw DataError("corrupt tree structure in model");
      }
      if (tree.nodes.empty()) throw DataError("empty tree in model");
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ForestModel& model) { write_file(path, model_to_json(model)); }

ForestModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

}  // namespace scout
