#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scout/features.hpp"

namespace scout {

// Labeled numeric rows. y[i] is 1 for phishing, 0 for benign.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::size_t arity() const { return feature_names.size(); }
  // Throws DataError on ragged rows, labels outside {0,1} or NaN values.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

// Throws DataError when a row is unlabeled.
Dataset dataset_from_rows(const std::vector<FeatureRow>& rows);

struct ForestParams {
  std::size_t n_trees = 200;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t mtry = 4;       // clamped to the feature count
  std::uint64_t seed = 7;
  bool bootstrap = true;
  std::size_t threads = 1;    // training parallelism; does not affect the model
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Flat tree node. Leaves have feature == -1. Rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t n_benign = 0;
  std::uint32_t n_phishing = 0;
  double impurity_decrease = 0.0;  // weighted by node sample count; 0 for leaves
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::uint64_t seed = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict_proba(std::span<const double> row) const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  ForestParams params;
  std::vector<DecisionTree> trees;
  std::size_t training_rows = 0;
  std::size_t training_phishing = 0;
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

double gini(std::uint64_t n_benign, std::uint64_t n_phishing);

// Seed of tree `index` derived from the forest seed.
std::uint64_t tree_seed(std::uint64_t seed, std::size_t index);
// Bootstrap row indices (with replacement, size n) reproducible from the tree seed.
std::vector<std::size_t> bootstrap_sample(std::uint64_t tree_seed, std::size_t n);

// Throws DataError on empty or single-class data.
ForestModel train(const Dataset& data, const ForestParams& params = {});

struct Prediction {
  bool phishing = false;
  double probability = 0.0;
};
// Throws DataError on arity mismatch.
Prediction predict(const ForestModel& model, std::span<const double> row);

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  double roc_auc = 0;  // NaN when only one class is present
};

Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
// Mann-Whitney statistic over predicted probabilities with mid-ranks; ties count 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
// Throws DataError on an empty test set.
Metrics evaluate(const ForestModel& model, const Dataset& test);

struct CrossValidation {
  std::vector<Metrics> folds;
  Metrics mean;                       // metric-wise mean; confusion counts summed
  std::vector<std::size_t> fold_of;   // fold index of each input row
  std::vector<std::string> warnings;
};

// Stratified k-fold: each class is shuffled with split_seed, classes are
// concatenated and row i of that order goes to fold i mod k.
std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k, std::uint64_t split_seed,
                                      std::vector<std::string>* warnings = nullptr);
CrossValidation cross_validate(const Dataset& data, std::size_t k, std::uint64_t split_seed,
                               const ForestParams& params = {});

struct Holdout {
  std::vector<std::size_t> train_rows, test_rows;
  Metrics metrics;
};
// Stratified holdout; round(train_fraction * class size) rows per class train.
Holdout holdout_evaluate(const Dataset& data, double train_fraction, std::uint64_t split_seed,
                         const ForestParams& params = {});

// Per-feature sum of weighted Gini decrease over all trees, normalized to 1.
// All zeros when no split reduced impurity.
std::vector<std::pair<std::string, double>> feature_importance(const ForestModel& model);

std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace scout
