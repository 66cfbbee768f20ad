#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "panoclass/feature_vector.hpp"

namespace panoclass {

struct GbtHyperparams {
  int n_trees = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double l2_reg = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgumentError
  bool operator==(const GbtHyperparams&) const = default;
};

// Internal node when feature >= 0 (x < threshold goes left); leaf otherwise.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int depth() const;
  bool operator==(const Tree&) const = default;
};

struct GbtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;  // log-odds
  std::vector<std::string> feature_names;
  std::vector<double> importance;  // summed split gain, aligned with feature_names
  GbtHyperparams hyperparams;
  // Free-form training metadata (provenance, dataset size); round-trips verbatim.
  std::vector<std::pair<std::string, std::string>> metadata;

  bool operator==(const GbtModel&) const = default;
};

// Dense row-major training matrix.
struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::vector<int> labels;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols(), cols());
  }
};

TrainingSet to_training_set(const LabeledDataset& data);

// Second-order gradient boosting on logistic loss with exact greedy splits.
// `loss_history`, when given, receives the training log-loss after each round
// (index 0 is the base-score-only model).
GbtModel train(const TrainingSet& data, const GbtHyperparams& hp,
               std::vector<double>* loss_history = nullptr);
GbtModel train(const LabeledDataset& data, const GbtHyperparams& hp,
               std::vector<double>* loss_history = nullptr);

// Raw margin (log-odds) for a row in model feature order. No name checks.
double predict_margin(const GbtModel& model, std::span<const double> row);
double predict_proba(const GbtModel& model, std::span<const double> row);
// Checks x.names against the model schema (SchemaMismatchError).
double predict_proba(const GbtModel& model, const FeatureVector& x);
int predict_label(const GbtModel& model, const FeatureVector& x);

std::vector<std::pair<std::string, double>> feature_importance(const GbtModel& model,
                                                               std::size_t top_k);

std::string save_model(const GbtModel& model);
GbtModel load_model(std::string_view text);

inline double sigmoid(double margin);

}  // namespace panoclass

#include <cmath>

inline double panoclass::sigmoid(double margin) {
  return 1.0 / (1.0 + std::exp(-margin));
}
