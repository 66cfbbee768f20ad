#include "panoclass/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "panoclass/errors.hpp"

namespace panoclass {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;
// Splits must reduce the second-order loss estimate by more than this.
constexpr double kMinSplitGain = 1e-6;

double log_loss(std::span<const double> margins, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double m = margins[i];
    // log(1 + e^m) - y*m, stable for large |m|
    const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    total += softplus - labels[i] * m;
  }
  return total / static_cast<double>(margins.size());
}

struct SplitCandidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const std::vector<std::vector<std::uint32_t>>& order,
              const GbtHyperparams& hp, std::vector<double>& importance)
      : data_(data), order_(order), hp_(hp), importance_(importance), node_of_(data.rows(), 0) {}

  Tree build(std::span<const double> grad, std::span<const double> hess) {
    Tree tree;
    tree.nodes.emplace_back();
    stats_.assign(1, NodeStats{});
    std::fill(node_of_.begin(), node_of_.end(), 0);
    for (std::size_t i = 0; i < data_.rows(); ++i) {
      stats_[0].g += grad[i];
      stats_[0].h += hess[i];
    }

    std::vector<int> active{0};
    for (int depth = 0; depth < hp_.max_depth && !active.empty(); ++depth) {
      const auto best = find_splits(active, grad, hess);
      std::vector<int> next;
      std::vector<int> split_nodes;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (best[s].feature < 0 || !(best[s].gain > kMinSplitGain)) continue;
        const int id = active[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats_.resize(tree.nodes.size());
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = left;
        node.right = left + 1;
        importance_[static_cast<std::size_t>(best[s].feature)] += best[s].gain;
        next.push_back(left);
        next.push_back(left + 1);
        split_nodes.push_back(id);
      }
      if (split_nodes.empty()) break;
      for (std::size_t i = 0; i < data_.rows(); ++i) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_of_[i])];
        if (node.is_leaf()) continue;
        const double x = data_.values[i * data_.cols() + static_cast<std::size_t>(node.feature)];
        const int child = x < node.threshold ? node.left : node.right;
        node_of_[i] = child;
        stats_[static_cast<std::size_t>(child)].g += grad[i];
        stats_[static_cast<std::size_t>(child)].h += hess[i];
      }
      active = std::move(next);
    }

    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      if (tree.nodes[n].is_leaf()) tree.nodes[n].weight = -stats_[n].g / (stats_[n].h + hp_.l2_reg);
    }
    return tree;
  }

  // Leaf reached by each training row in the last built tree.
  const std::vector<int>& leaf_of() const { return node_of_; }

 private:
  std::vector<SplitCandidate> find_splits(const std::vector<int>& active, std::span<const double> grad,
                                          std::span<const double> hess) {
    std::vector<int> slot_of(stats_.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) slot_of[static_cast<std::size_t>(active[s])] = static_cast<int>(s);
    std::vector<SplitCandidate> best(active.size());
    std::vector<double> gl(active.size());
    std::vector<double> hl(active.size());
    std::vector<double> last(active.size());
    std::vector<char> seen(active.size());
    const double lambda = hp_.l2_reg;
    const std::size_t cols = data_.cols();

    for (std::size_t f = 0; f < cols; ++f) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (const std::uint32_t i : order_[f]) {
        const int slot = slot_of[static_cast<std::size_t>(node_of_[i])];
        if (slot < 0) continue;
        const auto s = static_cast<std::size_t>(slot);
        const double x = data_.values[i * cols + f];
        if (seen[s] && x > last[s]) {
          const NodeStats& tot = stats_[static_cast<std::size_t>(active[s])];
          const double gr = tot.g - gl[s];
          const double hr = tot.h - hl[s];
          if (hl[s] >= hp_.min_child_weight && hr >= hp_.min_child_weight) {
            const double gain = 0.5 * (gl[s] * gl[s] / (hl[s] + lambda) + gr * gr / (hr + lambda) -
                                       tot.g * tot.g / (tot.h + lambda));
            if (gain > best[s].gain) {
              best[s].gain = gain;
              best[s].feature = static_cast<int>(f);
              best[s].threshold = split_threshold(last[s], x);
            }
          }
        }
        gl[s] += grad[i];
        hl[s] += hess[i];
        last[s] = x;
        seen[s] = 1;
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const std::vector<std::vector<std::uint32_t>>& order_;
  const GbtHyperparams& hp_;
  std::vector<double>& importance_;
  std::vector<int> node_of_;
  std::vector<NodeStats> stats_;
};

double tree_value(const Tree& tree, std::span<const double> row) {
  std::size_t n = 0;
  while (!tree.nodes[n].is_leaf()) {
    const TreeNode& node = tree.nodes[n];
    n = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                                : node.right);
  }
  return tree.nodes[n].weight;
}

ordered_json node_to_json(const Tree& tree, std::size_t n) {
  const TreeNode& node = tree.nodes[n];
  ordered_json j;
  if (node.is_leaf()) {
    j["leaf"] = node.weight;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["left"] = node_to_json(tree, static_cast<std::size_t>(node.left));
  j["right"] = node_to_json(tree, static_cast<std::size_t>(node.right));
  return j;
}

// Rebuilds the flat layout in breadth-first order, which is the order the
// builder allocates nodes in.
Tree tree_from_json(const ordered_json& root, std::size_t n_features, const std::string& where) {
  Tree tree;
  std::deque<std::pair<const ordered_json*, std::string>> queue{{&root, where}};
  tree.nodes.emplace_back();
  std::size_t next = 0;
  while (!queue.empty()) {
    const auto [j, path] = queue.front();
    queue.pop_front();
    TreeNode& node = tree.nodes[next];
    if (!j->is_object()) throw DeserializationError("tree node is not an object", path);
    if (j->contains("leaf")) {
      node.weight = j->at("leaf").get<double>();
    } else {
      const int f = j->at("feature").get<int>();
      if (f < 0 || static_cast<std::size_t>(f) >= n_features)
        throw DeserializationError("split feature index out of range", path + "/feature");
      node.feature = f;
      node.threshold = j->at("threshold").get<double>();
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      queue.emplace_back(&j->at("left"), path + "/left");
      queue.emplace_back(&j->at("right"), path + "/right");
    }
    ++next;
  }
  return tree;
}

}  // namespace

void GbtHyperparams::validate() const {
  if (n_trees < 1) throw InvalidArgumentError("n_trees must be at least 1");
  if (max_depth < 1) throw InvalidArgumentError("max_depth must be at least 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw InvalidArgumentError("learning_rate must be in (0, 1]");
  if (!(min_child_weight >= 0.0)) throw InvalidArgumentError("min_child_weight must be non-negative");
  if (!(l2_reg >= 0.0)) throw InvalidArgumentError("l2_reg must be non-negative");
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    deepest = std::max(deepest, d[n]);
    if (!nodes[n].is_leaf()) {
      d[static_cast<std::size_t>(nodes[n].left)] = d[n] + 1;
      d[static_cast<std::size_t>(nodes[n].right)] = d[n] + 1;
    }
  }
  return deepest;
}

TrainingSet to_training_set(const LabeledDataset& data) {
  data.validate();
  TrainingSet t;
  t.feature_names = data.feature_names;
  t.values.reserve(data.size() * data.feature_names.size());
  t.labels.reserve(data.size());
  for (const auto& v : data.vectors) {
    t.values.insert(t.values.end(), v.values.begin(), v.values.end());
    t.labels.push_back(*v.label);
  }
  return t;
}

GbtModel train(const TrainingSet& data, const GbtHyperparams& hp, std::vector<double>* loss_history) {
  hp.validate();
  const std::size_t rows = data.rows();
  const std::size_t cols = data.cols();
  if (data.values.size() != rows * cols) throw SchemaMismatchError("training matrix shape mismatch");
  std::size_t positives = 0;
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw InvalidArgumentError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives < 2 || rows - positives < 2)
    throw DegenerateLabelsError("training needs at least 2 samples of each class (got " +
                                std::to_string(positives) + " positive, " +
                                std::to_string(rows - positives) + " negative)");
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    if (!std::isfinite(data.values[i]))
      throw InvalidFeatureError("non-finite value in row " + std::to_string(i / cols) + ", feature '" +
                                data.feature_names[i % cols] + "'");
  }

  GbtModel model;
  model.feature_names = data.feature_names;
  model.hyperparams = hp;
  model.importance.assign(cols, 0.0);
  const double prevalence = static_cast<double>(positives) / static_cast<double>(rows);
  model.base_score = std::log(prevalence / (1.0 - prevalence));

  std::vector<std::vector<std::uint32_t>> order(cols);
  for (std::size_t f = 0; f < cols; ++f) {
    order[f].resize(rows);
    std::iota(order[f].begin(), order[f].end(), 0u);
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) {
      return data.values[a * cols + f] < data.values[b * cols + f];
    });
  }

  std::vector<double> margin(rows, model.base_score);
  std::vector<double> grad(rows);
  std::vector<double> hess(rows);
  if (loss_history) {
    loss_history->clear();
    loss_history->push_back(log_loss(margin, data.labels));
  }
  TreeBuilder builder(data, order, hp, model.importance);
  model.trees.reserve(static_cast<std::size_t>(hp.n_trees));
  for (int t = 0; t < hp.n_trees; ++t) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - data.labels[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = builder.build(grad, hess);
    const auto& leaf = builder.leaf_of();
    for (std::size_t i = 0; i < rows; ++i)
      margin[i] += hp.learning_rate * tree.nodes[static_cast<std::size_t>(leaf[i])].weight;
    model.trees.push_back(std::move(tree));
    if (loss_history) loss_history->push_back(log_loss(margin, data.labels));
  }
  model.metadata.emplace_back("training_rows", std::to_string(rows));
  model.metadata.emplace_back("training_positives", std::to_string(positives));
  return model;
}

GbtModel train(const LabeledDataset& data, const GbtHyperparams& hp, std::vector<double>* loss_history) {
  return train(to_training_set(data), hp, loss_history);
}

double predict_margin(const GbtModel& model, std::span<const double> row) {
  if (row.size() != model.feature_names.size())
    throw SchemaMismatchError("expected " + std::to_string(model.feature_names.size()) + " features, got " +
                              std::to_string(row.size()));
  double sum = 0.0;
  for (const auto& t : model.trees) sum += tree_value(t, row);
  return model.base_score + model.hyperparams.learning_rate * sum;
}

double predict_proba(const GbtModel& model, std::span<const double> row) {
  return sigmoid(predict_margin(model, row));
}

double predict_proba(const GbtModel& model, const FeatureVector& x) {
  if (x.names != model.feature_names) {
    std::string detail;
    if (x.names.size() != model.feature_names.size()) {
      detail = "model expects " + std::to_string(model.feature_names.size()) + " features, input has " +
               std::to_string(x.names.size());
    } else {
      for (std::size_t i = 0; i < x.names.size(); ++i) {
        if (x.names[i] != model.feature_names[i]) {
          detail = "feature " + std::to_string(i) + " is '" + x.names[i] + "', model expects '" +
                   model.feature_names[i] + "'";
          break;
        }
      }
    }
    throw SchemaMismatchError("schema mismatch: " + detail);
  }
  if (x.values.size() != x.names.size()) throw SchemaMismatchError("feature vector names/values differ in length");
  return predict_proba(model, std::span<const double>(x.values));
}

int predict_label(const GbtModel& model, const FeatureVector& x) {
  return predict_proba(model, x) >= 0.5 ? 1 : 0;
}

std::vector<std::pair<std::string, double>> feature_importance(const GbtModel& model, std::size_t top_k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < model.importance.size(); ++i)
    if (model.importance[i] > 0.0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return model.importance[a] > model.importance[b]; });
  if (idx.size() > top_k) idx.resize(top_k);
  std::vector<std::pair<std::string, double>> out;
  for (auto i : idx) out.emplace_back(model.feature_names[i], model.importance[i]);
  return out;
}

std::string save_model(const GbtModel& model) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "gbt_model";
  const auto& hp = model.hyperparams;
  j["hyperparams"] = ordered_json{{"n_trees", hp.n_trees},
                                  {"max_depth", hp.max_depth},
                                  {"learning_rate", hp.learning_rate},
                                  {"min_child_weight", hp.min_child_weight},
                                  {"l2_reg", hp.l2_reg},
                                  {"seed", hp.seed}};
  j["feature_names"] = model.feature_names;
  j["base_score"] = model.base_score;
  ordered_json meta = ordered_json::array();
  for (const auto& [k, v] : model.metadata) meta.push_back(ordered_json::array({k, v}));
  j["metadata"] = std::move(meta);
  ordered_json trees = ordered_json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  ordered_json imp = ordered_json::object();
  for (std::size_t i = 0; i < model.feature_names.size(); ++i) imp[model.feature_names[i]] = model.importance[i];
  j["importance"] = std::move(imp);
  return j.dump(1) + "\n";
}

GbtModel load_model(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw DeserializationError(std::string("model is not valid JSON: ") + e.what(),
                               "byte " + std::to_string(e.byte));
  }
  std::string where = "/";
  try {
    GbtModel m;
    where = "/format_version";
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw DeserializationError("unsupported format_version", where);
    where = "/kind";
    if (j.at("kind").get<std::string>() != "gbt_model") throw DeserializationError("not a gbt_model document", where);
    where = "/hyperparams";
    const auto& hp = j.at("hyperparams");
    m.hyperparams.n_trees = hp.at("n_trees").get<int>();
    m.hyperparams.max_depth = hp.at("max_depth").get<int>();
    m.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
    m.hyperparams.min_child_weight = hp.at("min_child_weight").get<double>();
    m.hyperparams.l2_reg = hp.at("l2_reg").get<double>();
    m.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
    where = "/feature_names";
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    where = "/base_score";
    m.base_score = j.at("base_score").get<double>();
    where = "/metadata";
    for (const auto& kv : j.at("metadata")) m.metadata.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    where = "/trees";
    const auto& trees = j.at("trees");
    for (std::size_t t = 0; t < trees.size(); ++t) {
      m.trees.push_back(tree_from_json(trees[t], m.feature_names.size(), "/trees/" + std::to_string(t)));
    }
    where = "/importance";
    const auto& imp = j.at("importance");
    m.importance.assign(m.feature_names.size(), 0.0);
    for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
      where = "/importance/" + m.feature_names[i];
      m.importance[i] = imp.at(m.feature_names[i]).get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DeserializationError(std::string("malformed model: ") + e.what(), where);
  }
}

}  // namespace panoclass
