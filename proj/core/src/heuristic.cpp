#include "panoclass/heuristic.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "panoclass/errors.hpp"

namespace panoclass {
namespace {

using ordered_json = nlohmann::ordered_json;

std::size_t feature_index(const std::vector<std::string>& names, const std::string& f) {
  const auto it = std::find(names.begin(), names.end(), f);
  if (it == names.end()) throw SchemaMismatchError("feature '" + f + "' not present");
  return static_cast<std::size_t>(it - names.begin());
}

ThresholdModel::Entry fit_one(const std::string& name, std::vector<std::pair<double, int>> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::size_t total_pos = 0;
  for (const auto& [x, y] : xs) total_pos += static_cast<std::size_t>(y);

  ThresholdModel::Entry best;
  best.feature = name;
  std::size_t best_correct = 0;
  bool have = false;
  auto consider = [&](double threshold, std::size_t pos_at_or_below, std::size_t count_at_or_below) {
    // above_is_360 is right on positives above and negatives at/below
    const std::size_t correct_above = (total_pos - pos_at_or_below) + (count_at_or_below - pos_at_or_below);
    const std::size_t correct_below = n - correct_above;
    if (!have || correct_above > best_correct) {
      best.threshold = threshold;
      best.polarity = Polarity::above_is_360;
      best_correct = correct_above;
      have = true;
    }
    if (correct_below > best_correct) {
      best.threshold = threshold;
      best.polarity = Polarity::below_is_360;
      best_correct = correct_below;
    }
  };

  consider(xs.front().first - 1.0, 0, 0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pos += static_cast<std::size_t>(xs[i].second);
    if (i + 1 < n && xs[i + 1].first > xs[i].first) {
      const double lo = xs[i].first;
      const double hi = xs[i + 1].first;
      double mid = lo + (hi - lo) / 2.0;
      if (!(mid > lo)) mid = hi;
      consider(mid, pos, i + 1);
    }
  }
  best.train_accuracy = static_cast<double>(best_correct) / static_cast<double>(n);
  return best;
}

}  // namespace

ThresholdModel fit_thresholds(const LabeledDataset& data, std::span<const std::string> features) {
  data.validate();
  if (features.empty()) throw InvalidArgumentError("heuristic needs at least one feature");
  std::set<std::string> unique(features.begin(), features.end());
  if (unique.size() != features.size()) throw InvalidArgumentError("heuristic features must be unique");
  std::size_t positives = 0;
  for (const auto& v : data.vectors) positives += static_cast<std::size_t>(*v.label);
  if (positives == 0 || positives == data.size())
    throw DegenerateLabelsError("threshold fitting needs both classes");

  ThresholdModel model;
  for (const auto& f : features) {
    const std::size_t idx = feature_index(data.feature_names, f);
    std::vector<std::pair<double, int>> xs;
    xs.reserve(data.size());
    for (const auto& v : data.vectors) xs.emplace_back(v.values[idx], *v.label);
    model.entries.push_back(fit_one(f, std::move(xs)));
  }
  return model;
}

int heuristic_predict(const ThresholdModel& model, const FeatureVector& x) {
  if (model.entries.empty()) throw InvalidArgumentError("empty threshold model");
  std::size_t ones = 0;
  for (const auto& e : model.entries) {
    const std::size_t idx = feature_index(x.names, e.feature);
    ones += static_cast<std::size_t>(e.vote(x.values.at(idx)));
  }
  return 2 * ones > model.entries.size() ? 1 : 0;
}

std::string save_threshold_model(const ThresholdModel& model) {
  ordered_json j;
  j["format_version"] = 1;
  j["kind"] = "threshold_model";
  ordered_json entries = ordered_json::array();
  for (const auto& e : model.entries) {
    entries.push_back(ordered_json{{"feature", e.feature},
                                   {"threshold", e.threshold},
                                   {"polarity", e.polarity == Polarity::above_is_360 ? "above" : "below"},
                                   {"train_accuracy", e.train_accuracy}});
  }
  j["entries"] = std::move(entries);
  return j.dump(1) + "\n";
}

ThresholdModel load_threshold_model(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw DeserializationError(std::string("threshold model is not valid JSON: ") + e.what(),
                               "byte " + std::to_string(e.byte));
  }
  std::string where = "/";
  try {
    where = "/kind";
    if (j.at("format_version").get<int>() != 1 || j.at("kind").get<std::string>() != "threshold_model")
      throw DeserializationError("not a version-1 threshold_model document", where);
    ThresholdModel m;
    const auto& entries = j.at("entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      where = "/entries/" + std::to_string(i);
      const auto& e = entries[i];
      ThresholdModel::Entry en;
      en.feature = e.at("feature").get<std::string>();
      en.threshold = e.at("threshold").get<double>();
      const auto pol = e.at("polarity").get<std::string>();
      if (pol != "above" && pol != "below") throw DeserializationError("bad polarity", where + "/polarity");
      en.polarity = pol == "above" ? Polarity::above_is_360 : Polarity::below_is_360;
      en.train_accuracy = e.at("train_accuracy").get<double>();
      m.entries.push_back(std::move(en));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DeserializationError(std::string("malformed threshold model: ") + e.what(), where);
  }
}

}  // namespace panoclass
