#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panoclass/feature_vector.hpp"

namespace panoclass {

enum class Polarity { above_is_360, below_is_360 };

// One learned threshold per feature; the final label is the majority of the
// per-feature votes (ties -> normal).
struct ThresholdModel {
  struct Entry {
    std::string feature;
    double threshold = 0.0;
    Polarity polarity = Polarity::above_is_360;
    double train_accuracy = 0.0;

    int vote(double x) const {
      const bool above = x > threshold;
      return (polarity == Polarity::above_is_360) == above ? 1 : 0;
    }
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  bool operator==(const ThresholdModel&) const = default;
};

// Per feature: candidate thresholds are one value below the minimum plus the
// midpoints of consecutive sorted unique values; picks the threshold and
// polarity with the highest training accuracy (ties: lower threshold, then
// above_is_360).
ThresholdModel fit_thresholds(const LabeledDataset& data, std::span<const std::string> features);

int heuristic_predict(const ThresholdModel& model, const FeatureVector& x);

std::string save_threshold_model(const ThresholdModel& model);
ThresholdModel load_threshold_model(std::string_view text);

}  // namespace panoclass
