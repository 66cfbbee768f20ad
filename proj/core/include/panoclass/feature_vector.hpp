#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoclass/types.hpp"

namespace panoclass {

// Binary label: 0 = normal video, 1 = 360-degree video.
inline constexpr int kLabelNormal = 0;
inline constexpr int kLabel360 = 1;

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::optional<int> label;
  std::string trace_id;
  std::string video_id;
  Platform platform = Platform::yt;

  bool operator==(const FeatureVector&) const = default;
};

// Labeled vectors sharing one feature ordering.
struct LabeledDataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureVector> vectors;

  // Throws SchemaMismatchError / InvalidArgumentError when vectors disagree
  // with feature_names or carry no label.
  void validate() const;
  std::size_t size() const { return vectors.size(); }
};

// Builds a dataset from vectors that share the first vector's names.
LabeledDataset make_dataset(std::vector<FeatureVector> vectors);

// Subset by indices, in the given order.
LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices);

// Keeps only vectors of one platform (nullopt keeps everything).
LabeledDataset filter_platform(const LabeledDataset& data, std::optional<Platform> platform);

// Feature CSV: trace_id,video_id,platform,label,<feature names...>. An absent
// label is written as an empty field.
std::string write_feature_csv(const LabeledDataset& data, std::span<const std::string> comments = {});
LabeledDataset read_feature_csv(std::string_view csv);

}  // namespace panoclass
