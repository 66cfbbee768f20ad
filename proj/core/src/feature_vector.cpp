#include "panoclass/feature_vector.hpp"

#include <algorithm>
#include <set>

#include "panoclass/errors.hpp"
#include "panoclass/text.hpp"

namespace panoclass {

void LabeledDataset::validate() const {
  std::set<std::string_view> unique(feature_names.begin(), feature_names.end());
  if (unique.size() != feature_names.size()) throw SchemaMismatchError("duplicate feature names");
  for (const auto& v : vectors) {
    if (v.names != feature_names)
      throw SchemaMismatchError("vector '" + v.trace_id + "' does not share the dataset feature names");
    if (v.values.size() != v.names.size())
      throw SchemaMismatchError("vector '" + v.trace_id + "' has mismatched names/values");
    if (!v.label || (*v.label != kLabelNormal && *v.label != kLabel360))
      throw InvalidArgumentError("vector '" + v.trace_id + "' lacks a 0/1 label");
  }
}

LabeledDataset make_dataset(std::vector<FeatureVector> vectors) {
  LabeledDataset d;
  if (!vectors.empty()) d.feature_names = vectors.front().names;
  d.vectors = std::move(vectors);
  return d;
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices) {
  LabeledDataset d;
  d.feature_names = data.feature_names;
  d.vectors.reserve(indices.size());
  for (auto i : indices) d.vectors.push_back(data.vectors.at(i));
  return d;
}

LabeledDataset filter_platform(const LabeledDataset& data, std::optional<Platform> platform) {
  if (!platform) return data;
  LabeledDataset d;
  d.feature_names = data.feature_names;
  for (const auto& v : data.vectors)
    if (v.platform == *platform) d.vectors.push_back(v);
  return d;
}

std::string write_feature_csv(const LabeledDataset& data, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "trace_id,video_id,platform,label";
  for (const auto& n : data.feature_names) out += "," + n;
  out += '\n';
  for (const auto& v : data.vectors) {
    if (v.values.size() != data.feature_names.size())
      throw SchemaMismatchError("vector '" + v.trace_id + "' does not match the dataset schema");
    out += v.trace_id + ',' + v.video_id + ',' + std::string(to_string(v.platform)) + ',';
    if (v.label) out += std::to_string(*v.label);
    for (double x : v.values) out += ',' + text::format_double(x);
    out += '\n';
  }
  return out;
}

LabeledDataset read_feature_csv(std::string_view csv) {
  text::LineReader reader(csv);
  std::string_view line;
  std::size_t off = 0;
  if (!reader.next(line, off)) throw ParseError("missing feature CSV header", 0);
  const auto header = text::split(line);
  if (header.size() < 4 || header[0] != "trace_id" || header[1] != "video_id" ||
      header[2] != "platform" || header[3] != "label")
    throw ParseError("feature CSV header must start with trace_id,video_id,platform,label", off);
  LabeledDataset d;
  for (std::size_t i = 4; i < header.size(); ++i) d.feature_names.emplace_back(header[i]);
  while (reader.next(line, off)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != header.size()) throw ParseError("wrong field count in feature CSV", off);
    FeatureVector v;
    try {
      v.trace_id = std::string(f[0]);
      v.video_id = std::string(f[1]);
      v.platform = parse_platform(f[2]);
      if (!text::trim(f[3]).empty()) v.label = static_cast<int>(text::parse_int(f[3]));
      v.names = d.feature_names;
      v.values.reserve(d.feature_names.size());
      for (std::size_t i = 4; i < f.size(); ++i) v.values.push_back(text::parse_double(f[i]));
    } catch (const InvalidArgumentError& e) {
      throw ParseError(std::string("feature CSV: ") + e.what(), off);
    }
    d.vectors.push_back(std::move(v));
  }
  return d;
}

}  // namespace panoclass
