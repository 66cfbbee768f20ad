#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoclass/feature_vector.hpp"
#include "panoclass/trace_ingest.hpp"

namespace panoclass {

inline constexpr double kDefaultBurstGapS = 0.5;
inline constexpr std::size_t kFlowFeatureCount = 20;

// Maximal run of same-direction packets with consecutive gaps <= threshold.
struct Burst {
  Direction direction = Direction::downlink;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  std::uint64_t size = 0;  // sum of pkt_len
  std::uint64_t pkt_count = 0;

  bool operator==(const Burst&) const = default;
};

std::vector<Burst> detect_bursts(const FlowRecord& flow, Direction direction,
                                 double gap_threshold_s = kDefaultBurstGapS);

struct DirectionalFlowFeatures {
  double throughput_mean_Bps = 0.0;
  double frame_gap_mean_s = 0.0;
  double frame_size_mean_B = 0.0;
  double retransmissions_count = 0.0;
  double burst_size_max_B = 0.0;
  double burst_rate_max_Bps = 0.0;
  double burst_time_max_s = 0.0;
  double burst_pkt_count_max = 0.0;
  double burst_gap_mean_s = 0.0;
  double burst_duration_mean_s = 0.0;

  bool operator==(const DirectionalFlowFeatures&) const = default;
};

struct FlowFeatureSet {
  DirectionalFlowFeatures ul;
  DirectionalFlowFeatures dl;
  std::uint64_t bytes_dl = 0;
  // Tie-break for equal bytes_dl; not part of the feature values.
  std::int64_t start_us = 0;

  // ul features then dl features, in flow_feature_names() order.
  std::array<double, kFlowFeatureCount> values() const;
  static FlowFeatureSet from_values(std::span<const double> values, std::uint64_t bytes_dl,
                                    std::int64_t start_us);
  bool operator==(const FlowFeatureSet&) const = default;
};

// `ul_<feature>` x10 then `dl_<feature>` x10.
const std::array<std::string, kFlowFeatureCount>& flow_feature_names();

// Throws EmptyInputError on a flow without packets.
FlowFeatureSet compute_flow_features(const FlowRecord& flow,
                                     double gap_threshold_s = kDefaultBurstGapS);

// Number of flows to aggregate; nullopt selects all flows.
using TopFlows = std::optional<int>;
inline constexpr TopFlows kAllFlows = std::nullopt;

std::string top_flows_label(TopFlows n);  // "1", "4", "ALL"
TopFlows parse_top_flows(std::string_view s);

// Sorts by bytes_dl descending (earlier start first on ties) and aggregates the
// first n flows: n == 1 emits the 20 features as `<feature>_mean`, otherwise
// mean/sum/min/max of each feature (80 values).
FeatureVector aggregate_top_flows(std::span<const FlowFeatureSet> flows, TopFlows n);
std::vector<std::string> aggregate_feature_names(TopFlows n);

// One row of the flow-feature CSV.
struct FlowFeatureRow {
  std::string trace_id;
  std::string video_id;
  Platform platform = Platform::yt;
  std::optional<int> label;
  int flow_rank = 0;
  FlowFeatureSet features;

  bool operator==(const FlowFeatureRow&) const = default;
};

// Flow-feature CSV: trace_id,video_id,platform,label,flow_rank,bytes_dl,<20 names>.
std::string write_flow_csv(std::span<const FlowFeatureRow> rows, std::span<const std::string> comments = {});
// start_us is not stored in the CSV; readers set it to flow_rank so the
// stored order is reproduced on ties.
std::vector<FlowFeatureRow> read_flow_csv(std::string_view csv);

// Groups rows by trace (first-seen order) and aggregates each trace's flows.
LabeledDataset aggregate_flow_rows(std::span<const FlowFeatureRow> rows, TopFlows n);

}  // namespace panoclass
