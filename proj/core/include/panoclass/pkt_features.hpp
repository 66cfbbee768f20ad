#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panoclass/feature_vector.hpp"
#include "panoclass/types.hpp"

namespace panoclass {

inline constexpr std::size_t kBinFeatureCount = 8;
inline constexpr std::size_t kSummaryStatCount = 7;
inline constexpr std::size_t kPacketSummaryFeatureCount = kBinFeatureCount * kSummaryStatCount;

// Packet-level features of one sliding window. Downlink statistics are over
// pkt_len; std is the population standard deviation.
struct BinFeatures {
  std::int64_t window_start_s = 0;
  std::uint64_t ul_frame_len_total = 0;
  std::uint64_t dl_pkt_size_total = 0;
  std::uint64_t dl_tcp_hdr_total = 0;
  std::uint64_t dl_pkt_count = 0;
  double dl_pkt_size_mean = 0.0;
  double dl_pkt_size_min = 0.0;
  double dl_pkt_size_max = 0.0;
  double dl_pkt_size_std = 0.0;

  // Feature values in bin_feature_names() order.
  std::array<double, kBinFeatureCount> values() const;
  bool operator==(const BinFeatures&) const = default;
};

const std::array<std::string, kBinFeatureCount>& bin_feature_names();
// mean, std, min, max, p25, p50, p75
const std::array<std::string, kSummaryStatCount>& summary_stat_names();
// `<binfeature>_<stat>`, feature-major.
const std::vector<std::string>& packet_summary_feature_names();

struct BinningConfig {
  int window_s = 5;
  int step_s = 1;
  int interval_s = 120;
};

// Sliding windows [i*step, i*step + window) seconds for every i with
// i*step + window <= min(interval, ceil(last timestamp)). Empty windows are
// kept as all-zero bins. Packets must be time-sorted and rebased to 0.
std::vector<BinFeatures> bin_packets(std::span<const PacketRecord> packets, const BinningConfig& cfg);
// Same, with the trace duration given explicitly, e.g. the span of the whole
// capture when `packets` is a filtered subset.
std::vector<BinFeatures> bin_packets(std::span<const PacketRecord> packets, const BinningConfig& cfg,
                                     std::int64_t duration_us);

// Number of bins bin_packets emits for a trace whose last packet is at
// `duration_us`.
std::size_t expected_bin_count(std::int64_t duration_us, const BinningConfig& cfg);

BinFeatures compute_bin_features(std::span<const PacketRecord> packets);

// Seven order/moment statistics per bin feature over all bins (56 values).
// Throws EmptyInputError on an empty list.
FeatureVector summarize_bins(std::span<const BinFeatures> bins);

// Linear interpolation between closest ranks (rank = q * (n - 1)) on sorted data.
double percentile_sorted(std::span<const double> sorted, double q);

// Feature vector for a single bin, used by the bin-level (real-time) model.
FeatureVector bin_vector(const BinFeatures& bin);

// Bin CSV: trace_id,window_start_s,<bin feature names>.
struct TraceBins {
  std::string trace_id;
  std::vector<BinFeatures> bins;
};
std::string write_bin_csv(std::span<const TraceBins> traces, std::span<const std::string> comments = {});
std::vector<TraceBins> read_bin_csv(std::string_view csv);

}  // namespace panoclass
