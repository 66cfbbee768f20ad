#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panoclass/feature_vector.hpp"
#include "panoclass/flw_features.hpp"
#include "panoclass/pkt_features.hpp"
#include "panoclass/synth.hpp"
#include "panoclass/types.hpp"

namespace panoclass {

// One labeled capture ready for feature extraction.
struct TraceInput {
  std::string trace_id;
  std::string video_id;
  Platform platform = Platform::yt;
  std::optional<int> label;
  std::vector<PacketRecord> packets;  // directions assigned, time-sorted
};

struct ExtractOptions {
  BinningConfig binning;
  double burst_gap_s = kDefaultBurstGapS;
  // Skip the SNI keyword filter and use every flow of the capture.
  bool all_flows = false;
};

TraceInput to_trace_input(const SynthTrace& t);

// Packets of the trace's platform video flows, or all packets with all_flows.
std::vector<PacketRecord> video_stream(const TraceInput& t, bool all_flows);

std::vector<BinFeatures> trace_bins(const TraceInput& t, const ExtractOptions& opts);
// Summary vector over the bins of the first interval_s seconds.
FeatureVector packet_features(const TraceInput& t, const ExtractOptions& opts);
// One row per kept flow, ranked by downlink bytes.
std::vector<FlowFeatureRow> flow_rows(const TraceInput& t, const ExtractOptions& opts);

// Trace list for batch runs: `trace_id,video_id,platform,label,path[,client_ip]`.
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  std::string trace_id;
  std::string video_id;
  Platform platform = Platform::yt;
  std::optional<int> label;
  std::string path;
  std::string client_ip;  // empty when the capture already carries directions

  bool operator==(const ManifestEntry&) const = default;
};

std::string write_manifest(std::span<const ManifestEntry> entries, std::span<const std::string> comments = {});
std::vector<ManifestEntry> read_manifest(std::string_view csv);

}  // namespace panoclass
