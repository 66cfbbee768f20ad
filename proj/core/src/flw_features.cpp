#include "panoclass/flw_features.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "panoclass/errors.hpp"
#include "panoclass/text.hpp"

namespace panoclass {
namespace {

constexpr double kUsPerS = 1e6;

DirectionalFlowFeatures direction_features(const FlowRecord& flow, Direction dir, double gap_threshold_s) {
  DirectionalFlowFeatures f;
  std::uint64_t bytes = 0;
  std::uint64_t frames = 0;
  std::size_t count = 0;
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::uint64_t retrans = 0;
  for (const auto& p : flow.packets) {
    if (p.direction != dir) continue;
    if (count == 0) first = p.timestamp_us;
    last = p.timestamp_us;
    ++count;
    bytes += p.pkt_len;
    frames += p.frame_len;
    if (flow.key.proto == Protocol::tcp && p.tcp_seq) {
      const std::uint32_t payload = p.pkt_len - p.tcp_hdr_len;
      if (payload > 0 && !seen.emplace(*p.tcp_seq, payload).second) ++retrans;
    }
  }
  if (count == 0) return f;

  const double duration_s = static_cast<double>(flow.end_us - flow.start_us) / kUsPerS;
  f.throughput_mean_Bps = duration_s > 0 ? static_cast<double>(bytes) / duration_s : static_cast<double>(bytes);
  f.frame_gap_mean_s =
      count >= 2 ? static_cast<double>(last - first) / kUsPerS / static_cast<double>(count - 1) : 0.0;
  f.frame_size_mean_B = static_cast<double>(frames) / static_cast<double>(count);
  f.retransmissions_count = static_cast<double>(retrans);

  const auto bursts = detect_bursts(flow, dir, gap_threshold_s);
  double duration_sum = 0.0;
  double gap_sum = 0.0;
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    const auto& b = bursts[i];
    const double dur = static_cast<double>(b.end_us - b.start_us) / kUsPerS;
    const double size = static_cast<double>(b.size);
    f.burst_size_max_B = std::max(f.burst_size_max_B, size);
    f.burst_rate_max_Bps = std::max(f.burst_rate_max_Bps, dur > 0 ? size / dur : size);
    f.burst_time_max_s = std::max(f.burst_time_max_s, dur);
    f.burst_pkt_count_max = std::max(f.burst_pkt_count_max, static_cast<double>(b.pkt_count));
    duration_sum += dur;
    if (i > 0) gap_sum += static_cast<double>(b.start_us - bursts[i - 1].end_us) / kUsPerS;
  }
  f.burst_duration_mean_s = duration_sum / static_cast<double>(bursts.size());
  f.burst_gap_mean_s = bursts.size() >= 2 ? gap_sum / static_cast<double>(bursts.size() - 1) : 0.0;
  return f;
}

std::array<double, 10> to_array(const DirectionalFlowFeatures& d) {
  return {d.throughput_mean_Bps, d.frame_gap_mean_s,  d.frame_size_mean_B,  d.retransmissions_count,
          d.burst_size_max_B,    d.burst_rate_max_Bps, d.burst_time_max_s,  d.burst_pkt_count_max,
          d.burst_gap_mean_s,    d.burst_duration_mean_s};
}

DirectionalFlowFeatures from_array(std::span<const double> v) {
  DirectionalFlowFeatures d;
  d.throughput_mean_Bps = v[0];
  d.frame_gap_mean_s = v[1];
  d.frame_size_mean_B = v[2];
  d.retransmissions_count = v[3];
  d.burst_size_max_B = v[4];
  d.burst_rate_max_Bps = v[5];
  d.burst_time_max_s = v[6];
  d.burst_pkt_count_max = v[7];
  d.burst_gap_mean_s = v[8];
  d.burst_duration_mean_s = v[9];
  return d;
}

std::vector<FlowFeatureSet> sorted_by_volume(std::span<const FlowFeatureSet> flows) {
  std::vector<FlowFeatureSet> sorted(flows.begin(), flows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const FlowFeatureSet& a, const FlowFeatureSet& b) {
    if (a.bytes_dl != b.bytes_dl) return a.bytes_dl > b.bytes_dl;
    return a.start_us < b.start_us;
  });
  return sorted;
}

const std::array<std::string, 4>& aggregate_stat_names() {
  static const std::array<std::string, 4> names{"mean", "sum", "min", "max"};
  return names;
}

}  // namespace

std::vector<Burst> detect_bursts(const FlowRecord& flow, Direction direction, double gap_threshold_s) {
  std::vector<Burst> bursts;
  const double threshold_us = gap_threshold_s * kUsPerS;
  for (const auto& p : flow.packets) {
    if (p.direction != direction) continue;
    if (bursts.empty() || static_cast<double>(p.timestamp_us - bursts.back().end_us) > threshold_us) {
      bursts.push_back(Burst{direction, p.timestamp_us, p.timestamp_us, 0, 0});
    }
    Burst& b = bursts.back();
    b.end_us = p.timestamp_us;
    b.size += p.pkt_len;
    ++b.pkt_count;
  }
  return bursts;
}

std::array<double, kFlowFeatureCount> FlowFeatureSet::values() const {
  std::array<double, kFlowFeatureCount> out{};
  const auto u = to_array(ul);
  const auto d = to_array(dl);
  std::copy(u.begin(), u.end(), out.begin());
  std::copy(d.begin(), d.end(), out.begin() + 10);
  return out;
}

FlowFeatureSet FlowFeatureSet::from_values(std::span<const double> values, std::uint64_t bytes_dl,
                                           std::int64_t start_us) {
  if (values.size() != kFlowFeatureCount) throw InvalidArgumentError("flow feature set needs 20 values");
  FlowFeatureSet f;
  f.ul = from_array(values.subspan(0, 10));
  f.dl = from_array(values.subspan(10, 10));
  f.bytes_dl = bytes_dl;
  f.start_us = start_us;
  return f;
}

const std::array<std::string, kFlowFeatureCount>& flow_feature_names() {
  static const std::array<std::string, kFlowFeatureCount> names = [] {
    static const std::array<std::string, 10> base{
        "throughput_mean_Bps", "frame_gap_mean_s",   "frame_size_mean_B", "retransmissions_count",
        "burst_size_max_B",    "burst_rate_max_Bps", "burst_time_max_s",  "burst_pkt_count_max",
        "burst_gap_mean_s",    "burst_duration_mean_s"};
    std::array<std::string, kFlowFeatureCount> out;
    for (std::size_t i = 0; i < 10; ++i) {
      out[i] = "ul_" + base[i];
      out[10 + i] = "dl_" + base[i];
    }
    return out;
  }();
  return names;
}

FlowFeatureSet compute_flow_features(const FlowRecord& flow, double gap_threshold_s) {
  if (flow.packets.empty()) throw EmptyInputError("flow has no packets");
  FlowFeatureSet f;
  f.ul = direction_features(flow, Direction::uplink, gap_threshold_s);
  f.dl = direction_features(flow, Direction::downlink, gap_threshold_s);
  f.bytes_dl = flow.bytes_dl;
  f.start_us = flow.start_us;
  return f;
}

std::string top_flows_label(TopFlows n) { return n ? std::to_string(*n) : "ALL"; }

TopFlows parse_top_flows(std::string_view s) {
  const auto t = text::trim(s);
  if (t == "ALL" || t == "all") return kAllFlows;
  const auto v = text::parse_int(t);
  if (v <= 0) throw InvalidArgumentError("number of flows must be positive or ALL");
  return static_cast<int>(v);
}

std::vector<std::string> aggregate_feature_names(TopFlows n) {
  std::vector<std::string> names;
  if (n && *n == 1) {
    for (const auto& f : flow_feature_names()) names.push_back(f + "_mean");
    return names;
  }
  for (const auto& f : flow_feature_names())
    for (const auto& s : aggregate_stat_names()) names.push_back(f + "_" + s);
  return names;
}

FeatureVector aggregate_top_flows(std::span<const FlowFeatureSet> flows, TopFlows n) {
  if (n && *n <= 0) throw InvalidArgumentError("number of flows must be positive, got " + std::to_string(*n));
  if (flows.empty()) throw EmptyInputError("no flows to aggregate");
  const auto sorted = sorted_by_volume(flows);
  const std::size_t take = n ? std::min<std::size_t>(static_cast<std::size_t>(*n), sorted.size()) : sorted.size();

  FeatureVector fv;
  fv.names = aggregate_feature_names(n);
  if (n && *n == 1) {
    const auto v = sorted.front().values();
    fv.values.assign(v.begin(), v.end());
    return fv;
  }
  fv.values.reserve(kFlowFeatureCount * 4);
  for (std::size_t f = 0; f < kFlowFeatureCount; ++f) {
    double sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
      const double v = sorted[i].values()[f];
      sum += v;
      lo = i == 0 ? v : std::min(lo, v);
      hi = i == 0 ? v : std::max(hi, v);
    }
    fv.values.push_back(sum / static_cast<double>(take));
    fv.values.push_back(sum);
    fv.values.push_back(lo);
    fv.values.push_back(hi);
  }
  return fv;
}

std::string write_flow_csv(std::span<const FlowFeatureRow> rows, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "trace_id,video_id,platform,label,flow_rank,bytes_dl";
  for (const auto& n : flow_feature_names()) out += "," + n;
  out += '\n';
  for (const auto& r : rows) {
    out += r.trace_id + ',' + r.video_id + ',' + std::string(to_string(r.platform)) + ',';
    if (r.label) out += std::to_string(*r.label);
    out += ',' + std::to_string(r.flow_rank) + ',' + std::to_string(r.features.bytes_dl);
    for (double v : r.features.values()) out += ',' + text::format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<FlowFeatureRow> read_flow_csv(std::string_view csv) {
  text::LineReader reader(csv);
  std::string_view line;
  std::size_t off = 0;
  if (!reader.next(line, off)) throw ParseError("missing flow CSV header", 0);
  std::string expected = "trace_id,video_id,platform,label,flow_rank,bytes_dl";
  for (const auto& n : flow_feature_names()) expected += "," + n;
  if (line != expected) throw ParseError("unexpected flow CSV header", off);
  std::vector<FlowFeatureRow> out;
  while (reader.next(line, off)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != 6 + kFlowFeatureCount) throw ParseError("wrong field count in flow CSV", off);
    try {
      FlowFeatureRow r;
      r.trace_id = std::string(f[0]);
      r.video_id = std::string(f[1]);
      r.platform = parse_platform(f[2]);
      if (!text::trim(f[3]).empty()) r.label = static_cast<int>(text::parse_int(f[3]));
      r.flow_rank = static_cast<int>(text::parse_int(f[4]));
      std::array<double, kFlowFeatureCount> v{};
      for (std::size_t i = 0; i < kFlowFeatureCount; ++i) v[i] = text::parse_double(f[6 + i]);
      r.features = FlowFeatureSet::from_values(v, text::parse_uint(f[5]), r.flow_rank);
      out.push_back(std::move(r));
    } catch (const InvalidArgumentError& e) {
      throw ParseError(std::string("flow CSV: ") + e.what(), off);
    }
  }
  return out;
}

LabeledDataset aggregate_flow_rows(std::span<const FlowFeatureRow> rows, TopFlows n) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const FlowFeatureRow*>> by_trace;
  for (const auto& r : rows) {
    auto& v = by_trace[r.trace_id];
    if (v.empty()) order.push_back(r.trace_id);
    v.push_back(&r);
  }
  LabeledDataset d;
  d.feature_names = aggregate_feature_names(n);
  for (const auto& id : order) {
    const auto& group = by_trace[id];
    std::vector<FlowFeatureSet> sets;
    for (const auto* r : group) sets.push_back(r->features);
    FeatureVector fv = aggregate_top_flows(sets, n);
    fv.trace_id = id;
    fv.video_id = group.front()->video_id;
    fv.platform = group.front()->platform;
    fv.label = group.front()->label;
    d.vectors.push_back(std::move(fv));
  }
  return d;
}

}  // namespace panoclass
