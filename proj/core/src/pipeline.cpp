#include "panoclass/pipeline.hpp"

#include "panoclass/errors.hpp"
#include "panoclass/text.hpp"
#include "panoclass/trace_ingest.hpp"

namespace panoclass {

TraceInput to_trace_input(const SynthTrace& t) {
  return TraceInput{t.spec.trace_id, t.spec.video_id, t.spec.params.platform, t.spec.params.label, t.packets};
}

std::vector<PacketRecord> video_stream(const TraceInput& t, bool all_flows) {
  if (all_flows) return t.packets;
  const auto flows = assemble_flows(t.packets);
  return flow_packets(filter_video_flows(flows, to_filter(t.platform)));
}

std::vector<BinFeatures> trace_bins(const TraceInput& t, const ExtractOptions& opts) {
  const auto packets = video_stream(t, opts.all_flows);
  return bin_packets(packets, opts.binning, t.packets.empty() ? 0 : t.packets.back().timestamp_us);
}

FeatureVector packet_features(const TraceInput& t, const ExtractOptions& opts) {
  const auto bins = trace_bins(t, opts);
  if (bins.empty())
    throw EmptyInputError("trace '" + t.trace_id + "' is shorter than one " +
                          std::to_string(opts.binning.window_s) + " s window");
  FeatureVector fv = summarize_bins(bins);
  fv.trace_id = t.trace_id;
  fv.video_id = t.video_id;
  fv.platform = t.platform;
  fv.label = t.label;
  return fv;
}

std::vector<FlowFeatureRow> flow_rows(const TraceInput& t, const ExtractOptions& opts) {
  auto flows = assemble_flows(t.packets);
  if (!opts.all_flows) flows = filter_video_flows(flows, to_filter(t.platform));
  std::vector<FlowFeatureRow> rows;
  int rank = 0;
  for (const auto& f : flows) {
    FlowFeatureRow r;
    r.trace_id = t.trace_id;
    r.video_id = t.video_id;
    r.platform = t.platform;
    r.label = t.label;
    r.flow_rank = rank++;
    r.features = compute_flow_features(f, opts.burst_gap_s);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string write_manifest(std::span<const ManifestEntry> entries, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "trace_id,video_id,platform,label,path,client_ip\n";
  for (const auto& e : entries) {
    out += e.trace_id + ',' + e.video_id + ',' + std::string(to_string(e.platform)) + ',';
    if (e.label) out += std::to_string(*e.label);
    out += ',' + e.path + ',' + e.client_ip + '\n';
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(std::string_view csv) {
  text::LineReader reader(csv);
  std::string_view line;
  std::size_t off = 0;
  if (!reader.next(line, off)) throw ParseError("missing manifest header", 0);
  const auto header = text::split(line);
  const bool has_client = header.size() == 6 && header[5] == "client_ip";
  if ((header.size() != 5 && !has_client) || header[0] != "trace_id" || header[1] != "video_id" ||
      header[2] != "platform" || header[3] != "label" || header[4] != "path")
    throw ParseError("manifest header must be trace_id,video_id,platform,label,path[,client_ip]", off);
  std::vector<ManifestEntry> out;
  while (reader.next(line, off)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != header.size())
      throw ParseError("manifest row has " + std::to_string(f.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       off);
    try {
      ManifestEntry e;
      e.trace_id = std::string(f[0]);
      e.video_id = std::string(f[1]);
      e.platform = parse_platform(f[2]);
      if (!f[3].empty()) {
        const auto l = text::parse_int(f[3]);
        if (l != kLabelNormal && l != kLabel360) throw InvalidArgumentError("label must be 0 or 1");
        e.label = static_cast<int>(l);
      }
      e.path = std::string(f[4]);
      if (has_client) e.client_ip = std::string(f[5]);
      if (e.trace_id.empty() || e.path.empty()) throw InvalidArgumentError("trace_id and path are required");
      out.push_back(std::move(e));
    } catch (const InvalidArgumentError& ex) {
      throw ParseError(std::string("manifest: ") + ex.what(), off);
    }
  }
  return out;
}

}  // namespace panoclass
