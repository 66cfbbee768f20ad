// panoclass command-line front end. Exit codes: 0 ok, 1 usage error,
// 2 data or model error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panoclass/errors.hpp"
#include "panoclass/eval.hpp"
#include "panoclass/gbt.hpp"
#include "panoclass/heuristic.hpp"
#include "panoclass/pipeline.hpp"
#include "panoclass/realtime.hpp"
#include "panoclass/synth.hpp"
#include "panoclass/text.hpp"
#include "panoclass/trace_ingest.hpp"
#include "panoclass/version.hpp"

namespace fs = std::filesystem;
using namespace panoclass;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { quiet, info, debug };
LogLevel g_log_level = LogLevel::info;

void log_info(const std::string& msg) {
  if (g_log_level != LogLevel::quiet) std::cerr << "panoclass: " << msg << '\n';
}
void log_debug(const std::string& msg) {
  if (g_log_level == LogLevel::debug) std::cerr << "panoclass: " << msg << '\n';
}

// Provenance lines written as '#' comments at the top of every output file.
std::vector<std::string> provenance(const CLI::App& sub) {
  std::vector<std::string> out{"panoclass " + std::string(version()), "command: " + sub.get_name()};
  std::istringstream cfg(sub.config_to_str(true, false));
  std::string line;
  while (std::getline(cfg, line))
    if (!line.empty() && line.front() != '[') out.push_back("config: " + line);
  return out;
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  text::write_file(path, contents);
  log_debug("wrote " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : text::split(s)) {
    const auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace input

struct CaptureOptions {
  std::string input;
  std::string manifest;
  std::string trace_id;
  std::string video_id;
  std::string platform = "yt";
  std::optional<int> label;
  std::string client_ip;
  std::string client_mac;

  void add(CLI::App* sub, bool with_manifest) {
    auto* in = sub->add_option("--input", input, "Packet CSV or pcap capture");
    if (with_manifest) {
      auto* man = sub->add_option("--manifest", manifest, "Trace manifest CSV (batch mode)");
      in->excludes(man);
    }
    sub->add_option("--trace-id", trace_id, "Trace id for --input (default: file stem)");
    sub->add_option("--video-id", video_id, "Video id for --input (default: trace id)");
    sub->add_option("--platform", platform, "Platform of --input")
        ->check(CLI::IsMember({"yt", "fb", "YT", "FB"}))
        ->capture_default_str();
    sub->add_option("--label", label, "Ground-truth label of --input (0 normal, 1 360)")->check(CLI::Range(0, 1));
    sub->add_option("--client-ip", client_ip, "Client IP used to assign directions in pcap input");
    sub->add_option("--client-mac", client_mac, "Client MAC used to assign directions in pcap input");
  }
};

std::vector<PacketRecord> load_packets(const std::string& path, const std::string& client_ip,
                                       const std::string& client_mac) {
  const std::string raw = text::read_file(path);
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  const CaptureFormat format = detect_format(bytes);
  ParseStats stats;
  auto packets = parse_capture(bytes, format, &stats);
  log_debug(path + ": " + std::to_string(stats.frames) + " frames, " + std::to_string(packets.size()) + " kept");
  ClientIdentity id;
  if (!client_ip.empty()) id.ip = client_ip;
  if (!client_mac.empty()) {
    id.mac = parse_mac(client_mac);
    if (!id.mac) throw UsageError("invalid --client-mac '" + client_mac + "'");
  }
  if (format == CaptureFormat::pcap_ethernet && !id.ip && !id.mac)
    throw UsageError(path + " is a pcap capture; directions need --client-ip or --client-mac");
  if (id.ip || id.mac) {
    packets = assign_direction(packets, id);
    rebase_timestamps(packets);
  }
  return packets;
}

std::vector<TraceInput> load_traces(const CaptureOptions& o) {
  std::vector<TraceInput> out;
  if (!o.manifest.empty()) {
    const auto entries = read_manifest(text::read_file(o.manifest));
    const fs::path base = fs::path(o.manifest).parent_path();
    for (const auto& e : entries) {
      const fs::path p = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
      TraceInput t{e.trace_id, e.video_id, e.platform, e.label,
                   load_packets(p.string(), e.client_ip.empty() ? o.client_ip : e.client_ip, o.client_mac)};
      out.push_back(std::move(t));
    }
    log_info("loaded " + std::to_string(out.size()) + " traces from " + o.manifest);
    return out;
  }
  if (o.input.empty()) throw UsageError("one of --input or --manifest is required");
  TraceInput t;
  t.trace_id = o.trace_id.empty() ? fs::path(o.input).stem().string() : o.trace_id;
  t.video_id = o.video_id.empty() ? t.trace_id : o.video_id;
  t.platform = parse_platform(o.platform);
  t.label = o.label;
  t.packets = load_packets(o.input, o.client_ip, o.client_mac);
  out.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Shared model options

struct ModelOptions {
  GbtHyperparams hp;
  std::string model = "gbt";
  int heuristic_k = 5;

  void add(CLI::App* sub) {
    sub->add_option("--model-kind", model, "Classifier: gbt or heuristic")
        ->check(CLI::IsMember({"gbt", "heuristic"}))
        ->capture_default_str();
    sub->add_option("--heuristic-k", heuristic_k, "Top-importance features used by the heuristic")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--trees", hp.n_trees, "Number of boosting rounds")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--depth", hp.max_depth, "Maximum tree depth")->check(CLI::Range(1, 30))->capture_default_str();
    sub->add_option("--learning-rate", hp.learning_rate, "Shrinkage")
        ->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();
    sub->add_option("--min-child-weight", hp.min_child_weight, "Minimum hessian sum per child")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--lambda", hp.l2_reg, "L2 regularization on leaf weights")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }
};

struct FeatureInput {
  std::string features;
  std::string flows;
  std::string top_n = "4";

  void add(CLI::App* sub) {
    auto* f = sub->add_option("--features", features, "Packet-level feature CSV");
    auto* w = sub->add_option("--flows", flows, "Flow-feature CSV");
    f->excludes(w);
    sub->add_option("--top-n", top_n, "Flows aggregated per trace with --flows (number or ALL)")->capture_default_str();
  }

  bool given() const { return !features.empty() || !flows.empty(); }

  LabeledDataset load() const {
    if (!features.empty()) return read_feature_csv(text::read_file(features));
    if (!flows.empty()) {
      const auto rows = read_flow_csv(text::read_file(flows));
      return aggregate_flow_rows(rows, parse_top_flows(top_n));
    }
    throw UsageError("one of --features or --flows is required");
  }
};

std::map<std::string, int> labels_by_trace(const std::string& manifest) {
  std::map<std::string, int> out;
  for (const auto& e : read_manifest(text::read_file(manifest)))
    if (e.label) out[e.trace_id] = *e.label;
  return out;
}

std::vector<BinTrace> load_bin_traces(const std::string& bins_path, const std::string& manifest) {
  const auto traces = read_bin_csv(text::read_file(bins_path));
  std::map<std::string, ManifestEntry> meta;
  for (auto& e : read_manifest(text::read_file(manifest))) meta[e.trace_id] = e;
  std::vector<BinTrace> out;
  for (const auto& t : traces) {
    const auto it = meta.find(t.trace_id);
    if (it == meta.end() || !it->second.label)
      throw InvalidArgumentError("trace '" + t.trace_id + "' has no label in " + manifest);
    out.push_back({t.trace_id, it->second.video_id, it->second.platform, *it->second.label, t.bins});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthCmd {
  std::string platform = "yt";
  double separability = 0.5;
  int duration = 120;
  double base_rate = 100'000.0;
  int side_flows = 3;
  std::uint64_t seed = 1;
  std::optional<int> label;
  std::optional<int> n_per_class;
  int traces_per_video = 1;
  std::string out;
  std::string out_dir;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("synth", "Generate synthetic 360/normal video traces");
    sub->add_option("--platform", platform, "yt, fb or both (both only with --n-per-class)")
        ->check(CLI::IsMember({"yt", "fb", "both"}))
        ->capture_default_str();
    sub->add_option("--separability", separability, "Class separation in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--duration", duration, "Trace length in seconds")->check(CLI::Range(30, 86400))->capture_default_str();
    sub->add_option("--base-rate", base_rate, "Normal-video downlink rate in bytes/s")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--side-flows", side_flows, "Non-dominant flows per trace")
        ->check(CLI::Range(0, 64))
        ->capture_default_str();
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--label", label, "Single trace: 0 normal, 1 360")->check(CLI::Range(0, 1));
    sub->add_option("--n-per-class", n_per_class, "Dataset mode: traces per label")->check(CLI::Range(1, 100000));
    sub->add_option("--traces-per-video", traces_per_video, "Dataset mode: traces sharing one video id")
        ->check(CLI::Range(1, 1000))
        ->capture_default_str();
    sub->add_option("--out", out, "Single trace: packet CSV path");
    sub->add_option("--out-dir", out_dir, "Dataset mode: directory for traces/ and manifest.csv");
    sub->callback([this, sub] { run(*sub); });
  }

  SynthParams params(Platform p) const {
    SynthParams sp;
    sp.platform = p;
    sp.separability = separability;
    sp.duration_s = duration;
    sp.base_rate_Bps = base_rate;
    sp.n_side_flows = side_flows;
    sp.seed = seed;
    return sp;
  }

  void run(const CLI::App& sub) const {
    const auto prov = provenance(sub);
    if (!n_per_class) {
      if (!label || out.empty()) throw UsageError("single-trace synth needs --label and --out (or use --n-per-class)");
      if (platform == "both") throw UsageError("--platform both needs --n-per-class");
      SynthParams sp = params(parse_platform(platform));
      sp.label = *label;
      write_output(out, write_packet_csv(generate_trace(sp), prov));
      return;
    }
    if (out_dir.empty()) throw UsageError("--n-per-class needs --out-dir");
    std::vector<Platform> platforms;
    if (platform != "fb") platforms.push_back(Platform::yt);
    if (platform != "yt") platforms.push_back(Platform::fb);
    std::vector<ManifestEntry> manifest;
    for (Platform p : platforms) {
      for (const auto& spec : plan_dataset(*n_per_class, params(p), seed, traces_per_video)) {
        const std::string rel = "traces/" + spec.trace_id + ".csv";
        write_output((fs::path(out_dir) / rel).string(), write_packet_csv(generate_trace(spec.params), prov));
        manifest.push_back({spec.trace_id, spec.video_id, p, spec.params.label, rel, ""});
      }
    }
    write_output((fs::path(out_dir) / "manifest.csv").string(), write_manifest(manifest, prov));
    log_info("wrote " + std::to_string(manifest.size()) + " traces to " + out_dir);
  }
};

struct ExtractPktCmd {
  CaptureOptions cap;
  ExtractOptions opts;
  std::string out;
  std::string bins_out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("extract-pkt", "Packet-level bins and summary feature vectors");
    cap.add(sub, true);
    sub->add_option("--interval", opts.binning.interval_s, "Seconds of each trace to summarize")
        ->check(CLI::Range(1, 86400))
        ->capture_default_str();
    sub->add_option("--window", opts.binning.window_s, "Bin length in seconds")->check(CLI::Range(1, 3600))->capture_default_str();
    sub->add_option("--step", opts.binning.step_s, "Bin step in seconds")->check(CLI::Range(1, 3600))->capture_default_str();
    sub->add_flag("--all-flows", opts.all_flows, "Use every flow instead of the platform video flows");
    sub->add_option("--out", out, "Feature CSV (default stdout)");
    sub->add_option("--bins-out", bins_out, "Also write the per-bin CSV");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    if (opts.binning.interval_s < opts.binning.window_s) throw UsageError("--interval must be at least --window");
    const auto traces = load_traces(cap);
    std::vector<FeatureVector> vectors;
    std::vector<TraceBins> bins;
    for (const auto& t : traces) {
      auto b = trace_bins(t, opts);
      if (b.empty()) throw EmptyInputError("trace '" + t.trace_id + "' is shorter than one window");
      FeatureVector fv = summarize_bins(b);
      fv.trace_id = t.trace_id;
      fv.video_id = t.video_id;
      fv.platform = t.platform;
      fv.label = t.label;
      vectors.push_back(std::move(fv));
      if (!bins_out.empty()) bins.push_back({t.trace_id, std::move(b)});
    }
    const auto prov = provenance(sub);
    write_output(out, write_feature_csv(make_dataset(std::move(vectors)), prov));
    if (!bins_out.empty()) write_output(bins_out, write_bin_csv(bins, prov));
  }
};

struct ExtractFlwCmd {
  CaptureOptions cap;
  ExtractOptions opts;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("extract-flw", "Per-flow features (one row per flow)");
    cap.add(sub, true);
    sub->add_option("--burst-gap", opts.burst_gap_s, "Maximum gap inside a burst, seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--all-flows", opts.all_flows, "Keep flows without a platform SNI match");
    sub->add_option("--out", out, "Flow-feature CSV (default stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    std::vector<FlowFeatureRow> rows;
    for (const auto& t : load_traces(cap)) {
      auto r = flow_rows(t, opts);
      if (r.empty()) log_info("trace '" + t.trace_id + "' has no matching flows");
      rows.insert(rows.end(), r.begin(), r.end());
    }
    write_output(out, write_flow_csv(rows, provenance(sub)));
  }
};

struct TrainCmd {
  FeatureInput input;
  ModelOptions model;
  std::string bins;
  std::string manifest;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "Train a GBT or threshold model");
    input.add(sub);
    model.add(sub);
    sub->add_option("--bins", bins, "Per-bin CSV: train a bin-level model for stream (labels from --manifest)");
    sub->add_option("--manifest", manifest, "Manifest supplying labels for --bins");
    sub->add_option("--seed", seed, "Recorded in the model; training is deterministic")->capture_default_str();
    sub->add_option("--out", out, "Model JSON path (default stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App&) {
    model.hp.seed = seed;
    if (!bins.empty()) {
      if (input.given()) throw UsageError("--bins cannot be combined with --features/--flows");
      if (manifest.empty()) throw UsageError("--bins needs --manifest for labels");
      if (model.model != "gbt") throw UsageError("bin-level models must be gbt");
      const auto labels = labels_by_trace(manifest);
      TrainingSet ts;
      ts.feature_names.assign(bin_feature_names().begin(), bin_feature_names().end());
      for (const auto& t : read_bin_csv(text::read_file(bins))) {
        const auto it = labels.find(t.trace_id);
        if (it == labels.end()) throw InvalidArgumentError("trace '" + t.trace_id + "' has no label in " + manifest);
        for (const auto& b : t.bins) {
          const auto v = b.values();
          ts.values.insert(ts.values.end(), v.begin(), v.end());
          ts.labels.push_back(it->second);
        }
      }
      GbtModel m = train(ts, model.hp);
      m.metadata.emplace_back("level", "bin");
      write_output(out, save_model(m));
      return;
    }
    const LabeledDataset data = input.load();
    GbtModel m = train(data, model.hp);
    m.metadata.emplace_back("level", input.flows.empty() ? "trace_pkt" : "trace_flw");
    if (!input.flows.empty()) m.metadata.emplace_back("top_n", input.top_n);
    if (model.model == "gbt") {
      write_output(out, save_model(m));
      return;
    }
    std::vector<std::string> features;
    for (const auto& [name, gain] : feature_importance(m, static_cast<std::size_t>(model.heuristic_k)))
      features.push_back(name);
    if (features.empty()) features.push_back(data.feature_names.front());
    write_output(out, save_threshold_model(fit_thresholds(data, features)));
  }
};

// A trained model of either kind.
struct AnyModel {
  std::optional<GbtModel> gbt;
  std::optional<ThresholdModel> thresholds;
};

AnyModel load_any_model(const std::string& path) {
  const std::string text = text::read_file(path);
  AnyModel m;
  try {
    m.gbt = load_model(text);
  } catch (const DeserializationError& gbt_error) {
    try {
      m.thresholds = load_threshold_model(text);
    } catch (const DeserializationError&) {
      throw gbt_error;
    }
  }
  return m;
}

struct PredictCmd {
  FeatureInput input;
  std::string model_path;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "Score feature vectors with a trained model");
    input.add(sub);
    sub->add_option("--model", model_path, "Model JSON")->required();
    sub->add_option("--out", out, "Prediction CSV (default stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    const AnyModel m = load_any_model(model_path);
    const LabeledDataset data = input.load();
    std::string csv;
    for (const auto& c : provenance(sub)) csv += "# " + c + "\n";
    csv += "trace_id,video_id,platform,label,score,prediction\n";
    for (const auto& v : data.vectors) {
      double score = 0.0;
      int pred = 0;
      if (m.gbt) {
        score = predict_proba(*m.gbt, v);
        pred = score >= 0.5 ? 1 : 0;
      } else {
        pred = heuristic_predict(*m.thresholds, v);
        int votes = 0;
        for (const auto& e : m.thresholds->entries) {
          const auto it = std::find(v.names.begin(), v.names.end(), e.feature);
          votes += e.vote(v.values[static_cast<std::size_t>(it - v.names.begin())]);
        }
        score = static_cast<double>(votes) / static_cast<double>(m.thresholds->entries.size());
      }
      csv += v.trace_id + ',' + v.video_id + ',' + std::string(to_string(v.platform)) + ',' +
             (v.label ? std::to_string(*v.label) : std::string()) + ',' + text::format_double(score) + ',' +
             std::to_string(pred) + '\n';
    }
    write_output(out, csv);
  }
};

struct StreamCmd {
  CaptureOptions cap;
  std::string model_path;
  std::string platform_filter = "any";
  bool all_flows = false;
  int stop = 120;
  int window = 5;
  bool jsonl = false;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("stream", "Replay a capture through the near-real-time classifier");
    cap.add(sub, false);
    sub->add_option("--model", model_path, "Bin-level GBT model JSON")->required();
    sub->add_option("--filter", platform_filter, "SNI keyword filter: yt, fb or any")
        ->check(CLI::IsMember({"yt", "fb", "any"}))
        ->capture_default_str();
    sub->add_flag("--all-flows", all_flows, "Disable the SNI keyword filter");
    sub->add_option("--stop", stop, "Stream time at which replay stops, seconds")
        ->check(CLI::Range(10, 86400))
        ->capture_default_str();
    sub->add_option("--window", window, "Bin length in seconds")->check(CLI::Range(1, 3600))->capture_default_str();
    sub->add_flag("--jsonl", jsonl, "Print JSON lines instead of CSV lines");
    sub->add_option("--out", out, "Write decisions to a file instead of stdout");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    if (cap.input.empty()) throw UsageError("--input is required");
    const GbtModel model = load_model(text::read_file(model_path));
    const auto traces = load_traces(cap);
    std::vector<PacketRecord> packets = traces.front().packets;
    const std::int64_t duration_us = packets.empty() ? 0 : packets.back().timestamp_us;
    if (!all_flows) {
      const PlatformFilter f = platform_filter == "yt"   ? PlatformFilter::yt
                               : platform_filter == "fb" ? PlatformFilter::fb
                                                         : PlatformFilter::any;
      packets = flow_packets(filter_video_flows(assemble_flows(packets), f));
    }
    BinningConfig cfg;
    cfg.window_s = window;
    cfg.interval_s = std::max(stop, window);
    const auto bins = bin_packets(packets, cfg, duration_us);
    std::string text;
    if (!out.empty())
      for (const auto& c : provenance(sub)) text += "# " + c + "\n";
    for (const auto& d : classify_stream(model, bins, stop, window)) {
      if (jsonl)
        text += "{\"t_s\":" + std::to_string(d.t_s) + ",\"label\":" + std::to_string(d.label) +
                ",\"votes_for_1\":" + std::to_string(d.votes_for_1) + ",\"votes_total\":" + std::to_string(d.votes_total) +
                "}\n";
      else
        text += std::to_string(d.t_s) + ',' + std::to_string(d.label) + ',' + std::to_string(d.votes_for_1) + ',' +
                std::to_string(d.votes_total) + '\n';
    }
    write_output(out, text);
  }
};

struct EvaluateCmd {
  std::string experiment = "offline";
  FeatureInput input;
  ModelOptions model;
  std::string manifest;
  std::string bins;
  std::string intervals = "20,30,60,90,120";
  std::string top_n_values = "1,2,4,6,8,ALL";
  bool all_flows = false;
  int stop = 120;
  std::string traffic;
  std::string split_strategy = "video_disjoint";
  double train_fraction = 0.7;
  int repeats = 20;
  std::uint64_t seed = 0;
  std::string out;
  std::string table;
  std::string summary;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("evaluate", "Repeated train/test experiments");
    sub->add_option("--experiment", experiment, "offline, pkt-sweep, flw-sweep, realtime or per-video")
        ->check(CLI::IsMember({"offline", "pkt-sweep", "flw-sweep", "realtime", "per-video"}))
        ->capture_default_str();
    input.add(sub);
    model.add(sub);
    sub->add_option("--manifest", manifest, "Trace manifest (pkt-sweep traces, realtime labels)");
    sub->add_option("--bins", bins, "Per-bin CSV for the realtime experiment");
    sub->add_option("--intervals", intervals, "pkt-sweep intervals, comma separated")->capture_default_str();
    sub->add_option("--top-n-values", top_n_values, "flw-sweep flow counts, comma separated")->capture_default_str();
    sub->add_flag("--all-flows", all_flows, "pkt-sweep: use every flow instead of the platform video flows");
    sub->add_option("--stop", stop, "realtime: last decision time, seconds")->check(CLI::Range(10, 86400))->capture_default_str();
    sub->add_option("--traffic", traffic, "realtime: YT, FB or BOTH (default: all traces)")
        ->check(CLI::IsMember({"YT", "FB", "BOTH", "yt", "fb", "both"}));
    sub->add_option("--split", split_strategy, "video_disjoint or trace_level")
        ->check(CLI::IsMember({"video_disjoint", "trace_level"}))
        ->capture_default_str();
    sub->add_option("--train-fraction", train_fraction, "Share of videos (or traces) used for training")
        ->check(CLI::Range(0.01, 0.99))
        ->capture_default_str();
    sub->add_option("--repeats", repeats, "Number of random splits")->check(CLI::Range(1, 100000))->capture_default_str();
    sub->add_option("--seed", seed, "Split seed")->capture_default_str();
    sub->add_option("--out", out, "Report CSV (curve CSV for realtime, per-video CSV for per-video)");
    sub->add_option("--table", table, "Sweep table CSV in percent (pkt-sweep, flw-sweep)");
    sub->add_option("--summary", summary, "JSON summary with the full configuration");
    sub->callback([this, sub] { run(*sub); });
  }

  SplitSpec split_spec() const {
    SplitSpec s;
    s.strategy = parse_split_strategy(split_strategy);
    s.train_fraction = train_fraction;
    s.n_repeats = repeats;
    s.seed = seed;
    return s;
  }

  EvalOptions eval_options() const {
    EvalOptions o;
    o.model = parse_model_kind(model.model);
    o.hp = model.hp;
    o.heuristic_k = model.heuristic_k;
    return o;
  }

  std::vector<EvalReport> offline_reports(const LabeledDataset& data, const std::string& setting) const {
    bool yt = false, fb = false;
    for (const auto& v : data.vectors) (v.platform == Platform::yt ? yt : fb) = true;
    std::vector<TrafficType> types;
    if (yt) types.push_back(TrafficType::yt);
    if (fb) types.push_back(TrafficType::fb);
    if (yt && fb) types.push_back(TrafficType::both);
    std::vector<EvalReport> reports;
    for (TrafficType t : types) {
      EvalReport r = evaluate_offline(filter_platform(data, platform_of(t)), split_spec(), eval_options());
      r.experiment = experiment;
      r.traffic = t;
      r.setting = setting;
      reports.push_back(std::move(r));
    }
    return reports;
  }

  void print_reports(const std::vector<EvalReport>& reports) const {
    for (const auto& r : reports) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-9s %-4s %-6s %-9s acc %.4f (sd %.4f)  f1 %.4f (sd %.4f)\n",
                    r.experiment.c_str(), std::string(to_string(r.traffic)).c_str(), r.setting.c_str(),
                    std::string(to_string(r.model)).c_str(), r.accuracy_mean, r.accuracy_std, r.f1_mean, r.f1_std);
      std::cout << buf;
    }
  }

  void run(const CLI::App& sub) const {
    const auto prov = provenance(sub);
    std::vector<std::pair<std::string, std::string>> config;
    for (const auto& line : prov) config.emplace_back("line", line);

    if (experiment == "realtime") {
      if (bins.empty() || manifest.empty()) throw UsageError("realtime needs --bins and --manifest");
      if (model.model != "gbt") throw UsageError("realtime uses the gbt bin-level model");
      const auto traces = load_bin_traces(bins, manifest);
      bool yt = false, fb = false;
      for (const auto& bt : traces) (bt.platform == Platform::yt ? yt : fb) = true;
      const TrafficType t = !traffic.empty() ? parse_traffic_type(traffic)
                            : yt && fb       ? TrafficType::both
                            : yt             ? TrafficType::yt
                                             : TrafficType::fb;
      const RealtimeCurve curve = run_realtime_curve(traces, split_spec(), model.hp, stop, t);
      if (!out.empty()) write_output(out, write_curve_csv(curve, prov));
      else std::cout << write_curve_csv(curve);
      if (!summary.empty()) write_output(summary, summary_json(experiment, config, {}, &curve));
      return;
    }

    std::vector<EvalReport> reports;
    std::string setting_column = "setting";
    if (experiment == "pkt-sweep") {
      if (manifest.empty()) throw UsageError("pkt-sweep needs --manifest");
      CaptureOptions cap;
      cap.manifest = manifest;
      const auto traces = load_traces(cap);
      std::map<int, LabeledDataset> by_interval;
      for (const auto& s : split_list(intervals)) {
        const int interval = static_cast<int>(text::parse_int(s));
        if (interval < 5) throw UsageError("intervals must be at least 5 s");
        ExtractOptions opts;
        opts.binning.interval_s = interval;
        opts.all_flows = all_flows;
        std::vector<FeatureVector> vectors;
        for (const auto& t : traces) vectors.push_back(packet_features(t, opts));
        by_interval[interval] = make_dataset(std::move(vectors));
      }
      reports = run_offline_pkt_sweep(by_interval, split_spec(), eval_options());
      setting_column = "interval_s";
    } else if (experiment == "flw-sweep") {
      if (input.flows.empty()) throw UsageError("flw-sweep needs --flows");
      const auto rows = read_flow_csv(text::read_file(input.flows));
      std::vector<TopFlows> ns;
      for (const auto& s : split_list(top_n_values)) ns.push_back(parse_top_flows(s));
      reports = run_offline_flw_sweep(rows, split_spec(), ns, eval_options());
      setting_column = "n_flows";
    } else {
      const LabeledDataset data = input.load();
      reports = offline_reports(data, input.flows.empty() ? "" : input.top_n);
      if (experiment == "per-video") {
        const auto acc = per_video_accuracy(reports);
        if (!out.empty()) write_output(out, write_per_video_csv(acc, prov));
        else std::cout << write_per_video_csv(acc);
        if (!summary.empty()) write_output(summary, summary_json(experiment, config, reports));
        return;
      }
    }
    for (auto& r : reports) r.experiment = experiment;
    print_reports(reports);
    if (!out.empty()) write_output(out, write_report_csv(reports, prov));
    if (!table.empty()) write_output(table, write_sweep_table_csv(reports, setting_column, prov));
    if (!summary.empty()) write_output(summary, summary_json(experiment, config, reports));
  }
};

struct ImportanceCmd {
  std::string model_path;
  int top = 10;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("importance", "List the highest-gain features of a GBT model");
    sub->add_option("--model", model_path, "GBT model JSON")->required();
    sub->add_option("--top", top, "Number of features")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", out, "CSV path (default stdout)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    const GbtModel m = load_model(text::read_file(model_path));
    std::string csv;
    if (!out.empty())
      for (const auto& c : provenance(sub)) csv += "# " + c + "\n";
    csv += "feature,gain\n";
    for (const auto& [name, gain] : feature_importance(m, static_cast<std::size_t>(top)))
      csv += name + ',' + text::format_double(gain) + '\n';
    write_output(out, csv);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classify 360-degree vs normal video sessions from encrypted traffic features", "panoclass"};
  app.set_version_flag("--version", std::string(version()));
  app.set_config("--config", "", "Key-value config file; flags override it");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "quiet, info or debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}))
      ->capture_default_str();

  SynthCmd synth;
  ExtractPktCmd extract_pkt;
  ExtractFlwCmd extract_flw;
  TrainCmd train_cmd;
  PredictCmd predict;
  StreamCmd stream;
  EvaluateCmd evaluate;
  ImportanceCmd importance;
  synth.add(app);
  extract_pkt.add(app);
  extract_flw.add(app);
  train_cmd.add(app);
  predict.add(app);
  stream.add(app);
  evaluate.add(app);
  importance.add(app);
  app.parse_complete_callback([&] {
    g_log_level = log_level == "quiet" ? LogLevel::quiet : log_level == "debug" ? LogLevel::debug : LogLevel::info;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "panoclass: usage error: " << e.what() << '\n';
    return 1;
  } catch (const SchemaMismatchError& e) {
    std::cerr << "panoclass: schema mismatch: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "panoclass: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "panoclass: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
