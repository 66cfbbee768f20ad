#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "panoclass/feature_vector.hpp"
#include "panoclass/flw_features.hpp"
#include "panoclass/gbt.hpp"
#include "panoclass/pkt_features.hpp"

namespace panoclass {

enum class SplitStrategy { video_disjoint, trace_level };

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::video_disjoint;
  double train_fraction = 0.7;
  int n_repeats = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string_view to_string(SplitStrategy s);
SplitStrategy parse_split_strategy(std::string_view s);

struct SampleInfo {
  std::string video_id;
  int label = 0;
};

// Indices into the sample list; disjoint, together exhaustive, sorted.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Deterministic per (seed, repeat_index). video_disjoint sends
// round(train_fraction * #videos) whole videos to train; trace_level sends
// round(train_fraction * #traces) of every video's traces to train. A draw
// whose train side misses a class is redrawn, up to 100 attempts, before
// DegenerateSplitError.
Split split(std::span<const SampleInfo> samples, const SplitSpec& spec, int repeat_index);
Split split(const LabeledDataset& data, const SplitSpec& spec, int repeat_index);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

// Class 1 (360) is the positive class; F1 is 0 when precision or recall is undefined.
Metrics metrics(std::span<const int> predictions, std::span<const int> labels);

enum class ModelKind { gbt, heuristic };
enum class TrafficType { yt, fb, both };

std::string_view to_string(ModelKind m);
std::string_view to_string(TrafficType t);
ModelKind parse_model_kind(std::string_view s);
TrafficType parse_traffic_type(std::string_view s);
std::optional<Platform> platform_of(TrafficType t);

struct EvalOptions {
  ModelKind model = ModelKind::gbt;
  GbtHyperparams hp;
  // Number of top-importance features the heuristic baseline uses.
  int heuristic_k = 5;
};

struct VideoTally {
  double accuracy_sum = 0.0;  // sum of per-repeat accuracies
  int repeats = 0;

  bool operator==(const VideoTally&) const = default;
};

struct EvalReport {
  std::string experiment;
  TrafficType traffic = TrafficType::both;
  std::string setting;  // e.g. "30" (interval seconds) or "4" (flows)
  ModelKind model = ModelKind::gbt;
  std::vector<double> accuracy;  // per repeat
  std::vector<double> f1;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  Confusion confusion;
  std::map<std::string, VideoTally> per_video;
};

// Repeated split / train / test over one dataset.
EvalReport evaluate_offline(const LabeledDataset& data, const SplitSpec& spec, const EvalOptions& opts);

// Mean accuracy of each video over the repeats in which it was tested.
std::map<std::string, double> per_video_accuracy(std::span<const EvalReport> reports);

// One report per (traffic type, interval). Traffic types: YT and FB when
// present, BOTH when both platforms are present.
std::vector<EvalReport> run_offline_pkt_sweep(const std::map<int, LabeledDataset>& by_interval,
                                              const SplitSpec& spec, const EvalOptions& opts);

std::vector<EvalReport> run_offline_flw_sweep(std::span<const FlowFeatureRow> rows,
                                              const SplitSpec& spec, std::span<const TopFlows> n_values,
                                              const EvalOptions& opts);

struct BinTrace {
  std::string trace_id;
  std::string video_id;
  Platform platform = Platform::yt;
  int label = 0;
  std::vector<BinFeatures> bins;
};

struct CurvePoint {
  int t_s = 0;
  double accuracy = 0.0;  // mean over repeats
  double f1 = 0.0;
  std::size_t traces_scored = 0;  // summed over repeats
};

struct RealtimeCurve {
  TrafficType traffic = TrafficType::both;
  std::vector<CurvePoint> points;
  // Mean per-bin accuracy of the bin-level model over repeats.
  double bin_accuracy = 0.0;
};

// Trains a bin-level GBT on every bin of the training traces (each bin takes
// its trace's label) and scores classify_stream decisions on the test traces.
RealtimeCurve run_realtime_curve(std::span<const BinTrace> traces, const SplitSpec& spec,
                                 const GbtHyperparams& hp, int stop_s = 120,
                                 TrafficType traffic = TrafficType::both);

// Table-shaped CSV: `<setting_column>,YT_acc,YT_f1,FB_acc,FB_f1,BOTH_acc,BOTH_f1`
// (columns only for traffic types present), values in percent.
std::string write_sweep_table_csv(std::span<const EvalReport> reports, std::string_view setting_column,
                                  std::span<const std::string> comments = {});
// Long format, one row per report with mean/std and confusion totals.
std::string write_report_csv(std::span<const EvalReport> reports, std::span<const std::string> comments = {});
std::string write_curve_csv(const RealtimeCurve& curve, std::span<const std::string> comments = {});
std::string write_per_video_csv(const std::map<std::string, double>& acc,
                                std::span<const std::string> comments = {});

// JSON document echoing `config` and summarizing every report.
std::string summary_json(std::string_view experiment,
                         std::span<const std::pair<std::string, std::string>> config,
                         std::span<const EvalReport> reports, const RealtimeCurve* curve = nullptr);

}  // namespace panoclass
