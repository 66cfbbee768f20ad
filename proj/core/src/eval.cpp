#include "panoclass/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "panoclass/errors.hpp"
#include "panoclass/heuristic.hpp"
#include "panoclass/realtime.hpp"
#include "panoclass/rng.hpp"
#include "panoclass/text.hpp"

namespace panoclass {
namespace {

constexpr int kMaxSplitAttempts = 100;

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

bool has_both_classes(std::span<const SampleInfo> samples, std::span<const std::size_t> idx) {
  bool seen[2] = {false, false};
  for (auto i : idx) seen[samples[i].label == 1] = true;
  return seen[0] && seen[1];
}

std::vector<SampleInfo> sample_info(const LabeledDataset& data) {
  std::vector<SampleInfo> out;
  out.reserve(data.size());
  for (const auto& v : data.vectors) out.push_back({v.video_id, v.label.value_or(0)});
  return out;
}

std::vector<TrafficType> traffic_types(bool any_yt, bool any_fb) {
  std::vector<TrafficType> out;
  if (any_yt) out.push_back(TrafficType::yt);
  if (any_fb) out.push_back(TrafficType::fb);
  if (any_yt && any_fb) out.push_back(TrafficType::both);
  return out;
}

std::vector<TrafficType> traffic_types(const LabeledDataset& data) {
  bool yt = false, fb = false;
  for (const auto& v : data.vectors) (v.platform == Platform::yt ? yt : fb) = true;
  return traffic_types(yt, fb);
}

std::vector<int> predict_all(const GbtModel& model, const LabeledDataset& test) {
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto& v : test.vectors) out.push_back(predict_label(model, v));
  return out;
}

std::vector<int> predict_heuristic(const GbtModel& ranker, const LabeledDataset& train, const LabeledDataset& test,
                                   int k) {
  std::vector<std::string> features;
  for (const auto& [name, gain] : feature_importance(ranker, static_cast<std::size_t>(k))) features.push_back(name);
  // A model without any split carries no ranking; fall back to schema order.
  for (std::size_t i = 0; features.empty() && i < train.feature_names.size() && i < static_cast<std::size_t>(k); ++i)
    features.push_back(train.feature_names[i]);
  const auto model = fit_thresholds(train, features);
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto& v : test.vectors) out.push_back(heuristic_predict(model, v));
  return out;
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgumentError("train_fraction must be in (0, 1)");
  if (n_repeats < 1) throw InvalidArgumentError("n_repeats must be at least 1");
}

std::string_view to_string(SplitStrategy s) {
  return s == SplitStrategy::video_disjoint ? "video_disjoint" : "trace_level";
}

SplitStrategy parse_split_strategy(std::string_view s) {
  if (s == "video_disjoint") return SplitStrategy::video_disjoint;
  if (s == "trace_level") return SplitStrategy::trace_level;
  throw InvalidArgumentError("unknown split strategy '" + std::string(s) + "'");
}

Split split(std::span<const SampleInfo> samples, const SplitSpec& spec, int repeat_index) {
  spec.validate();
  if (samples.size() < 2) throw DegenerateSplitError("need at least two samples to split");
  // Videos in sorted order so the draw does not depend on input order.
  std::map<std::string, std::vector<std::size_t>> by_video;
  for (std::size_t i = 0; i < samples.size(); ++i) by_video[samples[i].video_id].push_back(i);

  for (int attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(repeat_index), static_cast<std::uint64_t>(attempt)));
    std::vector<char> in_train(samples.size(), 0);
    if (spec.strategy == SplitStrategy::video_disjoint) {
      std::vector<const std::vector<std::size_t>*> videos;
      for (const auto& [id, idx] : by_video) videos.push_back(&idx);
      rng.shuffle(std::span(videos));
      auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(videos.size())));
      if (videos.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, videos.size() - 1);
      for (std::size_t v = 0; v < n_train; ++v)
        for (auto i : *videos[v]) in_train[i] = 1;
    } else {
      for (const auto& [id, idx] : by_video) {
        std::vector<std::size_t> order = idx;
        rng.shuffle(std::span(order));
        const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(order.size())));
        for (std::size_t j = 0; j < n_train; ++j) in_train[order[j]] = 1;
      }
    }
    Split s;
    for (std::size_t i = 0; i < samples.size(); ++i) (in_train[i] ? s.train : s.test).push_back(i);
    if (!s.test.empty() && has_both_classes(samples, s.train)) return s;
  }
  throw DegenerateSplitError("no split with both classes in train after " + std::to_string(kMaxSplitAttempts) +
                             " attempts");
}

Split split(const LabeledDataset& data, const SplitSpec& spec, int repeat_index) {
  const auto info = sample_info(data);
  return split(info, spec, repeat_index);
}

Metrics metrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgumentError("predictions and labels differ in length");
  if (predictions.empty()) throw EmptyInputError("no predictions to score");
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == 1;
    const bool y = labels[i] == 1;
    if (p && y) ++m.confusion.tp;
    else if (p) ++m.confusion.fp;
    else if (y) ++m.confusion.fn;
    else ++m.confusion.tn;
  }
  const auto& c = m.confusion;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(labels.size());
  const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
  // 2TP / (2TP + FP + FN); undefined precision or recall gives TP = 0.
  m.f1 = c.tp == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
  return m;
}

std::string_view to_string(ModelKind m) { return m == ModelKind::gbt ? "gbt" : "heuristic"; }

std::string_view to_string(TrafficType t) {
  switch (t) {
    case TrafficType::yt: return "YT";
    case TrafficType::fb: return "FB";
    case TrafficType::both: return "BOTH";
  }
  return "BOTH";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "gbt") return ModelKind::gbt;
  if (s == "heuristic") return ModelKind::heuristic;
  throw InvalidArgumentError("unknown model kind '" + std::string(s) + "' (expected gbt or heuristic)");
}

TrafficType parse_traffic_type(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "yt") return TrafficType::yt;
  if (l == "fb") return TrafficType::fb;
  if (l == "both") return TrafficType::both;
  throw InvalidArgumentError("unknown traffic type '" + std::string(s) + "' (expected YT, FB or BOTH)");
}

std::optional<Platform> platform_of(TrafficType t) {
  if (t == TrafficType::yt) return Platform::yt;
  if (t == TrafficType::fb) return Platform::fb;
  return std::nullopt;
}

EvalReport evaluate_offline(const LabeledDataset& data, const SplitSpec& spec, const EvalOptions& opts) {
  data.validate();
  opts.hp.validate();
  if (opts.heuristic_k < 1) throw InvalidArgumentError("heuristic_k must be at least 1");
  const auto info = sample_info(data);
  EvalReport rep;
  rep.model = opts.model;
  for (int r = 0; r < spec.n_repeats; ++r) {
    const Split s = split(info, spec, r);
    const auto train_set = subset(data, s.train);
    const auto test_set = subset(data, s.test);
    const GbtModel gbt = train(train_set, opts.hp);
    const auto pred = opts.model == ModelKind::gbt ? predict_all(gbt, test_set)
                                                   : predict_heuristic(gbt, train_set, test_set, opts.heuristic_k);
    std::vector<int> labels;
    labels.reserve(test_set.size());
    for (const auto& v : test_set.vectors) labels.push_back(*v.label);
    const Metrics m = metrics(pred, labels);
    rep.accuracy.push_back(m.accuracy);
    rep.f1.push_back(m.f1);
    rep.confusion += m.confusion;

    std::map<std::string, std::pair<int, int>> per_video;  // correct, total
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto& [correct, total] = per_video[test_set.vectors[i].video_id];
      correct += pred[i] == labels[i];
      ++total;
    }
    for (const auto& [video, ct] : per_video) {
      auto& tally = rep.per_video[video];
      tally.accuracy_sum += static_cast<double>(ct.first) / ct.second;
      ++tally.repeats;
    }
  }
  std::tie(rep.accuracy_mean, rep.accuracy_std) = mean_std(rep.accuracy);
  std::tie(rep.f1_mean, rep.f1_std) = mean_std(rep.f1);
  return rep;
}

std::map<std::string, double> per_video_accuracy(std::span<const EvalReport> reports) {
  std::map<std::string, VideoTally> merged;
  for (const auto& r : reports)
    for (const auto& [video, t] : r.per_video) {
      merged[video].accuracy_sum += t.accuracy_sum;
      merged[video].repeats += t.repeats;
    }
  std::map<std::string, double> out;
  for (const auto& [video, t] : merged)
    if (t.repeats > 0) out[video] = t.accuracy_sum / t.repeats;
  return out;
}

std::vector<EvalReport> run_offline_pkt_sweep(const std::map<int, LabeledDataset>& by_interval,
                                              const SplitSpec& spec, const EvalOptions& opts) {
  std::vector<EvalReport> out;
  for (const auto& [interval, data] : by_interval) {
    for (TrafficType t : traffic_types(data)) {
      EvalReport rep = evaluate_offline(filter_platform(data, platform_of(t)), spec, opts);
      rep.experiment = "pkt-sweep";
      rep.traffic = t;
      rep.setting = std::to_string(interval);
      out.push_back(std::move(rep));
    }
  }
  return out;
}

std::vector<EvalReport> run_offline_flw_sweep(std::span<const FlowFeatureRow> rows, const SplitSpec& spec,
                                              std::span<const TopFlows> n_values, const EvalOptions& opts) {
  std::vector<EvalReport> out;
  for (const TopFlows& n : n_values) {
    const LabeledDataset data = aggregate_flow_rows(rows, n);
    const std::size_t expected = n && *n == 1 ? kFlowFeatureCount : 4 * kFlowFeatureCount;
    if (data.feature_names.size() != expected)
      throw std::logic_error("flow aggregation produced " + std::to_string(data.feature_names.size()) +
                             " features, expected " + std::to_string(expected));
    for (TrafficType t : traffic_types(data)) {
      EvalReport rep = evaluate_offline(filter_platform(data, platform_of(t)), spec, opts);
      rep.experiment = "flw-sweep";
      rep.traffic = t;
      rep.setting = top_flows_label(n);
      out.push_back(std::move(rep));
    }
  }
  return out;
}

RealtimeCurve run_realtime_curve(std::span<const BinTrace> traces, const SplitSpec& spec, const GbtHyperparams& hp,
                                 int stop_s, TrafficType traffic) {
  if (stop_s < 2 * kDecisionPeriodS) throw InvalidArgumentError("stop_s must be at least 10");
  const auto want = platform_of(traffic);
  std::vector<const BinTrace*> selected;
  for (const auto& t : traces)
    if (!want || t.platform == *want) selected.push_back(&t);
  if (selected.empty()) throw EmptyInputError("no traces for traffic type " + std::string(to_string(traffic)));
  std::vector<SampleInfo> info;
  for (const auto* t : selected) info.push_back({t->video_id, t->label});

  const auto& names = bin_feature_names();
  const int n_points = (stop_s - kDecisionPeriodS) / kDecisionPeriodS;
  std::vector<std::vector<double>> acc(n_points), f1(n_points);
  std::vector<std::size_t> scored(n_points, 0);
  std::vector<double> bin_acc;

  for (int r = 0; r < spec.n_repeats; ++r) {
    const Split s = split(info, spec, r);
    TrainingSet ts;
    ts.feature_names.assign(names.begin(), names.end());
    for (auto i : s.train)
      for (const auto& b : selected[i]->bins) {
        const auto v = b.values();
        ts.values.insert(ts.values.end(), v.begin(), v.end());
        ts.labels.push_back(selected[i]->label);
      }
    const GbtModel model = train(ts, hp);

    std::size_t bins_correct = 0, bins_total = 0;
    std::vector<std::vector<int>> pred_at(n_points), label_at(n_points);
    for (auto i : s.test) {
      const BinTrace& t = *selected[i];
      for (const auto& b : t.bins) {
        const auto v = b.values();
        bins_correct += (predict_proba(model, v) >= 0.5 ? 1 : 0) == t.label;
        ++bins_total;
      }
      for (const auto& d : classify_stream(model, t.bins, stop_s)) {
        const int k = d.t_s / kDecisionPeriodS - 2;
        if (k < 0 || k >= n_points) continue;
        pred_at[k].push_back(d.label);
        label_at[k].push_back(t.label);
      }
    }
    if (bins_total > 0) bin_acc.push_back(static_cast<double>(bins_correct) / static_cast<double>(bins_total));
    for (int k = 0; k < n_points; ++k) {
      if (pred_at[k].empty()) continue;
      const Metrics m = metrics(pred_at[k], label_at[k]);
      acc[k].push_back(m.accuracy);
      f1[k].push_back(m.f1);
      scored[k] += pred_at[k].size();
    }
  }

  RealtimeCurve curve;
  curve.traffic = traffic;
  curve.bin_accuracy = mean_std(bin_acc).first;
  for (int k = 0; k < n_points; ++k)
    curve.points.push_back({(k + 2) * kDecisionPeriodS, mean_std(acc[k]).first, mean_std(f1[k]).first, scored[k]});
  return curve;
}

std::string write_sweep_table_csv(std::span<const EvalReport> reports, std::string_view setting_column,
                                  std::span<const std::string> comments) {
  std::vector<std::string> settings;
  std::set<TrafficType> present;
  for (const auto& r : reports) {
    if (std::find(settings.begin(), settings.end(), r.setting) == settings.end()) settings.push_back(r.setting);
    present.insert(r.traffic);
  }
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += setting_column;
  for (TrafficType t : present) {
    const std::string name(to_string(t));
    out += "," + name + "_acc," + name + "_f1";
  }
  out += '\n';
  for (const auto& s : settings) {
    out += s;
    for (TrafficType t : present) {
      const auto it = std::find_if(reports.begin(), reports.end(),
                                   [&](const EvalReport& r) { return r.setting == s && r.traffic == t; });
      if (it == reports.end()) out += ",,";
      else out += "," + percent(it->accuracy_mean) + "," + percent(it->f1_mean);
    }
    out += '\n';
  }
  return out;
}

std::string write_report_csv(std::span<const EvalReport> reports, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "experiment,traffic,setting,model,n_repeats,accuracy_mean,accuracy_std,f1_mean,f1_std,tp,fp,tn,fn\n";
  for (const auto& r : reports) {
    out += r.experiment + ',' + std::string(to_string(r.traffic)) + ',' + r.setting + ',' +
           std::string(to_string(r.model)) + ',' + std::to_string(r.accuracy.size()) + ',' +
           text::format_double(r.accuracy_mean) + ',' + text::format_double(r.accuracy_std) + ',' +
           text::format_double(r.f1_mean) + ',' + text::format_double(r.f1_std) + ',' +
           std::to_string(r.confusion.tp) + ',' + std::to_string(r.confusion.fp) + ',' +
           std::to_string(r.confusion.tn) + ',' + std::to_string(r.confusion.fn) + '\n';
  }
  return out;
}

std::string write_curve_csv(const RealtimeCurve& curve, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "traffic,t_s,accuracy,f1,traces_scored\n";
  for (const auto& p : curve.points)
    out += std::string(to_string(curve.traffic)) + ',' + std::to_string(p.t_s) + ',' +
           text::format_double(p.accuracy) + ',' + text::format_double(p.f1) + ',' +
           std::to_string(p.traces_scored) + '\n';
  return out;
}

std::string write_per_video_csv(const std::map<std::string, double>& acc, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "video_id,accuracy\n";
  for (const auto& [video, a] : acc) out += video + ',' + text::format_double(a) + '\n';
  return out;
}

std::string summary_json(std::string_view experiment, std::span<const std::pair<std::string, std::string>> config,
                         std::span<const EvalReport> reports, const RealtimeCurve* curve) {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json o;
    o["experiment"] = r.experiment;
    o["traffic"] = to_string(r.traffic);
    o["setting"] = r.setting;
    o["model"] = to_string(r.model);
    o["accuracy"] = r.accuracy;
    o["f1"] = r.f1;
    o["accuracy_mean"] = r.accuracy_mean;
    o["accuracy_std"] = r.accuracy_std;
    o["f1_mean"] = r.f1_mean;
    o["f1_std"] = r.f1_std;
    o["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    reps.push_back(std::move(o));
  }
  j["reports"] = reps;
  if (curve) {
    nlohmann::ordered_json c;
    c["traffic"] = to_string(curve->traffic);
    c["bin_accuracy"] = curve->bin_accuracy;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : curve->points)
      pts.push_back({{"t_s", p.t_s}, {"accuracy", p.accuracy}, {"f1", p.f1}, {"traces_scored", p.traces_scored}});
    c["points"] = pts;
    j["curve"] = c;
  }
  return j.dump(1) + "\n";
}

}  // namespace panoclass
