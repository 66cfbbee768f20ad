#include <benchmark/benchmark.h>

#include <vector>

#include "panoclass/gbt.hpp"
#include "panoclass/pipeline.hpp"
#include "panoclass/realtime.hpp"
#include "panoclass/synth.hpp"

using namespace panoclass;

namespace {

std::vector<PacketRecord> trace(int duration_s) {
  SynthParams p;
  p.duration_s = duration_s;
  p.label = 1;
  p.seed = 5;
  return generate_trace(p);
}

TrainingSet bin_training_set(int n_per_class) {
  SynthParams tp;
  tp.separability = 0.8;
  TrainingSet t;
  for (const auto& n : bin_feature_names()) t.feature_names.push_back(n);
  for (const auto& tr : generate_dataset(n_per_class, tp, 3)) {
    for (const auto& b : trace_bins(to_trace_input(tr), ExtractOptions{})) {
      const auto v = b.values();
      t.values.insert(t.values.end(), v.begin(), v.end());
      t.labels.push_back(tr.spec.params.label);
    }
  }
  return t;
}

void BM_BinPackets(benchmark::State& state) {
  const auto pk = trace(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bin_packets(pk, BinningConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pk.size()));
}
BENCHMARK(BM_BinPackets)->Arg(30)->Arg(120);

void BM_Train(benchmark::State& state) {
  const auto t = bin_training_set(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(train(t, GbtHyperparams{}));
  state.counters["rows"] = static_cast<double>(t.rows());
}
BENCHMARK(BM_Train)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PushBin(benchmark::State& state) {
  const auto model = train(bin_training_set(10), GbtHyperparams{});
  const auto bins = trace_bins(to_trace_input(generate_dataset(1, SynthParams{}, 9).front()), ExtractOptions{});
  StreamState st;
  std::int64_t t = 0;
  for (auto _ : state) {
    BinFeatures b = bins[static_cast<std::size_t>(t) % bins.size()];
    b.window_start_s = t++;
    benchmark::DoNotOptimize(push_bin(st, model, b));
  }
}
BENCHMARK(BM_PushBin);

}  // namespace

BENCHMARK_MAIN();
