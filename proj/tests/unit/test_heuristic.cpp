#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "panoclass/errors.hpp"
#include "panoclass/heuristic.hpp"
#include "panoclass/rng.hpp"

using namespace panoclass;

namespace {

LabeledDataset noisy_data(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<FeatureVector> vs;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector v;
    v.names = {"up", "down", "noise"};
    const int y = static_cast<int>(rng.below(2));
    v.values = {std::round(rng.normal(y * 2.0, 1.5)), std::round(rng.normal(-y * 1.0, 1.0)), rng.uniform()};
    v.label = y;
    v.trace_id = "t" + std::to_string(i);
    vs.push_back(v);
  }
  return make_dataset(vs);
}

std::vector<double> column(const LabeledDataset& d, std::size_t f) {
  std::vector<double> out;
  for (const auto& v : d.vectors) out.push_back(v.values[f]);
  return out;
}

std::vector<int> labels(const LabeledDataset& d) {
  std::vector<int> out;
  for (const auto& v : d.vectors) out.push_back(*v.label);
  return out;
}

}  // namespace

TEST(Thresholds, BestOfExhaustiveScan) {
  const auto d = noisy_data(1, 150);
  const std::vector<std::string> feats{"up", "down", "noise"};
  const auto m = fit_thresholds(d, feats);
  ASSERT_EQ(m.entries.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    const auto& e = m.entries[f];
    const double want = oracle::best_stump_accuracy(column(d, f), labels(d));
    EXPECT_DOUBLE_EQ(e.train_accuracy, want) << e.feature;

    // The stored threshold and polarity reproduce the stored accuracy.
    std::size_t ok = 0;
    for (const auto& v : d.vectors) ok += e.vote(v.values[f]) == *v.label;
    EXPECT_DOUBLE_EQ(static_cast<double>(ok) / static_cast<double>(d.size()), e.train_accuracy);
  }
  EXPECT_EQ(m.entries[0].polarity, Polarity::above_is_360);
  EXPECT_EQ(m.entries[1].polarity, Polarity::below_is_360);
}

TEST(Thresholds, MajorityOfVotesTiesToNormal) {
  ThresholdModel m;
  m.entries.push_back({"a", 0.0, Polarity::above_is_360, 1.0});
  m.entries.push_back({"b", 0.0, Polarity::above_is_360, 1.0});
  FeatureVector x;
  x.names = {"a", "b"};
  x.values = {1.0, -1.0};
  EXPECT_EQ(heuristic_predict(m, x), 0);
  x.values = {1.0, 1.0};
  EXPECT_EQ(heuristic_predict(m, x), 1);
  m.entries.push_back({"a", 5.0, Polarity::below_is_360, 1.0});
  x.values = {1.0, -1.0};
  EXPECT_EQ(heuristic_predict(m, x), 1);
}

TEST(Thresholds, Errors) {
  const auto d = noisy_data(2, 40);
  EXPECT_THROW(fit_thresholds(d, std::vector<std::string>{}), InvalidArgumentError);
  EXPECT_THROW(fit_thresholds(d, std::vector<std::string>{"up", "up"}), InvalidArgumentError);
  EXPECT_THROW(fit_thresholds(d, std::vector<std::string>{"missing"}), SchemaMismatchError);
  auto one_class = d;
  for (auto& v : one_class.vectors) v.label = 1;
  EXPECT_THROW(fit_thresholds(one_class, std::vector<std::string>{"up"}), DegenerateLabelsError);
  EXPECT_THROW(heuristic_predict(ThresholdModel{}, d.vectors[0]), InvalidArgumentError);
}

TEST(Thresholds, JsonRoundTrip) {
  const auto m = fit_thresholds(noisy_data(3, 80), std::vector<std::string>{"up", "down"});
  const auto text = save_threshold_model(m);
  EXPECT_EQ(load_threshold_model(text), m);
  EXPECT_THROW(load_threshold_model("[]"), DeserializationError);
}
