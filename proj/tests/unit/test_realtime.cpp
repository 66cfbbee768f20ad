#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "panoclass/errors.hpp"
#include "panoclass/realtime.hpp"
#include "panoclass/rng.hpp"

using namespace panoclass;

namespace {

// Bin-level model that predicts 360 when dl_pkt_count > 10.
GbtModel count_model() {
  TrainingSet t;
  for (const auto& n : bin_feature_names()) t.feature_names.push_back(n);
  for (int i = 0; i < 40; ++i) {
    BinFeatures b;
    b.dl_pkt_count = static_cast<std::uint64_t>(i);
    const auto v = b.values();
    t.values.insert(t.values.end(), v.begin(), v.end());
    t.labels.push_back(i > 10 ? 1 : 0);
  }
  GbtHyperparams hp;
  hp.n_trees = 20;
  return train(t, hp);
}

std::vector<BinFeatures> bins_with_counts(const std::vector<int>& counts) {
  std::vector<BinFeatures> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    BinFeatures b;
    b.window_start_s = static_cast<std::int64_t>(i);
    b.dl_pkt_count = static_cast<std::uint64_t>(counts[i]);
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST(ModeVote, MajorityAndTies) {
  const std::vector<std::uint8_t> three{1, 1, 0};
  EXPECT_EQ(mode_vote(three, std::nullopt), 1);
  const std::vector<std::uint8_t> tie{1, 0, 1, 0};
  EXPECT_EQ(mode_vote(tie, std::nullopt), 0);
  EXPECT_EQ(mode_vote(tie, 1), 1);
  EXPECT_EQ(mode_vote(tie, 0), 0);
  EXPECT_THROW(mode_vote({}, std::nullopt), EmptyInputError);
}

TEST(Stream, DecisionScheduleAt120s) {
  const auto model = count_model();
  std::vector<int> counts(116, 20);
  const auto decisions = classify_stream(model, bins_with_counts(counts), 120);
  ASSERT_EQ(decisions.size(), 23u);
  for (std::size_t n = 0; n < decisions.size(); ++n) {
    EXPECT_EQ(decisions[n].t_s, static_cast<int>(n + 2) * 5);
    EXPECT_EQ(decisions[n].votes_total, static_cast<int>(n + 1) * 5);
    EXPECT_EQ(decisions[n].label, 1);
  }
}

TEST(Stream, StopTrimsDecisionsAndBins) {
  const auto model = count_model();
  const auto bins = bins_with_counts(std::vector<int>(116, 0));
  EXPECT_EQ(classify_stream(model, bins, 30).size(), 5u);
  EXPECT_EQ(classify_stream(model, bins, 10).size(), 1u);
  EXPECT_TRUE(classify_stream(model, bins, 9).empty());
}

TEST(Stream, TieKeepsPreviousDecision) {
  const auto model = count_model();
  // First five bins vote 360 (4 of 5), the next five vote normal (1 of 5): 5-5 tie after 10 bins.
  const auto bins = bins_with_counts({20, 20, 20, 20, 0, 0, 0, 0, 0, 20});
  StreamState st;
  std::vector<StreamDecision> ds;
  for (const auto& b : bins)
    if (auto d = push_bin(st, model, b)) ds.push_back(*d);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].label, 1);
  EXPECT_EQ(ds[1].votes_for_1, 5);
  EXPECT_EQ(ds[1].label, 1);
}

TEST(Stream, OutOfOrderBinsThrow) {
  const auto model = count_model();
  auto bins = bins_with_counts({1, 2, 3});
  StreamState st;
  push_bin(st, model, bins[0]);
  EXPECT_THROW(push_bin(st, model, bins[2]), OrderingError);
  EXPECT_THROW(push_prediction(st, 2), InvalidArgumentError);
}

TEST(Stream, MonteCarloMatchesMajorityOracle) {
  Rng rng(17);
  constexpr int kRuns = 4000;
  for (double p : {0.6, 0.7, 0.85}) {
    std::vector<int> correct(6, 0);
    for (int r = 0; r < kRuns; ++r) {
      StreamState st;
      const int truth = r % 2;
      for (int b = 0; b < 25; ++b) {
        const int pred = rng.bernoulli(p) ? truth : 1 - truth;
        if (auto d = push_prediction(st, pred)) correct[static_cast<std::size_t>(b + 1) / 5] += d->label == truth;
      }
    }
    for (int n = 1; n <= 5; ++n) {
      const double mc = correct[static_cast<std::size_t>(n)] / static_cast<double>(kRuns);
      EXPECT_NEAR(mc, oracle::majority_decision_accuracy(p, n), 0.03) << "p=" << p << " n=" << n;
    }
  }
}

TEST(MajorityOracle, OddGroupsAreBinomialTails) {
  // Five bins at p = 0.7: P(X >= 3) = 0.83692.
  EXPECT_NEAR(oracle::majority_decision_accuracy(0.7, 1), 0.83692, 1e-5);
  EXPECT_NEAR(oracle::majority_decision_accuracy(0.5, 3), 0.5, 1e-12);
}
