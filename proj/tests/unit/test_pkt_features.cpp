#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "panoclass/errors.hpp"
#include "panoclass/pkt_features.hpp"
#include "panoclass/synth.hpp"

using namespace panoclass;

namespace {

void expect_close(double got, double want) {
  EXPECT_LE(std::fabs(got - want), 1e-9 * std::max(1.0, std::fabs(want))) << got << " vs " << want;
}

void expect_bins_equal(const BinFeatures& got, const BinFeatures& want) {
  EXPECT_EQ(got.window_start_s, want.window_start_s);
  EXPECT_EQ(got.ul_frame_len_total, want.ul_frame_len_total);
  EXPECT_EQ(got.dl_pkt_size_total, want.dl_pkt_size_total);
  EXPECT_EQ(got.dl_tcp_hdr_total, want.dl_tcp_hdr_total);
  EXPECT_EQ(got.dl_pkt_count, want.dl_pkt_count);
  expect_close(got.dl_pkt_size_mean, want.dl_pkt_size_mean);
  expect_close(got.dl_pkt_size_min, want.dl_pkt_size_min);
  expect_close(got.dl_pkt_size_max, want.dl_pkt_size_max);
  expect_close(got.dl_pkt_size_std, want.dl_pkt_size_std);
}

std::vector<PacketRecord> trace_of_length(double seconds) {
  std::vector<PacketRecord> pk;
  for (double t = 0.0; t < seconds; t += 0.25)
    pk.push_back(fixture::packet(static_cast<std::int64_t>(t * 1e6), Direction::downlink, 1000));
  pk.push_back(fixture::packet(static_cast<std::int64_t>(seconds * 1e6), Direction::uplink, 60));
  return pk;
}

}  // namespace

TEST(BinFeatures, ThreeDownlinkPackets) {
  const std::vector<PacketRecord> pk{fixture::packet(0, Direction::downlink, 100),
                                     fixture::packet(1, Direction::downlink, 200),
                                     fixture::packet(2, Direction::downlink, 300)};
  const auto b = compute_bin_features(pk);
  EXPECT_EQ(b.dl_pkt_size_total, 600u);
  EXPECT_EQ(b.dl_pkt_count, 3u);
  EXPECT_EQ(b.dl_tcp_hdr_total, 96u);
  EXPECT_DOUBLE_EQ(b.dl_pkt_size_mean, 200.0);
  EXPECT_DOUBLE_EQ(b.dl_pkt_size_min, 100.0);
  EXPECT_DOUBLE_EQ(b.dl_pkt_size_max, 300.0);
  EXPECT_NEAR(b.dl_pkt_size_std, std::sqrt(20000.0 / 3.0), 1e-9);
  EXPECT_NEAR(b.dl_pkt_size_std, 81.6497, 1e-4);
}

TEST(BinFeatures, SingleUplinkAndEmpty) {
  auto up = fixture::packet(0, Direction::uplink, 1480);
  ASSERT_EQ(up.frame_len, 1514u);
  const auto b = compute_bin_features(std::vector<PacketRecord>{up});
  EXPECT_EQ(b.ul_frame_len_total, 1514u);
  BinFeatures only_ul;
  only_ul.ul_frame_len_total = 1514;
  EXPECT_EQ(b, only_ul);
  EXPECT_EQ(compute_bin_features({}), BinFeatures{});
}

TEST(BinFeatures, Invariants) {
  const auto pk = fixture::random_packets(21, 400, 3, 0.01);
  for (const auto& b : bin_packets(pk, BinningConfig{})) {
    if (b.dl_pkt_count == 0) {
      EXPECT_EQ(b.dl_pkt_size_total, 0u);
      EXPECT_EQ(b.dl_pkt_size_max, 0.0);
      continue;
    }
    EXPECT_LE(b.dl_pkt_size_min, b.dl_pkt_size_mean);
    EXPECT_LE(b.dl_pkt_size_mean, b.dl_pkt_size_max);
    EXPECT_NEAR(b.dl_pkt_size_mean * static_cast<double>(b.dl_pkt_count), static_cast<double>(b.dl_pkt_size_total),
                1e-6 * static_cast<double>(b.dl_pkt_size_total));
  }
}

TEST(Binning, CountLaw) {
  BinningConfig cfg;
  cfg.interval_s = 30;
  auto bins = bin_packets(trace_of_length(30.0), cfg);
  ASSERT_EQ(bins.size(), 26u);
  for (std::size_t i = 0; i < bins.size(); ++i) EXPECT_EQ(bins[i].window_start_s, static_cast<std::int64_t>(i));

  cfg.interval_s = 20;
  EXPECT_EQ(bin_packets(trace_of_length(120.0), cfg).size(), 16u);

  for (int duration : {5, 7, 20, 33, 61}) {
    for (int step : {1, 2, 3}) {
      for (int window : {1, 5}) {
        BinningConfig c{window, step, 120};
        const std::size_t want =
            duration < window ? 0 : static_cast<std::size_t>((std::min(duration, 120) - window) / step + 1);
        EXPECT_EQ(expected_bin_count(static_cast<std::int64_t>(duration) * 1'000'000, c), want);
        EXPECT_EQ(bin_packets(trace_of_length(duration), c).size(), want);
      }
    }
  }
  // Partial seconds round up.
  EXPECT_EQ(expected_bin_count(29'000'001, BinningConfig{}), 26u);
}

TEST(Binning, IntervalShorterThanWindow) {
  BinningConfig cfg;
  cfg.interval_s = 4;
  EXPECT_THROW(bin_packets(trace_of_length(30.0), cfg), InvalidArgumentError);
  cfg = BinningConfig{};
  cfg.step_s = 0;
  EXPECT_THROW(bin_packets(trace_of_length(30.0), cfg), InvalidArgumentError);
}

TEST(Binning, MatchesRescanOracle) {
  SynthParams sp;
  sp.duration_s = 60;
  sp.seed = 99;
  sp.label = 1;
  const auto pk = generate_trace(sp);
  for (int step : {1, 2}) {
    const BinningConfig cfg{5, step, 120};
    const auto got = bin_packets(pk, cfg);
    const auto want = oracle::bins(pk, 5, step, 120, pk.back().timestamp_us);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) expect_bins_equal(got[i], want[i]);
  }
}

TEST(Binning, ExplicitDurationKeepsTrailingEmptyBins) {
  const std::vector<PacketRecord> pk{fixture::packet(0, Direction::downlink, 500),
                                     fixture::packet(2'000'000, Direction::downlink, 500)};
  const auto bins = bin_packets(pk, BinningConfig{}, 30'000'000);
  ASSERT_EQ(bins.size(), 26u);
  EXPECT_EQ(bins[0].dl_pkt_count, 2u);
  EXPECT_EQ(bins[3].dl_pkt_count, 0u);
  EXPECT_EQ(bins[25], (BinFeatures{.window_start_s = 25}));
}

TEST(Binning, EachPacketLandsInItsWindows) {
  // A packet at 7.5 s contributes to windows starting at 3..7.
  const std::vector<PacketRecord> pk{fixture::packet(7'500'000, Direction::downlink, 500),
                                     fixture::packet(20'000'000, Direction::uplink, 40)};
  const auto bins = bin_packets(pk, BinningConfig{});
  for (const auto& b : bins) {
    const bool inside = b.window_start_s >= 3 && b.window_start_s <= 7;
    EXPECT_EQ(b.dl_pkt_count, inside ? 1u : 0u) << b.window_start_s;
  }
}

TEST(Percentile, InterpolatesBetweenRanks) {
  const std::vector<double> v{0, 10, 20, 30};
  EXPECT_DOUBLE_EQ(percentile_sorted(v, 0.25), 7.5);
  EXPECT_DOUBLE_EQ(percentile_sorted(v, 0.50), 15.0);
  EXPECT_DOUBLE_EQ(percentile_sorted(v, 0.75), 22.5);
  EXPECT_DOUBLE_EQ(percentile_sorted(v, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(percentile_sorted(v, 1.0), 30.0);
  EXPECT_THROW(percentile_sorted(std::vector<double>{}, 0.5), EmptyInputError);
}

TEST(Summary, SingleBin) {
  BinFeatures b;
  b.ul_frame_len_total = 7;
  b.dl_pkt_size_total = 100;
  b.dl_pkt_count = 2;
  b.dl_pkt_size_mean = 50;
  b.dl_pkt_size_std = 3;
  const auto fv = summarize_bins(std::vector<BinFeatures>{b});
  ASSERT_EQ(fv.values.size(), kPacketSummaryFeatureCount);
  EXPECT_EQ(fv.names, packet_summary_feature_names());
  const auto vals = b.values();
  for (std::size_t f = 0; f < kBinFeatureCount; ++f) {
    for (std::size_t s = 0; s < kSummaryStatCount; ++s) {
      const double want = summary_stat_names()[s] == "std" ? 0.0 : vals[f];
      EXPECT_DOUBLE_EQ(fv.values[f * kSummaryStatCount + s], want) << fv.names[f * kSummaryStatCount + s];
    }
  }
}

TEST(Summary, PercentilesOfTotals) {
  std::vector<BinFeatures> bins(4);
  for (std::size_t i = 0; i < 4; ++i) bins[i].dl_pkt_size_total = 10 * i;
  const auto fv = summarize_bins(bins);
  auto at = [&](const std::string& n) {
    return fv.values[static_cast<std::size_t>(std::find(fv.names.begin(), fv.names.end(), n) - fv.names.begin())];
  };
  EXPECT_DOUBLE_EQ(at("dl_pkt_size_total_p25"), 7.5);
  EXPECT_DOUBLE_EQ(at("dl_pkt_size_total_p50"), 15.0);
  EXPECT_DOUBLE_EQ(at("dl_pkt_size_total_p75"), 22.5);
  EXPECT_THROW(summarize_bins({}), EmptyInputError);
}

TEST(Summary, MatchesReferenceStatistics) {
  const auto pk = fixture::random_packets(31, 3000, 4, 0.01);
  BinningConfig cfg;
  cfg.interval_s = 30;
  const auto bins = bin_packets(pk, cfg);
  ASSERT_EQ(bins.size(), 26u);
  const auto fv = summarize_bins(bins);
  const auto want = oracle::summary(bins);
  ASSERT_EQ(want.size(), fv.names.size());
  for (std::size_t i = 0; i < fv.names.size(); ++i) expect_close(fv.values[i], want.at(fv.names[i]));
}

TEST(Summary, PermutationInvariantAndScales) {
  const auto pk = fixture::random_packets(32, 2000, 4, 0.02);
  auto bins = bin_packets(pk, BinningConfig{});
  const auto a = summarize_bins(bins);
  Rng rng(1);
  rng.shuffle(std::span<BinFeatures>(bins));
  const auto b = summarize_bins(bins);
  for (std::size_t i = 0; i < a.values.size(); ++i) expect_close(b.values[i], a.values[i]);

  // Doubling every pkt_len doubles the downlink size features; counts stay.
  auto doubled = pk;
  for (auto& p : doubled) p.pkt_len *= 2;
  const auto c = summarize_bins(bin_packets(doubled, BinningConfig{}));
  for (std::size_t i = 0; i < a.names.size(); ++i) {
    const auto& n = a.names[i];
    if (n.rfind("dl_pkt_size", 0) == 0) expect_close(c.values[i], 2.0 * a.values[i]);
    if (n.rfind("dl_pkt_count", 0) == 0) expect_close(c.values[i], a.values[i]);
  }
}

TEST(BinCsv, RoundTrip) {
  const auto pk = fixture::random_packets(33, 500, 3, 0.05);
  std::vector<TraceBins> traces{{"a", bin_packets(pk, BinningConfig{})}, {"b", bin_packets(pk, {5, 2, 60})}};
  const auto csv = write_bin_csv(traces);
  const auto back = read_bin_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].trace_id, "a");
  EXPECT_EQ(back[0].bins, traces[0].bins);
  EXPECT_EQ(back[1].bins, traces[1].bins);
  EXPECT_EQ(write_bin_csv(back), csv);
}

TEST(BinVector, NamesMatchBinFeatures) {
  BinFeatures b;
  b.dl_pkt_count = 4;
  const auto v = bin_vector(b);
  ASSERT_EQ(v.names.size(), kBinFeatureCount);
  EXPECT_EQ(v.names[3], "dl_pkt_count");
  EXPECT_EQ(v.values[3], 4.0);
}
