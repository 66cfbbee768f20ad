#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "panoclass/errors.hpp"
#include "panoclass/feature_vector.hpp"
#include "panoclass/pipeline.hpp"
#include "panoclass/text.hpp"

using namespace panoclass;

namespace {

TraceInput synth_input(Platform platform, int label, std::uint64_t seed) {
  SynthParams p;
  p.platform = platform;
  p.label = label;
  p.seed = seed;
  p.duration_s = 60;
  return to_trace_input(SynthTrace{{"tr" + std::to_string(seed), "vid", p}, generate_trace(p)});
}

}  // namespace

TEST(Pipeline, VideoStreamKeepsPlatformFlows) {
  const auto t = synth_input(Platform::fb, 1, 1);
  const auto video = video_stream(t, false);
  EXPECT_LT(video.size(), t.packets.size());
  EXPECT_EQ(video_stream(t, true).size(), t.packets.size());
}

TEST(Pipeline, BinsSpanTheWholeCapture) {
  const auto t = synth_input(Platform::yt, 0, 2);
  ExtractOptions opts;
  EXPECT_EQ(trace_bins(t, opts).size(), 56u);
  opts.binning.interval_s = 30;
  const auto fv = packet_features(t, opts);
  EXPECT_EQ(fv.values.size(), kPacketSummaryFeatureCount);
  EXPECT_EQ(fv.trace_id, "tr2");
  EXPECT_EQ(fv.label, 0);
}

TEST(Pipeline, FlowRowsRankedByVolume) {
  const auto t = synth_input(Platform::yt, 1, 3);
  ExtractOptions opts;
  const auto rows = flow_rows(t, opts);
  ASSERT_FALSE(rows.empty());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].flow_rank, static_cast<int>(i));
    if (i > 0) {
      EXPECT_GE(rows[i - 1].features.bytes_dl, rows[i].features.bytes_dl);
    }
  }
  opts.all_flows = true;
  EXPECT_GT(flow_rows(t, opts).size(), rows.size());
}

TEST(Pipeline, TooShortTraceThrows) {
  TraceInput t;
  t.trace_id = "x";
  EXPECT_THROW(packet_features(t, ExtractOptions{}), EmptyInputError);
}

TEST(Manifest, RoundTripAndValidation) {
  std::vector<ManifestEntry> es{{"a", "v1", Platform::yt, 1, "traces/a.csv", ""},
                                {"b", "v2", Platform::fb, std::nullopt, "b.pcap", "10.0.0.2"}};
  const auto csv = write_manifest(es);
  EXPECT_EQ(read_manifest(csv), es);
  EXPECT_THROW(read_manifest("trace_id,video_id\n"), ParseError);
  EXPECT_THROW(read_manifest("trace_id,video_id,platform,label,path\na,v,YT,3,p\n"), ParseError);
  EXPECT_EQ(read_manifest("trace_id,video_id,platform,label,path\na,v,YT,1,p\n").size(), 1u);
}

TEST(FeatureCsv, RoundTripAndSchemaErrors) {
  std::vector<FeatureVector> vs;
  for (int i = 0; i < 3; ++i) {
    FeatureVector v;
    v.names = {"x", "y"};
    v.values = {i * 0.1, 1.0 / (i + 3)};
    v.label = i == 2 ? std::nullopt : std::optional<int>(i);
    v.trace_id = "t" + std::to_string(i);
    v.video_id = "v";
    v.platform = i ? Platform::fb : Platform::yt;
    vs.push_back(v);
  }
  LabeledDataset d{{"x", "y"}, vs};
  const auto csv = write_feature_csv(d);
  const auto back = read_feature_csv(csv);
  EXPECT_EQ(back.vectors, d.vectors);
  EXPECT_EQ(write_feature_csv(back), csv);
  EXPECT_THROW(d.validate(), InvalidArgumentError);  // unlabeled row

  d.vectors.pop_back();
  d.vectors[1].names = {"y", "x"};
  EXPECT_THROW(d.validate(), SchemaMismatchError);
  EXPECT_THROW(read_feature_csv("id,x\n"), ParseError);
}

TEST(Text, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 123456.789, 1e-300, -2.5}) EXPECT_EQ(text::parse_double(text::format_double(v)), v);
  EXPECT_THROW(text::parse_double("1.2.3"), InvalidArgumentError);
  EXPECT_THROW(text::parse_uint("-1"), InvalidArgumentError);
}
