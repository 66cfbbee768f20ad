#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "panoclass/errors.hpp"
#include "panoclass/pcap.hpp"
#include "panoclass/trace_ingest.hpp"

using namespace panoclass;

namespace {

std::span<const std::uint8_t> bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Minimal TLS 1.2 ClientHello carrying one server_name extension.
std::vector<std::uint8_t> client_hello(const std::string& host) {
  std::vector<std::uint8_t> ext;
  const auto n = static_cast<std::uint8_t>(host.size());
  ext = {0x00, 0x00, 0x00, static_cast<std::uint8_t>(n + 5), 0x00, static_cast<std::uint8_t>(n + 3), 0x00, 0x00, n};
  ext.insert(ext.end(), host.begin(), host.end());

  std::vector<std::uint8_t> body{0x03, 0x03};
  body.resize(body.size() + 32, 0xab);                        // random
  body.push_back(0);                                          // session id
  body.insert(body.end(), {0x00, 0x02, 0x13, 0x01});          // one cipher suite
  body.insert(body.end(), {0x01, 0x00});                      // null compression
  body.push_back(0x00);
  body.push_back(static_cast<std::uint8_t>(ext.size()));
  body.insert(body.end(), ext.begin(), ext.end());

  std::vector<std::uint8_t> hs{0x01, 0x00, 0x00, static_cast<std::uint8_t>(body.size())};
  hs.insert(hs.end(), body.begin(), body.end());
  std::vector<std::uint8_t> rec{0x16, 0x03, 0x01, 0x00, static_cast<std::uint8_t>(hs.size())};
  rec.insert(rec.end(), hs.begin(), hs.end());
  return rec;
}

}  // namespace

TEST(PacketCsv, HeaderOnlyIsEmpty) {
  const std::string csv = std::string(kPacketCsvHeader) + "\n";
  EXPECT_TRUE(parse_capture(bytes(csv), CaptureFormat::packet_csv).empty());
}

TEST(PacketCsv, SingleRowIsRebased) {
  const std::string csv = std::string(kPacketCsvHeader) +
                          "\n5000000,dl,1514,1460,20,192.0.2.1,10.0.0.2,443,50000,tcp,r1.googlevideo.com\n";
  const auto recs = parse_capture(bytes(csv), CaptureFormat::packet_csv);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_EQ(r.timestamp_us, 0);
  EXPECT_EQ(r.direction, Direction::downlink);
  EXPECT_EQ(r.frame_len, 1514u);
  EXPECT_EQ(r.pkt_len, 1460u);
  EXPECT_EQ(r.tcp_hdr_len, 20u);
  EXPECT_EQ(r.src_ip, "192.0.2.1");
  EXPECT_EQ(r.dst_ip, "10.0.0.2");
  EXPECT_EQ(r.src_port, 443);
  EXPECT_EQ(r.dst_port, 50000);
  EXPECT_EQ(r.proto, Protocol::tcp);
  EXPECT_EQ(r.sni_hint, "r1.googlevideo.com");
}

TEST(PacketCsv, RoundTripIsExact) {
  auto pk = fixture::random_packets(3, 300, 6);
  pk[7].sni_hint = "video.fbcdn.net";
  const auto csv = write_packet_csv(pk);
  const auto back = parse_capture(bytes(csv), CaptureFormat::packet_csv);
  // Timestamps are rebased on read.
  auto expected = pk;
  rebase_timestamps(expected);
  EXPECT_EQ(back, expected);
  EXPECT_EQ(write_packet_csv(back), write_packet_csv(expected));
}

TEST(PacketCsv, CommentsAreSkipped) {
  const std::vector<std::string> comments{"config: seed=1"};
  const auto pk = fixture::random_packets(4, 10, 2);
  const auto csv = write_packet_csv(pk, comments);
  EXPECT_EQ(csv.rfind("# config: seed=1\n", 0), 0u);
  EXPECT_EQ(parse_capture(bytes(csv), CaptureFormat::packet_csv).size(), 10u);
}

TEST(PacketCsv, MalformedRowReportsOffset) {
  const std::string header = std::string(kPacketCsvHeader) + "\n";
  const std::string csv = header + "0,dl,100,60,20,1.1.1.1,10.0.0.2,443,5000\n";
  try {
    parse_capture(bytes(csv), CaptureFormat::packet_csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), header.size());
  }
  EXPECT_THROW(parse_capture(bytes(std::string("nope\n")), CaptureFormat::packet_csv), ParseError);
}

TEST(Pcap, ThreePacketRoundTrip) {
  std::vector<PacketRecord> pk{
      fixture::packet(1'000'000, Direction::uplink, 100),
      fixture::packet(1'250'000, Direction::downlink, 1400),
      fixture::packet(2'000'000, Direction::downlink, 300, Protocol::udp, "2001:db8::1"),
  };
  pk[2].src_ip = "2001:db8::1";
  pk[2].dst_ip = "2001:db8::2";
  pk[0].tcp_seq = 7;
  pk[1].tcp_seq = 9;
  std::vector<pcap::Frame> frames;
  for (const auto& p : pk) frames.push_back(pcap::build_frame(p));
  const auto raw = pcap::write(frames);
  EXPECT_EQ(detect_format(raw), CaptureFormat::pcap_ethernet);

  ParseStats st;
  const auto back = parse_capture(raw, CaptureFormat::pcap_ethernet, &st);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(st.kept, 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].timestamp_us, pk[i].timestamp_us - 1'000'000);
    EXPECT_EQ(back[i].pkt_len, pk[i].pkt_len);
    EXPECT_EQ(back[i].tcp_hdr_len, pk[i].tcp_hdr_len);
    EXPECT_EQ(back[i].src_ip, pk[i].src_ip);
    EXPECT_EQ(back[i].dst_ip, pk[i].dst_ip);
    EXPECT_EQ(back[i].src_port, pk[i].src_port);
    EXPECT_EQ(back[i].dst_port, pk[i].dst_port);
    EXPECT_EQ(back[i].proto, pk[i].proto);
  }
  EXPECT_EQ(back[0].frame_len, pk[0].frame_len);
  EXPECT_EQ(back[2].frame_len, 14u + 40u + pk[2].pkt_len);
  EXPECT_EQ(back[0].tcp_seq, 7u);
  EXPECT_EQ(back[1].tcp_seq, 9u);
}

TEST(Pcap, SniFromClientHelloTagsTheWholeFlow) {
  auto hello = fixture::packet(0, Direction::uplink, 0);
  const auto ch = client_hello("R4---sn-abc.GoogleVideo.com");
  hello.pkt_len = hello.tcp_hdr_len + static_cast<std::uint32_t>(ch.size());
  hello.frame_len = hello.pkt_len + 34;
  auto reply = fixture::packet(10'000, Direction::downlink, 1200);
  auto other = fixture::packet(20'000, Direction::downlink, 1200, Protocol::tcp, "192.0.2.99");
  std::vector<pcap::Frame> frames{pcap::build_frame(hello, ch), pcap::build_frame(reply), pcap::build_frame(other)};
  const auto back = parse_capture(pcap::write(frames), CaptureFormat::pcap_ethernet);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].sni_hint, "r4---sn-abc.googlevideo.com");
  EXPECT_EQ(back[1].sni_hint, "r4---sn-abc.googlevideo.com");
  EXPECT_EQ(back[2].sni_hint, "");
}

TEST(Pcap, MalformedHeaderAndLinkType) {
  const std::vector<std::uint8_t> junk{0xde, 0xad, 0xbe, 0xef, 0, 0, 0, 0};
  EXPECT_THROW(pcap::read(junk), ParseError);

  auto raw = pcap::write({}, 105);
  EXPECT_THROW(parse_capture(raw, CaptureFormat::pcap_ethernet), UnsupportedFormatError);

  std::vector<pcap::Frame> frames{pcap::build_frame(fixture::packet(0, Direction::uplink, 100))};
  raw = pcap::write(frames);
  raw.resize(raw.size() - 10);
  try {
    parse_capture(raw, CaptureFormat::pcap_ethernet);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 24u + 16u);  // first byte of the cut record's data
  }
}

TEST(Direction, ClientSideDecidesDirection) {
  const std::vector<PacketRecord> pk{fixture::packet(0, Direction::uplink, 100),
                                     fixture::packet(1, Direction::downlink, 100)};
  ClientIdentity id;
  id.ip = fixture::kClient;
  const auto out = assign_direction(pk, id);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].direction, Direction::uplink);
  EXPECT_EQ(out[1].direction, Direction::downlink);
}

TEST(Direction, TenPacketsHandTable) {
  // (src, dst): client is 10.0.0.2; rows 1, 4, 6, 9 involve it.
  const std::vector<std::pair<std::string, std::string>> ends{
      {"1.1.1.1", "2.2.2.2"},  {"10.0.0.2", "8.8.8.8"}, {"3.3.3.3", "4.4.4.4"}, {"5.5.5.5", "6.6.6.6"},
      {"8.8.4.4", "10.0.0.2"}, {"7.7.7.7", "1.1.1.1"},  {"10.0.0.2", "9.9.9.9"}, {"2.2.2.2", "3.3.3.3"},
      {"4.4.4.4", "5.5.5.5"},  {"1.0.0.1", "10.0.0.2"},
  };
  std::vector<PacketRecord> pk;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    auto p = fixture::packet(static_cast<std::int64_t>(i), Direction::downlink, 100);
    p.src_ip = ends[i].first;
    p.dst_ip = ends[i].second;
    pk.push_back(p);
  }
  ClientIdentity id;
  id.ip = "10.0.0.2";
  const auto out = assign_direction(pk, id);
  ASSERT_EQ(out.size(), 4u);
  const std::vector<std::int64_t> ts{1, 4, 6, 9};
  const std::vector<Direction> dirs{Direction::uplink, Direction::downlink, Direction::uplink, Direction::downlink};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(out[i].timestamp_us, ts[i]);
    EXPECT_EQ(out[i].direction, dirs[i]);
  }
}

TEST(Direction, MacPreferredOverIp) {
  auto p = fixture::packet(0, Direction::downlink, 100);
  const MacAddress phone{2, 0, 0, 0, 0, 1};
  const MacAddress router{2, 0, 0, 0, 0, 9};
  p.src_mac = phone;
  p.dst_mac = router;
  p.src_ip = "192.0.2.50";  // NATed: IP does not match the identity
  ClientIdentity id;
  id.mac = phone;
  id.ip = fixture::kClient;
  const auto out = assign_direction(std::vector<PacketRecord>{p}, id);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].direction, Direction::uplink);
}

TEST(Direction, BothEndpointsIsAmbiguous) {
  auto p = fixture::packet(0, Direction::uplink, 100);
  p.dst_ip = p.src_ip;
  ClientIdentity id;
  id.ip = fixture::kClient;
  EXPECT_THROW(assign_direction(std::vector<PacketRecord>{p}, id), AmbiguousIdentityError);
  EXPECT_THROW(assign_direction(std::vector<PacketRecord>{p}, ClientIdentity{}), InvalidArgumentError);
}

TEST(FlowKey, CanonicalIsSymmetric) {
  const auto a = FlowKey::canonical("10.0.0.2", 5000, "1.2.3.4", 443, Protocol::tcp, true);
  const auto b = FlowKey::canonical("1.2.3.4", 443, "10.0.0.2", 5000, Protocol::tcp, false);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.client_ip, "10.0.0.2");
  EXPECT_EQ(FlowKey::of(fixture::packet(0, Direction::uplink, 10)),
            FlowKey::of(fixture::packet(0, Direction::downlink, 10)));
}

TEST(Flows, SingleTupleAndInterleavedPair) {
  std::vector<PacketRecord> one;
  for (int i = 0; i < 5; ++i)
    one.push_back(fixture::packet(i, i % 2 ? Direction::uplink : Direction::downlink, 100));
  EXPECT_EQ(assemble_flows(one).size(), 1u);

  std::vector<PacketRecord> two;
  for (int i = 0; i < 5; ++i) {
    const bool a = i % 2 == 0;
    two.push_back(fixture::packet(i, Direction::downlink, a ? 100 : 500, Protocol::tcp, a ? "1.1.1.1" : "2.2.2.2"));
  }
  const auto flows = assemble_flows(two);
  ASSERT_EQ(flows.size(), 2u);
  EXPECT_EQ(flows[0].packets.size(), 2u);  // B has more downlink bytes
  EXPECT_EQ(flows[1].packets.size(), 3u);
}

TEST(Flows, GroupByOracle) {
  const auto pk = fixture::random_packets(11, 200, 8);
  const auto flows = assemble_flows(pk);
  const auto groups = oracle::group_flows(pk);
  ASSERT_EQ(flows.size(), groups.size());

  std::size_t total = 0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    const auto it = groups.find(oracle::flow_key(f.packets.front()));
    ASSERT_NE(it, groups.end());
    std::uint64_t dl = 0, ul = 0;
    for (const auto& p : it->second) (p.direction == Direction::downlink ? dl : ul) += p.pkt_len;
    EXPECT_EQ(f.bytes_dl, dl);
    EXPECT_EQ(f.bytes_ul, ul);
    EXPECT_EQ(f.packets, it->second);
    EXPECT_EQ(f.start_us, it->second.front().timestamp_us);
    EXPECT_EQ(f.end_us, it->second.back().timestamp_us);
    if (i > 0) {
      EXPECT_GE(flows[i - 1].bytes_dl, f.bytes_dl);
    }
    total += f.packets.size();
  }
  EXPECT_EQ(total, pk.size());
}

TEST(Flows, ShuffleThenResortGivesSameFlows) {
  const auto pk = fixture::random_packets(12, 150, 5);
  auto shuffled = pk;
  Rng rng(5);
  rng.shuffle(std::span<PacketRecord>(shuffled));
  std::stable_sort(shuffled.begin(), shuffled.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
  EXPECT_EQ(assemble_flows(pk), assemble_flows(shuffled));
}

TEST(VideoFilter, KeywordSubstrings) {
  const std::vector<std::string> hosts{"r3---sn.googlevideo.com", "scontent.fbcdn.net", "www.youtube.com",
                                       "graph.facebook.com",      "i.ytimg.com",        "cdn.example.org"};
  std::vector<FlowRecord> flows;
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    FlowRecord f;
    f.key.server_ip = "192.0.2." + std::to_string(i);
    f.sni_hint = hosts[i];
    flows.push_back(f);
  }
  FlowRecord blank;
  flows.push_back(blank);

  // Hand-checked: ytimg contains "yt"; fbcdn and facebook contain "fb"/"facebook".
  auto names = [](const std::vector<FlowRecord>& v) {
    std::vector<std::string> out;
    for (const auto& f : v) out.push_back(f.sni_hint);
    return out;
  };
  EXPECT_EQ(names(filter_video_flows(flows, PlatformFilter::yt)),
            (std::vector<std::string>{"r3---sn.googlevideo.com", "www.youtube.com", "i.ytimg.com"}));
  EXPECT_EQ(names(filter_video_flows(flows, PlatformFilter::fb)),
            (std::vector<std::string>{"scontent.fbcdn.net", "graph.facebook.com"}));
  EXPECT_EQ(filter_video_flows(flows, PlatformFilter::any).size(), 5u);

  const auto once = filter_video_flows(flows, PlatformFilter::yt);
  EXPECT_EQ(filter_video_flows(once, PlatformFilter::yt), once);
}

TEST(VideoFilter, MergedStreamIsSorted) {
  const auto flows = assemble_flows(fixture::random_packets(13, 120, 4));
  const auto merged = flow_packets(flows);
  EXPECT_EQ(merged.size(), 120u);
  EXPECT_TRUE(std::is_sorted(merged.begin(), merged.end(), [](const PacketRecord& a, const PacketRecord& b) {
    return a.timestamp_us < b.timestamp_us;
  }));
}
