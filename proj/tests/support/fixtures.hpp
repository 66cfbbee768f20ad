#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "panoclass/rng.hpp"
#include "panoclass/types.hpp"

namespace fixture {

inline constexpr const char* kClient = "10.0.0.2";

// TCP or UDP packet between the client and `server`, sized consistently
// (frame = 14-byte Ethernet + 20-byte IPv4 + pkt_len).
inline panoclass::PacketRecord packet(std::int64_t ts_us, panoclass::Direction dir, std::uint32_t pkt_len,
                                      panoclass::Protocol proto = panoclass::Protocol::tcp,
                                      std::string server = "192.0.2.10", std::uint16_t client_port = 50000,
                                      std::uint16_t server_port = 443) {
  using namespace panoclass;
  PacketRecord p;
  p.timestamp_us = ts_us;
  p.direction = dir;
  p.proto = proto;
  p.tcp_hdr_len = proto == Protocol::tcp ? 32 : 0;
  p.pkt_len = std::max<std::uint32_t>(pkt_len, proto == Protocol::tcp ? 32 : 8);
  p.frame_len = p.pkt_len + 34;
  const bool up = dir == Direction::uplink;
  p.src_ip = up ? kClient : server;
  p.dst_ip = up ? server : kClient;
  p.src_port = up ? client_port : server_port;
  p.dst_port = up ? server_port : client_port;
  return p;
}

// `n` packets over `n_tuples` 5-tuples, time-sorted, random sizes and directions.
inline std::vector<panoclass::PacketRecord> random_packets(std::uint64_t seed, std::size_t n, int n_tuples,
                                                           double mean_gap_s = 0.05) {
  using namespace panoclass;
  Rng rng(seed);
  std::vector<PacketRecord> out;
  std::int64_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t += static_cast<std::int64_t>(rng.exponential(mean_gap_s) * 1e6);
    const int tuple = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_tuples)));
    const auto dir = rng.bernoulli(0.3) ? Direction::uplink : Direction::downlink;
    const auto proto = tuple % 2 == 0 ? Protocol::tcp : Protocol::udp;
    auto p = packet(t, dir, static_cast<std::uint32_t>(40 + rng.below(1400)), proto,
                    "198.51.100." + std::to_string(10 + tuple), static_cast<std::uint16_t>(40000 + tuple));
    if (proto == Protocol::tcp) p.tcp_seq = static_cast<std::uint32_t>(rng.below(6));
    out.push_back(p);
  }
  return out;
}

}  // namespace fixture
