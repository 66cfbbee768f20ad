#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace panoclass {

enum class Direction : std::uint8_t { uplink, downlink };
enum class Protocol : std::uint8_t { tcp, udp, other };
enum class Platform : std::uint8_t { yt, fb };

using MacAddress = std::array<std::uint8_t, 6>;

// One captured packet. Sizes follow the capture convention:
//   frame_len   layer-2 length on the wire
//   pkt_len     IP payload, i.e. transport header + application data
//   tcp_hdr_len TCP header length, 0 for anything that is not TCP
struct PacketRecord {
  std::int64_t timestamp_us = 0;
  Direction direction = Direction::downlink;
  std::uint32_t frame_len = 0;
  std::uint32_t pkt_len = 0;
  std::uint32_t tcp_hdr_len = 0;
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol proto = Protocol::other;
  std::string sni_hint;
  // Only known for TCP packets read from pcap or CSV files carrying the seq column.
  std::optional<std::uint32_t> tcp_seq;
  // Only known for pcap input.
  std::optional<MacAddress> src_mac;
  std::optional<MacAddress> dst_mac;

  bool operator==(const PacketRecord&) const = default;
};

std::string_view to_string(Direction d);
std::string_view to_string(Protocol p);
std::string_view to_string(Platform p);

// Short wire tokens: "ul"/"dl", "tcp"/"udp"/"other", "YT"/"FB". Throw InvalidArgumentError.
Direction parse_direction(std::string_view s);
Protocol parse_protocol(std::string_view s);
Platform parse_platform(std::string_view s);

std::optional<MacAddress> parse_mac(std::string_view s);
std::string format_mac(const MacAddress& mac);

}  // namespace panoclass
