#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "panoclass/types.hpp"

namespace panoclass {

enum class CaptureFormat { pcap_ethernet, packet_csv };

// Counters for frames that parse_capture drops without failing.
struct ParseStats {
  std::size_t frames = 0;
  std::size_t kept = 0;
  std::size_t non_ip = 0;
  std::size_t fragments = 0;
  std::size_t non_tcp_udp = 0;
  std::size_t truncated = 0;
};

// Returns records sorted by timestamp and rebased so the first packet is at 0.
// For pcap input the direction field is provisional (downlink) until
// assign_direction runs; sni_hint is filled from TLS ClientHello or DNS.
std::vector<PacketRecord> parse_capture(std::span<const std::uint8_t> raw, CaptureFormat format,
                                        ParseStats* stats = nullptr);

// Picks the format from the magic number (pcap) or falls back to packet CSV.
CaptureFormat detect_format(std::span<const std::uint8_t> raw);
std::vector<PacketRecord> read_capture_file(const std::string& path, ParseStats* stats = nullptr);

inline constexpr std::string_view kPacketCsvHeader =
    "timestamp_us,direction,frame_len,pkt_len,tcp_hdr_len,src_ip,dst_ip,src_port,dst_port,proto,"
    "sni_hint";

// Canonical packet CSV. A trailing tcp_seq column is written only when at
// least one record carries a TCP sequence number. `comments` become leading
// '#' lines.
std::string write_packet_csv(std::span<const PacketRecord> packets,
                             std::span<const std::string> comments = {});

// Shifts timestamps so the earliest packet is at 0 (no-op on empty input).
void rebase_timestamps(std::vector<PacketRecord>& packets);

struct ClientIdentity {
  std::optional<MacAddress> mac;
  std::optional<std::string> ip;
};

// Keeps packets that involve the client and sets their direction
// (client -> network = uplink). MAC is used when both the identity and the
// packet carry one, otherwise IP. Throws AmbiguousIdentityError when the
// client matches both endpoints of a packet.
std::vector<PacketRecord> assign_direction(std::span<const PacketRecord> packets,
                                           const ClientIdentity& client);

// 5-tuple with the client endpoint always first.
struct FlowKey {
  std::string client_ip;
  std::string server_ip;
  std::uint16_t client_port = 0;
  std::uint16_t server_port = 0;
  Protocol proto = Protocol::other;

  // `a_is_client` selects which endpoint goes first; swapping (a, b) and
  // flipping the flag yields the same key.
  static FlowKey canonical(std::string_view ip_a, std::uint16_t port_a, std::string_view ip_b,
                           std::uint16_t port_b, Protocol proto, bool a_is_client);
  static FlowKey of(const PacketRecord& p);

  auto operator<=>(const FlowKey&) const = default;
  bool operator==(const FlowKey&) const = default;
};

struct FlowRecord {
  FlowKey key;
  std::vector<PacketRecord> packets;
  std::uint64_t bytes_dl = 0;
  std::uint64_t bytes_ul = 0;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  std::string sni_hint;

  bool operator==(const FlowRecord&) const = default;
};

// Groups direction-assigned, time-sorted packets by FlowKey. Output is sorted
// by bytes_dl descending, ties broken by earlier start, then by key.
std::vector<FlowRecord> assemble_flows(std::span<const PacketRecord> packets);

enum class PlatformFilter { yt, fb, any };

std::span<const std::string_view> platform_keywords(Platform p);

// Keeps flows whose sni_hint contains a platform keyword as a substring.
std::vector<FlowRecord> filter_video_flows(std::span<const FlowRecord> flows,
                                           PlatformFilter platform);

PlatformFilter to_filter(Platform p);

// Packets of the given flows merged back into one time-sorted stream.
std::vector<PacketRecord> flow_packets(std::span<const FlowRecord> flows);

}  // namespace panoclass
