#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panoclass/types.hpp"

// Classic libpcap container reading and writing.
namespace panoclass::pcap {

inline constexpr std::uint32_t kLinkTypeEthernet = 1;

struct Frame {
  std::int64_t timestamp_us = 0;
  std::uint32_t orig_len = 0;
  std::vector<std::uint8_t> data;
};

struct Capture {
  std::uint32_t link_type = kLinkTypeEthernet;
  std::vector<Frame> frames;
};

// Accepts both byte orders and both microsecond and nanosecond magics.
// Throws ParseError with the byte offset of a malformed header.
Capture read(std::span<const std::uint8_t> raw);

// Little-endian, microsecond resolution.
std::vector<std::uint8_t> write(std::span<const Frame> frames,
                                std::uint32_t link_type = kLinkTypeEthernet);

// Builds an Ethernet + IPv4/IPv6 + TCP/UDP frame matching `p`: the IP payload
// is p.pkt_len bytes, the TCP header p.tcp_hdr_len bytes and the frame length
// is the header sum. `payload` is copied into the application bytes and
// zero-padded. IPv6 is used when the addresses contain ':'.
Frame build_frame(const PacketRecord& p, std::span<const std::uint8_t> payload = {});

}  // namespace panoclass::pcap
