#include "panoclass/pcap.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstring>
#include <string>

#include "panoclass/errors.hpp"

namespace panoclass::pcap {
namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;
constexpr std::uint32_t kMaxRecordLen = 256 * 1024;

std::uint32_t load_u32(const std::uint8_t* p, bool swap) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return swap ? __builtin_bswap32(v) : v;
}

void put_u16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put_u16be(out, static_cast<std::uint16_t>(v >> 16));
  put_u16be(out, static_cast<std::uint16_t>(v));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t len) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) sum += (hdr[i] << 8) | hdr[i + 1];
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

Capture read(std::span<const std::uint8_t> raw) {
  if (raw.size() < kGlobalHeaderLen) throw ParseError("truncated pcap global header", 0);
  const std::uint32_t magic = load_u32(raw.data(), false);
  bool swap = false;
  bool nano = false;
  if (magic == kMagicMicro) {
  } else if (magic == kMagicNano) {
    nano = true;
  } else if (magic == __builtin_bswap32(kMagicMicro)) {
    swap = true;
  } else if (magic == __builtin_bswap32(kMagicNano)) {
    swap = nano = true;
  } else {
    throw ParseError("bad pcap magic number", 0);
  }

  Capture cap;
  cap.link_type = load_u32(raw.data() + 20, swap) & 0x0fffffff;

  std::size_t off = kGlobalHeaderLen;
  while (off < raw.size()) {
    if (raw.size() - off < kRecordHeaderLen) throw ParseError("truncated pcap record header", off);
    const std::uint8_t* h = raw.data() + off;
    const std::uint32_t ts_sec = load_u32(h, swap);
    const std::uint32_t ts_frac = load_u32(h + 4, swap);
    const std::uint32_t incl_len = load_u32(h + 8, swap);
    const std::uint32_t orig_len = load_u32(h + 12, swap);
    if (incl_len > kMaxRecordLen) throw ParseError("pcap record length out of range", off + 8);
    if ((nano && ts_frac >= 1'000'000'000u) || (!nano && ts_frac >= 1'000'000u))
      throw ParseError("pcap timestamp fraction out of range", off + 4);
    off += kRecordHeaderLen;
    if (raw.size() - off < incl_len) throw ParseError("truncated pcap record data", off);

    Frame f;
    f.timestamp_us = static_cast<std::int64_t>(ts_sec) * 1'000'000 +
                     (nano ? ts_frac / 1000 : ts_frac);
    f.orig_len = std::max(orig_len, incl_len);
    f.data.assign(raw.begin() + static_cast<std::ptrdiff_t>(off),
                  raw.begin() + static_cast<std::ptrdiff_t>(off + incl_len));
    cap.frames.push_back(std::move(f));
    off += incl_len;
  }
  return cap;
}

std::vector<std::uint8_t> write(std::span<const Frame> frames, std::uint32_t link_type) {
  std::vector<std::uint8_t> out;
  put_u32le(out, kMagicMicro);
  put_u16le(out, 2);
  put_u16le(out, 4);
  put_u32le(out, 0);
  put_u32le(out, 0);
  put_u32le(out, 65535);
  put_u32le(out, link_type);
  for (const auto& f : frames) {
    if (f.timestamp_us < 0) throw InvalidArgumentError("negative frame timestamp");
    put_u32le(out, static_cast<std::uint32_t>(f.timestamp_us / 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(f.timestamp_us % 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(f.data.size()));
    put_u32le(out, std::max<std::uint32_t>(f.orig_len, static_cast<std::uint32_t>(f.data.size())));
    out.insert(out.end(), f.data.begin(), f.data.end());
  }
  return out;
}

Frame build_frame(const PacketRecord& p, std::span<const std::uint8_t> payload) {
  const bool v6 = p.src_ip.find(':') != std::string::npos;
  std::uint8_t src[16]{}, dst[16]{};
  const int af = v6 ? AF_INET6 : AF_INET;
  if (inet_pton(af, p.src_ip.c_str(), src) != 1 || inet_pton(af, p.dst_ip.c_str(), dst) != 1)
    throw InvalidArgumentError("cannot encode addresses " + p.src_ip + " -> " + p.dst_ip);

  std::uint32_t transport_hdr = 0;
  std::uint8_t ip_proto = 253;  // experimental, for Protocol::other
  if (p.proto == Protocol::tcp) {
    if (p.tcp_hdr_len < 20 || p.tcp_hdr_len > 60 || p.tcp_hdr_len % 4 != 0)
      throw InvalidArgumentError("TCP header length must be 20..60 and a multiple of 4");
    transport_hdr = p.tcp_hdr_len;
    ip_proto = 6;
  } else if (p.proto == Protocol::udp) {
    transport_hdr = 8;
    ip_proto = 17;
  }
  if (p.pkt_len < transport_hdr) throw InvalidArgumentError("pkt_len shorter than transport header");

  Frame f;
  auto& out = f.data;
  const MacAddress dst_mac = p.dst_mac.value_or(MacAddress{});
  const MacAddress src_mac = p.src_mac.value_or(MacAddress{});
  out.insert(out.end(), dst_mac.begin(), dst_mac.end());
  out.insert(out.end(), src_mac.begin(), src_mac.end());
  put_u16be(out, v6 ? 0x86dd : 0x0800);

  if (v6) {
    put_u32be(out, 0x60000000u);
    put_u16be(out, static_cast<std::uint16_t>(p.pkt_len));
    out.push_back(ip_proto);
    out.push_back(64);
    out.insert(out.end(), src, src + 16);
    out.insert(out.end(), dst, dst + 16);
  } else {
    const std::size_t ip_start = out.size();
    out.push_back(0x45);
    out.push_back(0);
    put_u16be(out, static_cast<std::uint16_t>(20 + p.pkt_len));
    put_u16be(out, 0);
    put_u16be(out, 0x4000);  // DF
    out.push_back(64);
    out.push_back(ip_proto);
    put_u16be(out, 0);
    out.insert(out.end(), src, src + 4);
    out.insert(out.end(), dst, dst + 4);
    const auto csum = ipv4_checksum(out.data() + ip_start, 20);
    out[ip_start + 10] = static_cast<std::uint8_t>(csum >> 8);
    out[ip_start + 11] = static_cast<std::uint8_t>(csum);
  }

  if (p.proto == Protocol::tcp) {
    put_u16be(out, p.src_port);
    put_u16be(out, p.dst_port);
    put_u32be(out, p.tcp_seq.value_or(0));
    put_u32be(out, 0);
    out.push_back(static_cast<std::uint8_t>((p.tcp_hdr_len / 4) << 4));
    out.push_back(0x10);  // ACK
    put_u16be(out, 65535);
    put_u16be(out, 0);
    put_u16be(out, 0);
    out.resize(out.size() + (p.tcp_hdr_len - 20), 1);  // NOP options
  } else if (p.proto == Protocol::udp) {
    put_u16be(out, p.src_port);
    put_u16be(out, p.dst_port);
    put_u16be(out, static_cast<std::uint16_t>(p.pkt_len));
    put_u16be(out, 0);
  }

  const std::size_t app_len = p.pkt_len - transport_hdr;
  const std::size_t copy = std::min(app_len, payload.size());
  out.insert(out.end(), payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(copy));
  out.resize(out.size() + (app_len - copy), 0);
  // Ethernet padding up to the recorded wire length.
  if (p.frame_len > out.size()) out.resize(p.frame_len, 0);
  f.orig_len = static_cast<std::uint32_t>(out.size());
  f.timestamp_us = p.timestamp_us;
  return f;
}

}  // namespace panoclass::pcap
