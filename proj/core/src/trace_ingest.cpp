#include "panoclass/trace_ingest.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <tuple>
#include <unordered_map>

#include "panoclass/errors.hpp"
#include "panoclass/pcap.hpp"
#include "panoclass/text.hpp"

namespace panoclass {
namespace {

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }
std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

struct Decoded {
  PacketRecord rec;
  std::span<const std::uint8_t> app;  // captured application bytes
};

std::string ip_string(int af, const std::uint8_t* addr) {
  char buf[INET6_ADDRSTRLEN];
  inet_ntop(af, addr, buf, sizeof buf);
  return buf;
}

// Returns false (and bumps a counter) when the frame is dropped.
bool decode_frame(const pcap::Frame& f, ParseStats& st, Decoded& out) {
  const auto& d = f.data;
  std::size_t off = 12;
  if (d.size() < 14) {
    ++st.truncated;
    return false;
  }
  std::uint16_t ethertype = be16(d.data() + off);
  off += 2;
  for (int tags = 0; tags < 2 && (ethertype == 0x8100 || ethertype == 0x88a8); ++tags) {
    if (d.size() < off + 4) {
      ++st.truncated;
      return false;
    }
    ethertype = be16(d.data() + off + 2);
    off += 4;
  }

  PacketRecord& r = out.rec;
  MacAddress dst{}, src{};
  std::copy_n(d.begin(), 6, dst.begin());
  std::copy_n(d.begin() + 6, 6, src.begin());
  r.dst_mac = dst;
  r.src_mac = src;
  r.timestamp_us = f.timestamp_us;
  r.frame_len = f.orig_len;

  std::uint8_t proto = 0;
  std::size_t l4 = 0;
  std::uint32_t ip_payload = 0;
  if (ethertype == 0x0800) {
    if (d.size() < off + 20) {
      ++st.truncated;
      return false;
    }
    const std::uint8_t* ip = d.data() + off;
    const std::size_t ihl = (ip[0] & 0x0f) * 4u;
    const std::uint16_t total = be16(ip + 2);
    if ((ip[0] >> 4) != 4 || ihl < 20 || total < ihl) {
      ++st.truncated;
      return false;
    }
    if ((be16(ip + 6) & 0x3fff) != 0) {
      ++st.fragments;
      return false;
    }
    proto = ip[9];
    r.src_ip = ip_string(AF_INET, ip + 12);
    r.dst_ip = ip_string(AF_INET, ip + 16);
    l4 = off + ihl;
    ip_payload = total - static_cast<std::uint32_t>(ihl);
  } else if (ethertype == 0x86dd) {
    if (d.size() < off + 40) {
      ++st.truncated;
      return false;
    }
    const std::uint8_t* ip = d.data() + off;
    std::uint32_t payload = be16(ip + 4);
    proto = ip[6];
    r.src_ip = ip_string(AF_INET6, ip + 8);
    r.dst_ip = ip_string(AF_INET6, ip + 24);
    l4 = off + 40;
    // Skip extension headers up to the transport header.
    while (proto == 0 || proto == 43 || proto == 60 || proto == 51 || proto == 44) {
      if (proto == 44) {
        ++st.fragments;
        return false;
      }
      if (d.size() < l4 + 2) {
        ++st.truncated;
        return false;
      }
      const std::size_t len = proto == 51 ? (d[l4 + 1] + 2u) * 4u : (d[l4 + 1] + 1u) * 8u;
      if (len > payload) {
        ++st.truncated;
        return false;
      }
      proto = d[l4];
      l4 += len;
      payload -= static_cast<std::uint32_t>(len);
    }
    ip_payload = payload;
  } else {
    ++st.non_ip;
    return false;
  }

  r.pkt_len = ip_payload;
  std::size_t hdr = 0;
  if (proto == 6) {
    if (d.size() < l4 + 20) {
      ++st.truncated;
      return false;
    }
    r.proto = Protocol::tcp;
    r.src_port = be16(d.data() + l4);
    r.dst_port = be16(d.data() + l4 + 2);
    r.tcp_seq = be32(d.data() + l4 + 4);
    hdr = (d[l4 + 12] >> 4) * 4u;
    r.tcp_hdr_len = static_cast<std::uint32_t>(hdr);
  } else if (proto == 17) {
    if (d.size() < l4 + 8) {
      ++st.truncated;
      return false;
    }
    r.proto = Protocol::udp;
    r.src_port = be16(d.data() + l4);
    r.dst_port = be16(d.data() + l4 + 2);
    hdr = 8;
  } else {
    ++st.non_tcp_udp;
    return false;
  }
  if (r.pkt_len < hdr || r.frame_len < r.pkt_len || hdr < (proto == 6 ? 20u : 8u)) {
    ++st.truncated;
    return false;
  }
  const std::size_t app_start = std::min(d.size(), l4 + hdr);
  const std::size_t app_end = std::min(d.size(), l4 + r.pkt_len);
  out.app = std::span<const std::uint8_t>(d).subspan(app_start, app_end - std::min(app_end, app_start));
  return true;
}

// Server name from a TLS ClientHello contained in one segment.
std::optional<std::string> tls_client_hello_sni(std::span<const std::uint8_t> b) {
  if (b.size() < 5 + 4 || b[0] != 0x16 || b[1] != 0x03 || b[5] != 0x01) return std::nullopt;
  std::size_t p = 5 + 4 + 2 + 32;  // record hdr, handshake hdr, version, random
  auto need = [&](std::size_t n) { return p + n <= b.size(); };
  if (!need(1)) return std::nullopt;
  p += 1 + b[p];  // session id
  if (!need(2)) return std::nullopt;
  p += 2 + be16(&b[p]);  // cipher suites
  if (!need(1)) return std::nullopt;
  p += 1 + b[p];  // compression methods
  if (!need(2)) return std::nullopt;
  const std::size_t ext_end = std::min(b.size(), p + 2 + be16(&b[p]));
  p += 2;
  while (p + 4 <= ext_end) {
    const std::uint16_t type = be16(&b[p]);
    const std::uint16_t len = be16(&b[p + 2]);
    p += 4;
    if (p + len > ext_end) return std::nullopt;
    if (type == 0 && len >= 5) {
      std::size_t q = p + 2;  // server name list length
      if (b[q] == 0) {
        const std::uint16_t name_len = be16(&b[q + 1]);
        if (q + 3 + name_len <= p + len)
          return text::to_lower(std::string_view(reinterpret_cast<const char*>(&b[q + 3]), name_len));
      }
      return std::nullopt;
    }
    p += len;
  }
  return std::nullopt;
}

// Skips a (possibly compressed) DNS name; returns the decoded name when
// `decode` is set. Returns npos on malformed input.
std::size_t dns_name(std::span<const std::uint8_t> m, std::size_t p, std::string* decoded) {
  std::size_t end = std::string_view::npos;
  for (int jumps = 0; jumps < 16;) {
    if (p >= m.size()) return std::string_view::npos;
    const std::uint8_t len = m[p];
    if (len == 0) return end == std::string_view::npos ? p + 1 : end;
    if ((len & 0xc0) == 0xc0) {
      if (p + 1 >= m.size()) return std::string_view::npos;
      if (end == std::string_view::npos) end = p + 2;
      p = ((len & 0x3f) << 8) | m[p + 1];
      ++jumps;
      continue;
    }
    if (p + 1 + len > m.size()) return std::string_view::npos;
    if (decoded) {
      if (!decoded->empty()) decoded->push_back('.');
      decoded->append(reinterpret_cast<const char*>(&m[p + 1]), len);
    }
    p += 1 + len;
  }
  return std::string_view::npos;
}

// (address, hostname) pairs from A / AAAA answers, keyed by the query name.
std::vector<std::pair<std::string, std::string>> dns_answers(std::span<const std::uint8_t> m) {
  std::vector<std::pair<std::string, std::string>> out;
  if (m.size() < 12 || !(m[2] & 0x80)) return out;
  const std::uint16_t qd = be16(&m[4]);
  const std::uint16_t an = be16(&m[6]);
  std::size_t p = 12;
  std::string qname;
  for (std::uint16_t i = 0; i < qd; ++i) {
    std::string name;
    p = dns_name(m, p, i == 0 ? &name : nullptr);
    if (p == std::string_view::npos || p + 4 > m.size()) return out;
    if (i == 0) qname = text::to_lower(name);
    p += 4;
  }
  for (std::uint16_t i = 0; i < an; ++i) {
    p = dns_name(m, p, nullptr);
    if (p == std::string_view::npos || p + 10 > m.size()) return out;
    const std::uint16_t type = be16(&m[p]);
    const std::uint16_t rdlen = be16(&m[p + 8]);
    p += 10;
    if (p + rdlen > m.size()) return out;
    if (type == 1 && rdlen == 4) out.emplace_back(ip_string(AF_INET, &m[p]), qname);
    if (type == 28 && rdlen == 16) out.emplace_back(ip_string(AF_INET6, &m[p]), qname);
    p += rdlen;
  }
  return out;
}

using UnorderedKey = std::tuple<std::string, std::uint16_t, std::string, std::uint16_t, Protocol>;

UnorderedKey unordered_key(const PacketRecord& r) {
  if (std::tie(r.src_ip, r.src_port) < std::tie(r.dst_ip, r.dst_port))
    return {r.src_ip, r.src_port, r.dst_ip, r.dst_port, r.proto};
  return {r.dst_ip, r.dst_port, r.src_ip, r.src_port, r.proto};
}

std::vector<PacketRecord> parse_pcap(std::span<const std::uint8_t> raw, ParseStats& st) {
  const pcap::Capture cap = pcap::read(raw);
  if (cap.link_type != pcap::kLinkTypeEthernet)
    throw UnsupportedFormatError("unsupported pcap link type " + std::to_string(cap.link_type) +
                                 " (only Ethernet is supported)");
  std::vector<Decoded> decoded;
  decoded.reserve(cap.frames.size());
  for (const auto& f : cap.frames) {
    ++st.frames;
    Decoded d;
    if (decode_frame(f, st, d)) decoded.push_back(std::move(d));
  }
  std::stable_sort(decoded.begin(), decoded.end(), [](const Decoded& a, const Decoded& b) {
    return a.rec.timestamp_us < b.rec.timestamp_us;
  });

  // TLS SNI wins over DNS; both attach to the whole flow.
  std::map<UnorderedKey, std::string> sni;
  for (const auto& d : decoded) {
    if (d.rec.proto != Protocol::tcp || d.app.empty()) continue;
    if (auto name = tls_client_hello_sni(d.app)) sni.try_emplace(unordered_key(d.rec), *name);
  }
  std::unordered_map<std::string, std::string> dns;
  std::map<UnorderedKey, std::string> hint;
  std::vector<PacketRecord> out;
  out.reserve(decoded.size());
  for (auto& d : decoded) {
    const auto key = unordered_key(d.rec);
    auto it = hint.find(key);
    if (it == hint.end()) {
      std::string h;
      if (auto s = sni.find(key); s != sni.end()) {
        h = s->second;
      } else if (auto a = dns.find(d.rec.dst_ip); a != dns.end()) {
        h = a->second;
      } else if (auto b = dns.find(d.rec.src_ip); b != dns.end()) {
        h = b->second;
      }
      it = hint.emplace(key, std::move(h)).first;
    }
    if (d.rec.proto == Protocol::udp && d.rec.src_port == 53) {
      for (auto& [addr, name] : dns_answers(d.app)) dns[addr] = name;
    }
    d.rec.sni_hint = it->second;
    out.push_back(std::move(d.rec));
  }
  return out;
}

std::vector<PacketRecord> parse_csv(std::span<const std::uint8_t> raw) {
  const std::string_view data(reinterpret_cast<const char*>(raw.data()), raw.size());
  text::LineReader reader(data);
  std::string_view line;
  std::size_t off = 0;
  if (!reader.next(line, off)) throw ParseError("missing packet CSV header", 0);
  bool with_seq = false;
  if (line == std::string(kPacketCsvHeader) + ",tcp_seq") {
    with_seq = true;
  } else if (line != kPacketCsvHeader) {
    throw ParseError("unexpected packet CSV header", off);
  }
  const std::size_t ncols = with_seq ? 12 : 11;

  std::vector<PacketRecord> out;
  while (reader.next(line, off)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != ncols)
      throw ParseError("expected " + std::to_string(ncols) + " fields, got " + std::to_string(f.size()),
                       off);
    PacketRecord r;
    try {
      const auto ts = text::parse_int(f[0]);
      if (ts < 0) throw InvalidArgumentError("negative timestamp");
      r.timestamp_us = ts;
      r.direction = parse_direction(f[1]);
      r.frame_len = static_cast<std::uint32_t>(text::parse_uint(f[2]));
      r.pkt_len = static_cast<std::uint32_t>(text::parse_uint(f[3]));
      r.tcp_hdr_len = static_cast<std::uint32_t>(text::parse_uint(f[4]));
      r.src_ip = std::string(f[5]);
      r.dst_ip = std::string(f[6]);
      const auto sp = text::parse_uint(f[7]);
      const auto dp = text::parse_uint(f[8]);
      if (sp > 65535 || dp > 65535) throw InvalidArgumentError("port out of range");
      r.src_port = static_cast<std::uint16_t>(sp);
      r.dst_port = static_cast<std::uint16_t>(dp);
      r.proto = parse_protocol(f[9]);
      r.sni_hint = text::to_lower(text::trim(f[10]));
      if (with_seq && !f[11].empty()) r.tcp_seq = static_cast<std::uint32_t>(text::parse_uint(f[11]));
    } catch (const InvalidArgumentError& e) {
      throw ParseError(std::string("packet CSV line ") + std::to_string(reader.line_number()) + ": " +
                           e.what(),
                       off);
    }
    if (r.frame_len < r.pkt_len || r.pkt_len < r.tcp_hdr_len)
      throw ParseError("packet CSV line " + std::to_string(reader.line_number()) +
                           ": requires frame_len >= pkt_len >= tcp_hdr_len",
                       off);
    if (r.proto != Protocol::tcp && r.tcp_hdr_len != 0)
      throw ParseError("packet CSV line " + std::to_string(reader.line_number()) +
                           ": tcp_hdr_len must be 0 for non-TCP packets",
                       off);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const PacketRecord& a, const PacketRecord& b) {
    return a.timestamp_us < b.timestamp_us;
  });
  return out;
}

constexpr std::array<std::string_view, 3> kYtKeywords{"googlevideo", "yt", "youtube"};
constexpr std::array<std::string_view, 3> kFbKeywords{"fb", "fbcdn", "facebook"};

bool matches_any(std::string_view host, std::span<const std::string_view> keywords) {
  return std::any_of(keywords.begin(), keywords.end(),
                     [&](std::string_view k) { return host.find(k) != std::string_view::npos; });
}

}  // namespace

CaptureFormat detect_format(std::span<const std::uint8_t> raw) {
  if (raw.size() >= 4) {
    std::uint32_t m = 0;
    std::memcpy(&m, raw.data(), 4);
    for (std::uint32_t magic : {0xa1b2c3d4u, 0xa1b23c4du}) {
      if (m == magic || m == __builtin_bswap32(magic)) return CaptureFormat::pcap_ethernet;
    }
  }
  return CaptureFormat::packet_csv;
}

std::vector<PacketRecord> parse_capture(std::span<const std::uint8_t> raw, CaptureFormat format,
                                        ParseStats* stats) {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  st = ParseStats{};
  std::vector<PacketRecord> out =
      format == CaptureFormat::pcap_ethernet ? parse_pcap(raw, st) : parse_csv(raw);
  if (format == CaptureFormat::packet_csv) st.frames = out.size();
  st.kept = out.size();
  rebase_timestamps(out);
  return out;
}

std::vector<PacketRecord> read_capture_file(const std::string& path, ParseStats* stats) {
  const std::string data = text::read_file(path);
  const std::span<const std::uint8_t> raw(reinterpret_cast<const std::uint8_t*>(data.data()),
                                          data.size());
  return parse_capture(raw, detect_format(raw), stats);
}

std::string write_packet_csv(std::span<const PacketRecord> packets, std::span<const std::string> comments) {
  const bool with_seq =
      std::any_of(packets.begin(), packets.end(), [](const PacketRecord& p) { return p.tcp_seq.has_value(); });
  std::string out;
  out.reserve(packets.size() * 64 + 128);
  for (const auto& c : comments) out += "# " + c + "\n";
  out += kPacketCsvHeader;
  if (with_seq) out += ",tcp_seq";
  out += '\n';
  for (const auto& p : packets) {
    if (p.sni_hint.find(',') != std::string::npos) throw InvalidArgumentError("sni_hint contains a comma");
    out += std::to_string(p.timestamp_us);
    out += ',';
    out += to_string(p.direction);
    out += ',';
    out += std::to_string(p.frame_len);
    out += ',';
    out += std::to_string(p.pkt_len);
    out += ',';
    out += std::to_string(p.tcp_hdr_len);
    out += ',';
    out += p.src_ip;
    out += ',';
    out += p.dst_ip;
    out += ',';
    out += std::to_string(p.src_port);
    out += ',';
    out += std::to_string(p.dst_port);
    out += ',';
    out += to_string(p.proto);
    out += ',';
    out += p.sni_hint;
    if (with_seq) {
      out += ',';
      if (p.tcp_seq) out += std::to_string(*p.tcp_seq);
    }
    out += '\n';
  }
  return out;
}

void rebase_timestamps(std::vector<PacketRecord>& packets) {
  if (packets.empty()) return;
  const auto first = std::min_element(packets.begin(), packets.end(), [](const auto& a, const auto& b) {
                       return a.timestamp_us < b.timestamp_us;
                     })->timestamp_us;
  for (auto& p : packets) p.timestamp_us -= first;
}

std::vector<PacketRecord> assign_direction(std::span<const PacketRecord> packets,
                                           const ClientIdentity& client) {
  if (!client.mac && !client.ip) throw InvalidArgumentError("client identity needs a MAC or an IP address");
  std::vector<PacketRecord> out;
  for (const auto& p : packets) {
    bool src = false;
    bool dst = false;
    if (client.mac && p.src_mac && p.dst_mac) {
      src = *p.src_mac == *client.mac;
      dst = *p.dst_mac == *client.mac;
    } else if (client.ip) {
      src = p.src_ip == *client.ip;
      dst = p.dst_ip == *client.ip;
    }
    if (src && dst)
      throw AmbiguousIdentityError("client identity matches both endpoints of a packet at t=" +
                                   std::to_string(p.timestamp_us) + "us");
    if (!src && !dst) continue;
    out.push_back(p);
    out.back().direction = src ? Direction::uplink : Direction::downlink;
  }
  return out;
}

FlowKey FlowKey::canonical(std::string_view ip_a, std::uint16_t port_a, std::string_view ip_b,
                           std::uint16_t port_b, Protocol proto, bool a_is_client) {
  if (a_is_client) return FlowKey{std::string(ip_a), std::string(ip_b), port_a, port_b, proto};
  return FlowKey{std::string(ip_b), std::string(ip_a), port_b, port_a, proto};
}

FlowKey FlowKey::of(const PacketRecord& p) {
  return canonical(p.src_ip, p.src_port, p.dst_ip, p.dst_port, p.proto, p.direction == Direction::uplink);
}

std::vector<FlowRecord> assemble_flows(std::span<const PacketRecord> packets) {
  std::map<FlowKey, std::size_t> index;
  std::vector<FlowRecord> flows;
  for (const auto& p : packets) {
    auto key = FlowKey::of(p);
    auto [it, inserted] = index.try_emplace(key, flows.size());
    if (inserted) {
      FlowRecord f;
      f.key = std::move(key);
      f.start_us = p.timestamp_us;
      f.end_us = p.timestamp_us;
      flows.push_back(std::move(f));
    }
    FlowRecord& f = flows[it->second];
    (p.direction == Direction::downlink ? f.bytes_dl : f.bytes_ul) += p.pkt_len;
    f.start_us = std::min(f.start_us, p.timestamp_us);
    f.end_us = std::max(f.end_us, p.timestamp_us);
    if (f.sni_hint.empty()) f.sni_hint = p.sni_hint;
    f.packets.push_back(p);
  }
  std::sort(flows.begin(), flows.end(), [](const FlowRecord& a, const FlowRecord& b) {
    if (a.bytes_dl != b.bytes_dl) return a.bytes_dl > b.bytes_dl;
    if (a.start_us != b.start_us) return a.start_us < b.start_us;
    return a.key < b.key;
  });
  return flows;
}

std::span<const std::string_view> platform_keywords(Platform p) {
  return p == Platform::yt ? std::span<const std::string_view>(kYtKeywords)
                           : std::span<const std::string_view>(kFbKeywords);
}

std::vector<FlowRecord> filter_video_flows(std::span<const FlowRecord> flows, PlatformFilter platform) {
  std::vector<FlowRecord> out;
  for (const auto& f : flows) {
    if (f.sni_hint.empty()) continue;
    const bool yt = matches_any(f.sni_hint, kYtKeywords);
    const bool fb = matches_any(f.sni_hint, kFbKeywords);
    const bool keep = platform == PlatformFilter::yt ? yt : platform == PlatformFilter::fb ? fb : (yt || fb);
    if (keep) out.push_back(f);
  }
  return out;
}

PlatformFilter to_filter(Platform p) { return p == Platform::yt ? PlatformFilter::yt : PlatformFilter::fb; }

std::vector<PacketRecord> flow_packets(std::span<const FlowRecord> flows) {
  std::vector<PacketRecord> out;
  for (const auto& f : flows) out.insert(out.end(), f.packets.begin(), f.packets.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
  return out;
}

}  // namespace panoclass
