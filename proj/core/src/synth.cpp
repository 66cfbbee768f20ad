#include "panoclass/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "panoclass/errors.hpp"
#include "panoclass/rng.hpp"

namespace panoclass {
namespace {

constexpr std::uint32_t kEthIpOverhead = 14 + 20;
constexpr std::uint32_t kMinFrame = 60;
constexpr std::uint32_t kTcpHdr = 32;  // with timestamp option
constexpr std::uint32_t kUdpHdr = 8;
constexpr std::uint32_t kQuicMaxPayload = 1350;
constexpr std::uint32_t kTcpMaxPayload = 1448;

constexpr std::array<std::string_view, 5> kYtSideHosts{"www.youtube.com", "i.ytimg.com",
                                                       "www.google-analytics.com",
                                                       "googleads.g.doubleclick.net", "play.googleapis.com"};
constexpr std::array<std::string_view, 5> kFbSideHosts{"graph.facebook.com", "scontent.xx.fbcdn.net",
                                                       "connect.facebook.net", "app-measurement.com",
                                                       "www.google-analytics.com"};

struct Event {
  PacketRecord rec;
  std::uint64_t order;
};

// Accumulates packets of one flow with consistent addressing and sequence numbers.
class FlowWriter {
 public:
  FlowWriter(std::vector<Event>& sink, std::uint64_t& counter, std::string client_ip, std::uint16_t client_port,
             std::string server_ip, std::uint16_t server_port, Protocol proto, std::string sni, Rng& rng)
      : sink_(sink),
        counter_(counter),
        client_ip_(std::move(client_ip)),
        server_ip_(std::move(server_ip)),
        client_port_(client_port),
        server_port_(server_port),
        proto_(proto),
        sni_(std::move(sni)),
        seq_ul_(static_cast<std::uint32_t>(rng.next())),
        seq_dl_(static_cast<std::uint32_t>(rng.next())) {}

  // Emits one packet carrying `payload` application bytes at time `t_s`.
  void emit(double t_s, Direction dir, std::uint32_t payload) {
    PacketRecord r;
    r.timestamp_us = std::llround(t_s * 1e6);
    r.direction = dir;
    r.proto = proto_;
    const bool up = dir == Direction::uplink;
    r.src_ip = up ? client_ip_ : server_ip_;
    r.dst_ip = up ? server_ip_ : client_ip_;
    r.src_port = up ? client_port_ : server_port_;
    r.dst_port = up ? server_port_ : client_port_;
    if (proto_ == Protocol::tcp) {
      r.tcp_hdr_len = kTcpHdr;
      r.pkt_len = kTcpHdr + payload;
      std::uint32_t& seq = up ? seq_ul_ : seq_dl_;
      r.tcp_seq = seq;
      seq += payload;
      last_seq_ = *r.tcp_seq;
    } else {
      r.pkt_len = kUdpHdr + payload;
    }
    r.frame_len = std::max(kMinFrame, kEthIpOverhead + r.pkt_len);
    if (!first_emitted_) {
      r.sni_hint = sni_;
      first_emitted_ = true;
    }
    last_payload_ = payload;
    sink_.push_back(Event{std::move(r), counter_++});
  }

  // Re-sends the previous downlink TCP segment (same sequence number and length).
  void retransmit_last(double t_s) {
    PacketRecord r = sink_.back().rec;
    r.timestamp_us = std::llround(t_s * 1e6);
    r.sni_hint.clear();
    r.tcp_seq = last_seq_;
    r.pkt_len = kTcpHdr + last_payload_;
    r.frame_len = std::max(kMinFrame, kEthIpOverhead + r.pkt_len);
    sink_.push_back(Event{std::move(r), counter_++});
  }

  Protocol proto() const { return proto_; }

 private:
  std::vector<Event>& sink_;
  std::uint64_t& counter_;
  std::string client_ip_;
  std::string server_ip_;
  std::uint16_t client_port_;
  std::uint16_t server_port_;
  Protocol proto_;
  std::string sni_;
  std::uint32_t seq_ul_;
  std::uint32_t seq_dl_;
  std::uint32_t last_seq_ = 0;
  std::uint32_t last_payload_ = 0;
  bool first_emitted_ = false;
};

std::string ipv4(int a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%d.%llu.%llu.%llu", a, static_cast<unsigned long long>(b),
                static_cast<unsigned long long>(c), static_cast<unsigned long long>(d));
  return buf;
}

std::string server_ip(Rng& rng, int first_octet, int second_octet) {
  return ipv4(first_octet, static_cast<std::uint64_t>(second_octet), rng.below(256), 1 + rng.below(254));
}

std::string video_host(Platform platform, Rng& rng) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string tag;
  for (int i = 0; i < 8; ++i) tag.push_back(kAlphabet[rng.below(sizeof kAlphabet - 1)]);
  if (platform == Platform::yt) return "r" + std::to_string(1 + rng.below(9)) + "---sn-" + tag + ".googlevideo.com";
  return "video.f" + tag + "-1.fna.fbcdn.net";
}

}  // namespace

void SynthParams::validate() const {
  if (label != 0 && label != 1) throw InvalidArgumentError("label must be 0 or 1");
  if (duration_s < 30) throw InvalidArgumentError("duration_s must be at least 30");
  if (!(base_rate_Bps > 0.0)) throw InvalidArgumentError("base_rate_Bps must be positive");
  if (!(separability >= 0.0 && separability <= 1.0)) throw InvalidArgumentError("separability must be in [0, 1]");
  if (n_side_flows < 0) throw InvalidArgumentError("n_side_flows must be non-negative");
  if (!(content_factor > 0.0)) throw InvalidArgumentError("content_factor must be positive");
}

std::vector<PacketRecord> generate_trace(const SynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  const double sep = p.separability;
  const double is360 = p.label;
  const double duration = p.duration_s;
  const bool fb = p.platform == Platform::fb;

  // Session conditions, drawn independently of the label.
  const double net_factor = rng.uniform(0.75, 1.3);
  const double completion = rng.uniform(0.6, 0.7);
  const double startup_s = rng.uniform(8.0, 12.0);
  const double segment_base_s = rng.uniform(1.6, 2.4);
  const double rtt_s = rng.uniform(0.02, 0.06);
  const double size_offset = rng.uniform(40.0, 140.0);
  const double size_sd = rng.uniform(70.0, 190.0);
  // Tunnels and middleboxes shrink the usable segment size per path.
  const auto path_cut = static_cast<std::uint32_t>(rng.below(241));
  const std::string client_ip = ipv4(10, rng.below(256), rng.below(256), 2 + rng.below(250));

  // Class-dependent shape, every difference scaled by separability.
  // Secondary cues grow quadratically, so they matter mostly at high separability.
  const double cue = 1.5 * sep * sep;
  const double rate = p.base_rate_Bps * p.content_factor * net_factor * (1.0 + sep * is360);
  const double stop_s = duration * (1.0 - sep * (1.0 - is360) * (1.0 - completion));
  // Normal players fill a deep buffer at startup; 360 players keep it short.
  const double startup_boost = (fb ? 2.5 : 2.0) + cue * (1.0 - is360);
  const std::uint32_t max_payload = (fb ? kTcpMaxPayload : kQuicMaxPayload) - path_cut;
  const double size_mu = std::min<double>(max_payload, max_payload - size_offset + 60.0 * cue * is360);
  const double size_spread = size_sd * (1.0 - 0.4 * cue * is360);
  const double link_Bps = std::max(1.2e6 * net_factor, rate * startup_boost * 1.5);
  const int ack_every = fb ? 2 : 4;
  // Tiled 360 players fetch smaller segments more often.
  const double segment_s = segment_base_s / (1.0 + 1.2 * cue * is360);
  const int tile_requests = static_cast<int>(std::lround(5.0 * cue * is360));

  std::vector<Event> events;
  std::uint64_t counter = 0;

  FlowWriter video(events, counter, client_ip, static_cast<std::uint16_t>(30000 + rng.below(30000)),
                   server_ip(rng, fb ? 157 : 172, fb ? 240 : 217), 443, fb ? Protocol::tcp : Protocol::udp,
                   video_host(p.platform, rng), rng);

  const auto ack_payload = [&]() -> std::uint32_t {
    return fb ? 0u : static_cast<std::uint32_t>(30 + rng.below(31));
  };

  double seg_start = 0.0;
  while (seg_start < stop_s) {
    const double r = seg_start < startup_s ? rate * startup_boost : rate;
    double remaining = r * segment_s * rng.uniform(0.85, 1.15);
    video.emit(seg_start, Direction::uplink, static_cast<std::uint32_t>(250 + rng.below(351)));
    const int extra_requests = static_cast<int>(rng.below(3)) + tile_requests;
    for (int q = 0; q < extra_requests; ++q)
      video.emit(seg_start + 0.001 * (q + 1), Direction::uplink, static_cast<std::uint32_t>(150 + rng.below(201)));
    double t = seg_start + rtt_s;
    int since_ack = 0;
    while (remaining > 0.0 && t < duration) {
      double draw = std::round(rng.normal(size_mu, size_spread));
      draw = std::clamp(draw, 200.0, static_cast<double>(max_payload));
      auto payload = static_cast<std::uint32_t>(draw);
      if (payload > remaining) payload = static_cast<std::uint32_t>(std::max(50.0, std::ceil(remaining)));
      video.emit(t, Direction::downlink, payload);
      const bool resend = rng.bernoulli(0.003);
      if (resend && fb) video.retransmit_last(t + rtt_s);
      remaining -= payload;
      if (++since_ack == ack_every) {
        video.emit(t + 0.0004, Direction::uplink, ack_payload());
        since_ack = 0;
      }
      t += (payload + 60.0) / link_Bps * rng.uniform(0.7, 1.3);
    }
    seg_start += segment_s;
  }
  // Finished downloads leave only occasional keep-alive traffic.
  for (double t = seg_start + rng.uniform(3.0, 6.0); t < duration; t += rng.uniform(4.0, 6.0)) {
    video.emit(t, Direction::downlink, static_cast<std::uint32_t>(30 + rng.below(40)));
    video.emit(t + rtt_s, Direction::uplink, ack_payload());
  }
  // The capture stops with a final player report just before the end.
  const double last_s = duration - rng.uniform(0.1, 0.6);
  video.emit(last_s, Direction::uplink, static_cast<std::uint32_t>(100 + rng.below(200)));

  for (int j = 0; j < p.n_side_flows; ++j) {
    const auto& hosts = fb ? kFbSideHosts : kYtSideHosts;
    const std::string host = j == 0 ? video_host(p.platform, rng) : std::string(hosts[rng.below(hosts.size())]);
    FlowWriter side(events, counter, client_ip, static_cast<std::uint16_t>(30000 + rng.below(30000)),
                    server_ip(rng, j == 0 ? (fb ? 157 : 172) : 142, j == 0 ? (fb ? 240 : 217) : 250), 443,
                    Protocol::tcp, host, rng);
    if (j == 0) {
      // Audio-like secondary media stream.
      const double audio_rate = 16e3 * rng.uniform(0.8, 1.2);
      for (double t = rng.uniform(0.1, 1.0); t < duration - 1.0; t += 5.0) {
        side.emit(t, Direction::uplink, static_cast<std::uint32_t>(200 + rng.below(200)));
        double remaining = audio_rate * 5.0;
        double u = t + rtt_s;
        int since_ack = 0;
        while (remaining > 0.0 && u < duration) {
          const auto payload = static_cast<std::uint32_t>(std::min<double>(kTcpMaxPayload, std::ceil(remaining)));
          side.emit(u, Direction::downlink, payload);
          remaining -= payload;
          if (++since_ack == 2) {
            side.emit(u + 0.0004, Direction::uplink, 0);
            since_ack = 0;
          }
          u += (payload + 60.0) / link_Bps;
        }
      }
      continue;
    }
    const int exchanges = 2 + static_cast<int>(rng.below(7));
    double t = rng.uniform(0.2, duration * 0.5);
    for (int e = 0; e < exchanges && t < duration - 1.0; ++e) {
      side.emit(t, Direction::uplink, static_cast<std::uint32_t>(300 + rng.below(601)));
      const int responses = 1 + static_cast<int>(rng.below(15));
      double u = t + rtt_s;
      for (int k = 0; k < responses && u < duration; ++k) {
        side.emit(u, Direction::downlink, static_cast<std::uint32_t>(200 + rng.below(kTcpMaxPayload - 199)));
        u += 0.002;
      }
      side.emit(u, Direction::uplink, 0);
      t += rng.uniform(2.0, 20.0);
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.rec.timestamp_us != b.rec.timestamp_us) return a.rec.timestamp_us < b.rec.timestamp_us;
    return a.order < b.order;
  });
  std::vector<PacketRecord> out;
  out.reserve(events.size());
  for (auto& e : events) out.push_back(std::move(e.rec));
  return out;
}

std::vector<SynthTraceSpec> plan_dataset(int n_per_class, const SynthParams& template_params, std::uint64_t seed,
                                         int traces_per_video) {
  if (n_per_class < 1) throw InvalidArgumentError("n_per_class must be at least 1");
  if (traces_per_video < 1) throw InvalidArgumentError("traces_per_video must be at least 1");
  template_params.validate();
  const std::string prefix = template_params.platform == Platform::yt ? "yt" : "fb";
  std::vector<SynthTraceSpec> out;
  for (int label = 0; label <= 1; ++label) {
    const std::string cls = label == 1 ? "360" : "nor";
    for (int i = 0; i < n_per_class; ++i) {
      const int video = i / traces_per_video;
      char vid[64];
      std::snprintf(vid, sizeof vid, "%s-%s-v%03d", prefix.c_str(), cls.c_str(), video);
      SynthTraceSpec s;
      s.video_id = vid;
      s.trace_id = s.video_id + "-t" + std::to_string(i % traces_per_video);
      s.params = template_params;
      s.params.label = label;
      const auto platform_tag = static_cast<std::uint64_t>(template_params.platform);
      Rng content(Rng::derive(seed, 1'000'000 + platform_tag * 100'000 + static_cast<std::uint64_t>(label) * 10'000 +
                                        static_cast<std::uint64_t>(video)));
      // A quarter of the videos are high-motion content with a much higher bitrate.
      const bool high_motion = content.uniform() < 0.25;
      s.params.content_factor = high_motion ? content.uniform(1.5, 1.9) : content.uniform(0.8, 1.2);
      s.params.seed = Rng::derive(seed, platform_tag * 100'000 + static_cast<std::uint64_t>(label) * 10'000 +
                                            static_cast<std::uint64_t>(i),
                                  7);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<SynthTrace> generate_dataset(int n_per_class, const SynthParams& template_params, std::uint64_t seed,
                                         int traces_per_video) {
  std::vector<SynthTrace> out;
  for (auto& spec : plan_dataset(n_per_class, template_params, seed, traces_per_video)) {
    SynthTrace t;
    t.packets = generate_trace(spec.params);
    t.spec = std::move(spec);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace panoclass
