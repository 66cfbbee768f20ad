#include "panoclass/pkt_features.hpp"

#include <algorithm>
#include <cmath>

#include "panoclass/errors.hpp"
#include "panoclass/text.hpp"

namespace panoclass {
namespace {

constexpr std::int64_t kUsPerS = 1'000'000;

}  // namespace

std::array<double, kBinFeatureCount> BinFeatures::values() const {
  return {static_cast<double>(ul_frame_len_total), static_cast<double>(dl_pkt_size_total),
          static_cast<double>(dl_tcp_hdr_total),   static_cast<double>(dl_pkt_count),
          dl_pkt_size_mean,                        dl_pkt_size_min,
          dl_pkt_size_max,                         dl_pkt_size_std};
}

const std::array<std::string, kBinFeatureCount>& bin_feature_names() {
  static const std::array<std::string, kBinFeatureCount> names{
      "ul_frame_len_total", "dl_pkt_size_total", "dl_tcp_hdr_total", "dl_pkt_count",
      "dl_pkt_size_mean",   "dl_pkt_size_min",   "dl_pkt_size_max",  "dl_pkt_size_std"};
  return names;
}

const std::array<std::string, kSummaryStatCount>& summary_stat_names() {
  static const std::array<std::string, kSummaryStatCount> names{"mean", "std", "min", "max",
                                                                "p25",  "p50", "p75"};
  return names;
}

const std::vector<std::string>& packet_summary_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : bin_feature_names())
      for (const auto& s : summary_stat_names()) out.push_back(f + "_" + s);
    return out;
  }();
  return names;
}

std::size_t expected_bin_count(std::int64_t duration_us, const BinningConfig& cfg) {
  const std::int64_t duration_s = (std::max<std::int64_t>(duration_us, 0) + kUsPerS - 1) / kUsPerS;
  const std::int64_t limit = std::min<std::int64_t>(cfg.interval_s, duration_s);
  if (limit < cfg.window_s) return 0;
  return static_cast<std::size_t>((limit - cfg.window_s) / cfg.step_s + 1);
}

std::vector<BinFeatures> bin_packets(std::span<const PacketRecord> packets, const BinningConfig& cfg) {
  return bin_packets(packets, cfg, packets.empty() ? 0 : packets.back().timestamp_us);
}

std::vector<BinFeatures> bin_packets(std::span<const PacketRecord> packets, const BinningConfig& cfg,
                                     std::int64_t duration_us) {
  if (cfg.window_s < 1 || cfg.step_s < 1)
    throw InvalidArgumentError("window and step must be at least 1 second");
  if (cfg.interval_s < cfg.window_s)
    throw InvalidArgumentError("invalid interval: " + std::to_string(cfg.interval_s) +
                               "s is shorter than the " + std::to_string(cfg.window_s) + "s window");
  const std::size_t n = expected_bin_count(duration_us, cfg);
  std::vector<BinFeatures> bins;
  bins.reserve(n);
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t start = static_cast<std::int64_t>(i) * cfg.step_s * kUsPerS;
    const std::int64_t end = start + static_cast<std::int64_t>(cfg.window_s) * kUsPerS;
    while (lo < packets.size() && packets[lo].timestamp_us < start) ++lo;
    hi = std::max(hi, lo);
    while (hi < packets.size() && packets[hi].timestamp_us < end) ++hi;
    BinFeatures b = compute_bin_features(packets.subspan(lo, hi - lo));
    b.window_start_s = static_cast<std::int64_t>(i) * cfg.step_s;
    bins.push_back(b);
  }
  return bins;
}

__extension__ typedef unsigned __int128 u128;

BinFeatures compute_bin_features(std::span<const PacketRecord> packets) {
  BinFeatures b;
  u128 sumsq = 0;
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  for (const auto& p : packets) {
    if (p.direction == Direction::uplink) {
      b.ul_frame_len_total += p.frame_len;
      continue;
    }
    if (b.dl_pkt_count == 0) {
      lo = hi = p.pkt_len;
    } else {
      lo = std::min(lo, p.pkt_len);
      hi = std::max(hi, p.pkt_len);
    }
    ++b.dl_pkt_count;
    b.dl_pkt_size_total += p.pkt_len;
    b.dl_tcp_hdr_total += p.tcp_hdr_len;
    sumsq += static_cast<u128>(p.pkt_len) * p.pkt_len;
  }
  if (b.dl_pkt_count > 0) {
    const auto n = static_cast<u128>(b.dl_pkt_count);
    const auto sum = static_cast<u128>(b.dl_pkt_size_total);
    // n^2 * variance, exact in integers.
    const u128 scaled_var = n * sumsq - sum * sum;
    const double nd = static_cast<double>(b.dl_pkt_count);
    b.dl_pkt_size_mean = static_cast<double>(b.dl_pkt_size_total) / nd;
    b.dl_pkt_size_min = lo;
    b.dl_pkt_size_max = hi;
    b.dl_pkt_size_std = std::sqrt(static_cast<double>(scaled_var)) / nd;
  }
  return b;
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptyInputError("percentile of an empty set");
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(rank));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(below);
  return sorted[below] + (sorted[above] - sorted[below]) * frac;
}

FeatureVector summarize_bins(std::span<const BinFeatures> bins) {
  if (bins.empty()) throw EmptyInputError("cannot summarize an empty bin list");
  FeatureVector fv;
  fv.names = packet_summary_feature_names();
  fv.values.reserve(kPacketSummaryFeatureCount);
  const double n = static_cast<double>(bins.size());
  std::vector<double> col(bins.size());
  for (std::size_t f = 0; f < kBinFeatureCount; ++f) {
    for (std::size_t i = 0; i < bins.size(); ++i) col[i] = bins[i].values()[f];
    std::sort(col.begin(), col.end());
    double sum = 0.0;
    for (double v : col) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    fv.values.push_back(mean);
    fv.values.push_back(std::sqrt(ss / n));
    fv.values.push_back(col.front());
    fv.values.push_back(col.back());
    fv.values.push_back(percentile_sorted(col, 0.25));
    fv.values.push_back(percentile_sorted(col, 0.50));
    fv.values.push_back(percentile_sorted(col, 0.75));
  }
  return fv;
}

FeatureVector bin_vector(const BinFeatures& bin) {
  FeatureVector fv;
  const auto& names = bin_feature_names();
  fv.names.assign(names.begin(), names.end());
  const auto v = bin.values();
  fv.values.assign(v.begin(), v.end());
  return fv;
}

std::string write_bin_csv(std::span<const TraceBins> traces, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "trace_id,window_start_s";
  for (const auto& n : bin_feature_names()) out += "," + n;
  out += '\n';
  for (const auto& t : traces) {
    for (const auto& b : t.bins) {
      out += t.trace_id;
      out += ',' + std::to_string(b.window_start_s);
      out += ',' + std::to_string(b.ul_frame_len_total);
      out += ',' + std::to_string(b.dl_pkt_size_total);
      out += ',' + std::to_string(b.dl_tcp_hdr_total);
      out += ',' + std::to_string(b.dl_pkt_count);
      for (double v : {b.dl_pkt_size_mean, b.dl_pkt_size_min, b.dl_pkt_size_max, b.dl_pkt_size_std})
        out += ',' + text::format_double(v);
      out += '\n';
    }
  }
  return out;
}

std::vector<TraceBins> read_bin_csv(std::string_view csv) {
  text::LineReader reader(csv);
  std::string_view line;
  std::size_t off = 0;
  if (!reader.next(line, off)) throw ParseError("missing bin CSV header", 0);
  std::string expected = "trace_id,window_start_s";
  for (const auto& n : bin_feature_names()) expected += "," + n;
  if (line != expected) throw ParseError("unexpected bin CSV header", off);
  std::vector<TraceBins> out;
  while (reader.next(line, off)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != 2 + kBinFeatureCount) throw ParseError("wrong field count in bin CSV", off);
    try {
      BinFeatures b;
      b.window_start_s = text::parse_int(f[1]);
      b.ul_frame_len_total = text::parse_uint(f[2]);
      b.dl_pkt_size_total = text::parse_uint(f[3]);
      b.dl_tcp_hdr_total = text::parse_uint(f[4]);
      b.dl_pkt_count = text::parse_uint(f[5]);
      b.dl_pkt_size_mean = text::parse_double(f[6]);
      b.dl_pkt_size_min = text::parse_double(f[7]);
      b.dl_pkt_size_max = text::parse_double(f[8]);
      b.dl_pkt_size_std = text::parse_double(f[9]);
      if (out.empty() || out.back().trace_id != f[0]) out.push_back(TraceBins{std::string(f[0]), {}});
      out.back().bins.push_back(b);
    } catch (const InvalidArgumentError& e) {
      throw ParseError(std::string("bin CSV: ") + e.what(), off);
    }
  }
  return out;
}

}  // namespace panoclass
