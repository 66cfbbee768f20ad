#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panoclass/types.hpp"

namespace panoclass {

// Parameters of one synthetic video session. `separability` scales every
// class-dependent difference; at 0 both labels draw from identical
// distributions.
struct SynthParams {
  Platform platform = Platform::yt;
  int label = 0;
  int duration_s = 120;
  double base_rate_Bps = 100'000.0;
  double separability = 0.5;
  std::uint64_t seed = 1;
  int n_side_flows = 3;
  // Per-video bitrate multiplier shared by all traces of one video.
  double content_factor = 1.0;

  void validate() const;  // throws InvalidArgumentError
};

// One dominant video flow (YT: UDP/QUIC, FB: TCP) plus n_side_flows small
// flows. 360 sessions download at base_rate * (1 + separability) until the
// end; normal sessions finish early and go quiet. Secondary class cues, all
// scaled by separability: 360 uses shorter segments with extra tile requests
// and tighter packet sizes, normal front-loads its buffer at startup.
// Output is time-sorted, starts at t = 0 and is a pure function of the
// parameters.
std::vector<PacketRecord> generate_trace(const SynthParams& p);

struct SynthTraceSpec {
  std::string trace_id;
  std::string video_id;
  SynthParams params;
};

struct SynthTrace {
  SynthTraceSpec spec;
  std::vector<PacketRecord> packets;
};

// Trace descriptions for n_per_class traces per label. Every
// `traces_per_video` consecutive traces of a label share a video_id and its
// content factor. `template_params` supplies platform, duration, rate,
// separability and side-flow count; label, seed and content factor are set
// per trace.
std::vector<SynthTraceSpec> plan_dataset(int n_per_class, const SynthParams& template_params,
                                         std::uint64_t seed, int traces_per_video = 1);

std::vector<SynthTrace> generate_dataset(int n_per_class, const SynthParams& template_params,
                                         std::uint64_t seed, int traces_per_video = 1);

}  // namespace panoclass
