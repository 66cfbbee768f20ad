#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panoclass/gbt.hpp"
#include "panoclass/pkt_features.hpp"

namespace panoclass {

// Decisions are taken every kVoteGroupBins bins; the n-th decision (n >= 1)
// is stamped t = (n + 1) * kDecisionPeriodS seconds.
inline constexpr int kVoteGroupBins = 5;
inline constexpr int kDecisionPeriodS = 5;

struct StreamDecision {
  int t_s = 0;
  int label = 0;
  int votes_for_1 = 0;
  int votes_total = 0;

  bool operator==(const StreamDecision&) const = default;
};

// Per-session state; single owner.
struct StreamState {
  std::vector<std::uint8_t> bin_predictions;
  std::vector<StreamDecision> decisions;
  std::optional<int> last_label;
  std::optional<std::int64_t> last_window_start_s;
  int votes_for_1 = 0;
};

// Majority of `bits`; exact ties return `prev`, or 0 without one.
int mode_vote(std::span<const std::uint8_t> bits, std::optional<int> prev);

// Appends an externally computed bin prediction; returns a decision when the
// prediction count reaches the next multiple of kVoteGroupBins.
std::optional<StreamDecision> push_prediction(StreamState& state, int predicted_label);

// Classifies `bin` with `model` and feeds the label to push_prediction. Bins
// must arrive one per second (window_start_s = previous + 1), else OrderingError.
std::optional<StreamDecision> push_bin(StreamState& state, const GbtModel& model,
                                       const BinFeatures& bin);

// Replays bins that complete by stop_s (window_start_s + window_s <= stop_s)
// and returns the decisions stamped at or before stop_s.
std::vector<StreamDecision> classify_stream(const GbtModel& model, std::span<const BinFeatures> bins,
                                            int stop_s = 120, int window_s = 5);

}  // namespace panoclass
