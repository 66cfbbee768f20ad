#include "panoclass/realtime.hpp"

#include <algorithm>

#include "panoclass/errors.hpp"

namespace panoclass {

int mode_vote(std::span<const std::uint8_t> bits, std::optional<int> prev) {
  if (bits.empty()) throw EmptyInputError("mode vote over no predictions");
  const auto ones = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  const std::size_t zeros = bits.size() - ones;
  if (ones > zeros) return 1;
  if (zeros > ones) return 0;
  return prev.value_or(0);
}

std::optional<StreamDecision> push_prediction(StreamState& state, int predicted_label) {
  if (predicted_label != 0 && predicted_label != 1) throw InvalidArgumentError("bin prediction must be 0 or 1");
  state.bin_predictions.push_back(static_cast<std::uint8_t>(predicted_label));
  state.votes_for_1 += predicted_label;
  const std::size_t count = state.bin_predictions.size();
  if (count % kVoteGroupBins != 0) return std::nullopt;

  const int n = static_cast<int>(count / kVoteGroupBins);
  StreamDecision d;
  d.t_s = (n + 1) * kDecisionPeriodS;
  d.label = mode_vote(state.bin_predictions, state.last_label);
  d.votes_for_1 = state.votes_for_1;
  d.votes_total = static_cast<int>(count);
  state.decisions.push_back(d);
  state.last_label = d.label;
  return d;
}

std::optional<StreamDecision> push_bin(StreamState& state, const GbtModel& model, const BinFeatures& bin) {
  if (state.last_window_start_s && bin.window_start_s != *state.last_window_start_s + 1)
    throw OrderingError("bin with window_start_s=" + std::to_string(bin.window_start_s) +
                        " does not follow " + std::to_string(*state.last_window_start_s));
  const auto row = bin.values();
  const int label = predict_proba(model, std::span<const double>(row)) >= 0.5 ? 1 : 0;
  state.last_window_start_s = bin.window_start_s;
  return push_prediction(state, label);
}

std::vector<StreamDecision> classify_stream(const GbtModel& model, std::span<const BinFeatures> bins,
                                            int stop_s, int window_s) {
  StreamState state;
  for (const auto& b : bins) {
    if (b.window_start_s + window_s > stop_s) break;
    push_bin(state, model, b);
  }
  auto out = std::move(state.decisions);
  std::erase_if(out, [&](const StreamDecision& d) { return d.t_s > stop_s; });
  return out;
}

}  // namespace panoclass
