#include "tubedetr/inference.hpp"

#include <stdexcept>
#include <string>

#include "tubedetr/errors.hpp"

namespace tubedetr {

std::pair<std::size_t, std::size_t> joint_start_end_argmax(std::span<const double> start,
                                                            std::span<const double> end) {
  const std::size_t T = start.size();
  if (end.size() != T) throw DimensionError("decode: start/end distributions differ in length");
  if (T < 2) throw std::invalid_argument("decode: need T >= 2 for a span with t_e > t_s, got T=" + std::to_string(T));
  // Single sweep: for each end j the best start is the first maximizer of
  // start[0..j-1], which only moves right as j grows, so strict comparisons
  // implement the (smallest i, smallest j) tie rule.
  std::size_t best_prefix = 0;
  std::size_t best_i = 0, best_j = 1;
  double best = start[0] * end[1];
  for (std::size_t j = 1; j < T; ++j) {
    if (start[j - 1] > start[best_prefix]) best_prefix = j - 1;
    const double score = start[best_prefix] * end[j];
    if (score > best) {
      best = score;
      best_i = best_prefix;
      best_j = j;
    }
  }
  return {best_i, best_j};
}

std::vector<CenterBox> boxes_from_tensor(const Tensor& boxes) {
  if (boxes.rank() != 2 || boxes.dim(1) != 4) throw DimensionError("boxes must be [T, 4], got " + to_string(boxes.shape()));
  std::vector<CenterBox> out(boxes.dim(0));
  const auto d = boxes.data();
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = {d[4 * t], d[4 * t + 1], d[4 * t + 2], d[4 * t + 3]};
  return out;
}

DecodedTube decode_tube(const TubePrediction& prediction) {
  const auto [ts, te] = joint_start_end_argmax(prediction.start_prob.data(), prediction.end_prob.data());
  const auto all = boxes_from_tensor(prediction.boxes);
  DecodedTube tube;
  tube.t_start = ts;
  tube.t_end = te;
  tube.boxes.assign(all.begin() + static_cast<std::ptrdiff_t>(ts), all.begin() + static_cast<std::ptrdiff_t>(te) + 1);
  return tube;
}

}  // namespace tubedetr
