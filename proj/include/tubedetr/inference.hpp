#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tubedetr/boxes.hpp"
#include "tubedetr/heads.hpp"

namespace tubedetr {

/// A tube over the inclusive frame span [t_start, t_end] with one box per frame.
struct Tube {
  std::size_t t_start = 0;
  std::size_t t_end = 0;
  std::vector<CenterBox> boxes;

  std::size_t length() const { return t_end - t_start + 1; }
};

using DecodedTube = Tube;

// argmax over i < j of start[i] * end[j]; ties go to the smallest i, then the
// smallest j. Requires at least two frames.
std::pair<std::size_t, std::size_t> joint_start_end_argmax(std::span<const double> start, std::span<const double> end);

// Chooses the span from the start/end distributions and slices the boxes.
DecodedTube decode_tube(const TubePrediction& prediction);

// Row-major [T, 4] tensor -> per-frame boxes.
std::vector<CenterBox> boxes_from_tensor(const Tensor& boxes);

}  // namespace tubedetr
