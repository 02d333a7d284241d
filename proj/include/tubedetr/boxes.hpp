#pragma once

#include <array>

namespace tubedetr {

// Normalized (cx, cy, w, h).
using CenterBox = std::array<double, 4>;
// (x1, y1, x2, y2).
using CornerBox = std::array<double, 4>;

CornerBox to_corners(const CenterBox& b);
CenterBox to_center(const CornerBox& b);

double box_area(const CornerBox& b);
double box_iou(const CornerBox& a, const CornerBox& b);
// IoU minus the fraction of the enclosing box not covered by the union.
double generalized_iou(const CornerBox& a, const CornerBox& b);

inline double center_box_iou(const CenterBox& a, const CenterBox& b) { return box_iou(to_corners(a), to_corners(b)); }

}  // namespace tubedetr
