#include "tubedetr/boxes.hpp"

#include <algorithm>

namespace tubedetr {

CornerBox to_corners(const CenterBox& b) {
  return {b[0] - 0.5 * b[2], b[1] - 0.5 * b[3], b[0] + 0.5 * b[2], b[1] + 0.5 * b[3]};
}

CenterBox to_center(const CornerBox& b) {
  return {0.5 * (b[0] + b[2]), 0.5 * (b[1] + b[3]), b[2] - b[0], b[3] - b[1]};
}

double box_area(const CornerBox& b) { return std::max(0.0, b[2] - b[0]) * std::max(0.0, b[3] - b[1]); }

static double intersection(const CornerBox& a, const CornerBox& b) {
  const double w = std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const double h = std::min(a[3], b[3]) - std::max(a[1], b[1]);
  return std::max(0.0, w) * std::max(0.0, h);
}

double box_iou(const CornerBox& a, const CornerBox& b) {
  const double inter = intersection(a, b);
  const double uni = box_area(a) + box_area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}


double generalized_iou(const CornerBox& a, const CornerBox& b) {
  const double inter = intersection(a, b);
  const double uni = box_area(a) + box_area(b) - inter;
  const double hull = (std::max(a[2], b[2]) - std::min(a[0], b[0])) * (std::max(a[3], b[3]) - std::min(a[1], b[1]));
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  return hull > 0.0 ? iou - (hull - uni) / hull : iou;
}

}  // namespace tubedetr
