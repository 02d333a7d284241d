#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "tubedetr/inference.hpp"

namespace tubedetr::testing {

// Enumerates every pair i < j; the first maximum in (i, j) lexicographic order wins.
inline std::pair<std::size_t, std::size_t> brute_force_argmax(const std::vector<double>& s,
                                                              const std::vector<double>& e) {
  std::pair<std::size_t, std::size_t> best{0, 1};
  double best_score = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j)
      if (s[i] * e[j] > best_score) {
        best_score = s[i] * e[j];
        best = {i, j};
      }
  return best;
}

// IoU of two center boxes computed by explicit interval arithmetic.
inline double oracle_box_iou(const CenterBox& a, const CenterBox& b) {
  const double ax1 = a[0] - a[2] / 2, ax2 = a[0] + a[2] / 2, ay1 = a[1] - a[3] / 2, ay2 = a[1] + a[3] / 2;
  const double bx1 = b[0] - b[2] / 2, bx2 = b[0] + b[2] / 2, by1 = b[1] - b[3] / 2, by2 = b[1] + b[3] / 2;
  const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
  const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
  const double inter = iw * ih;
  const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct OracleScores {
  double viou, tiou, siou;
};

// Frame-by-frame enumeration over 0..frames-1 using explicit frame sets.
inline OracleScores oracle_scores(const Tube& pred, const std::vector<CenterBox>& all_pred, const Tube& gt,
                                  std::size_t frames) {
  std::set<std::size_t> sp, sg, su, si;
  for (std::size_t t = pred.t_start; t <= pred.t_end; ++t) sp.insert(t);
  for (std::size_t t = gt.t_start; t <= gt.t_end; ++t) sg.insert(t);
  for (std::size_t t = 0; t < frames; ++t) {
    if (sp.count(t) || sg.count(t)) su.insert(t);
    if (sp.count(t) && sg.count(t)) si.insert(t);
  }
  double sum = 0.0;
  for (std::size_t t : si) sum += oracle_box_iou(pred.boxes[t - pred.t_start], gt.boxes[t - gt.t_start]);
  double s = 0.0;
  for (std::size_t t : sg) s += oracle_box_iou(all_pred[t], gt.boxes[t - gt.t_start]);
  return {sum / static_cast<double>(su.size()), static_cast<double>(si.size()) / static_cast<double>(su.size()),
          s / static_cast<double>(sg.size())};
}

}  // namespace tubedetr::testing
