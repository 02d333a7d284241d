#include "tubedetr/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace tubedetr {

namespace {

void check_tube(const Tube& t, const char* what) {
  if (t.t_end < t.t_start || t.boxes.size() != t.length()) {
    throw std::invalid_argument(std::string(what) + ": tube span and box count disagree");
  }
}

}  // namespace

double viou(const Tube& predicted, const Tube& ground_truth) {
  check_tube(predicted, "viou predicted");
  check_tube(ground_truth, "viou ground truth");
  const std::size_t inter_lo = std::max(predicted.t_start, ground_truth.t_start);
  const std::size_t inter_hi = std::min(predicted.t_end, ground_truth.t_end);
  if (inter_lo > inter_hi) return 0.0;
  const std::size_t union_size = predicted.length() + ground_truth.length() - (inter_hi - inter_lo + 1);
  double total = 0.0;
  for (std::size_t t = inter_lo; t <= inter_hi; ++t) {
    total += center_box_iou(predicted.boxes[t - predicted.t_start], ground_truth.boxes[t - ground_truth.t_start]);
  }
  return total / static_cast<double>(union_size);
}

double tiou(const Tube& predicted, const Tube& ground_truth) {
  const std::size_t inter_lo = std::max(predicted.t_start, ground_truth.t_start);
  const std::size_t inter_hi = std::min(predicted.t_end, ground_truth.t_end);
  if (inter_lo > inter_hi) return 0.0;
  const std::size_t inter = inter_hi - inter_lo + 1;
  const std::size_t uni = predicted.length() + ground_truth.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double siou(const std::vector<CenterBox>& all_boxes, const Tube& ground_truth) {
  check_tube(ground_truth, "siou ground truth");
  if (ground_truth.t_end >= all_boxes.size()) throw std::invalid_argument("siou: ground-truth span exceeds video");
  double total = 0.0;
  for (std::size_t t = ground_truth.t_start; t <= ground_truth.t_end; ++t) {
    total += center_box_iou(all_boxes[t], ground_truth.boxes[t - ground_truth.t_start]);
  }
  return total / static_cast<double>(ground_truth.length());
}

SampleMetrics evaluate_sample(const Tube& predicted, const std::vector<CenterBox>& all_boxes,
                              const Tube& ground_truth) {
  return {viou(predicted, ground_truth), tiou(predicted, ground_truth), siou(all_boxes, ground_truth)};
}

MetricReport aggregate_metrics(const std::vector<SampleMetrics>& samples) {
  MetricReport r;
  if (samples.empty()) return r;
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    r.per_sample_viou.push_back(s.viou);
    r.m_viou += s.viou;
    r.m_tiou += s.tiou;
    r.m_siou += s.siou;
    if (s.viou > 0.3) r.viou_at_03 += 1.0;
    if (s.viou > 0.5) r.viou_at_05 += 1.0;
  }
  r.m_viou /= n;
  r.m_tiou /= n;
  r.m_siou /= n;
  r.viou_at_03 /= n;
  r.viou_at_05 /= n;
  return r;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["m_viou"] = m_viou;
  j["viou_at"] = {{"0.3", viou_at_03}, {"0.5", viou_at_05}};
  j["m_tiou"] = m_tiou;
  j["m_siou"] = m_siou;
  j["n_samples"] = samples();
  return j.dump(2);
}

}  // namespace tubedetr
