#pragma once

#include <string>
#include <vector>

#include "tubedetr/inference.hpp"

namespace tubedetr {

// (1/|S_u|) * sum over t in S_i of IoU(pred_t, gt_t), with S_u / S_i the union /
// intersection of the two inclusive frame spans.
double viou(const Tube& predicted, const Tube& ground_truth);
// |S_i| / |S_u| of the inclusive spans.
double tiou(const Tube& predicted, const Tube& ground_truth);
// Mean box IoU over the ground-truth span, using the predicted box of every
// frame (predicted times are ignored). all_boxes covers all T frames.
double siou(const std::vector<CenterBox>& all_boxes, const Tube& ground_truth);

struct SampleMetrics {
  double viou = 0.0;
  double tiou = 0.0;
  double siou = 0.0;
};

SampleMetrics evaluate_sample(const Tube& predicted, const std::vector<CenterBox>& all_boxes,
                              const Tube& ground_truth);

struct MetricReport {
  double m_viou = 0.0;
  double viou_at_03 = 0.0;  // fraction of samples with vIoU > 0.3
  double viou_at_05 = 0.0;  // fraction with vIoU > 0.5
  double m_tiou = 0.0;
  double m_siou = 0.0;
  std::vector<double> per_sample_viou;

  std::size_t samples() const { return per_sample_viou.size(); }
  std::string to_json() const;
};

MetricReport aggregate_metrics(const std::vector<SampleMetrics>& samples);

}  // namespace tubedetr
