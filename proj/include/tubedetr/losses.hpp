#pragma once

#include <vector>

#include "tubedetr/heads.hpp"

namespace tubedetr {

inline constexpr double kLogClamp = 1e-12;

struct LossWeights {
  double l1 = 5.0;
  double giou = 2.0;
  double kl = 10.0;
  double att = 1.0;
};

// Quantized unit-variance Gaussian over [0, T) centered at `center`.
std::vector<double> build_target_distribution(std::size_t center, std::size_t frames);

/// Annotated tube over [t_start, t_end] (inclusive) plus its start/end targets.
struct GroundTruthTube {
  std::size_t frames = 0;
  std::size_t t_start = 0;
  std::size_t t_end = 0;
  Tensor boxes;  // [t_end - t_start + 1, 4]
  std::vector<double> start_target;
  std::vector<double> end_target;

  static GroundTruthTube create(std::size_t frames, std::size_t t_start, std::size_t t_end, Tensor boxes);
  std::size_t length() const { return t_end - t_start + 1; }
};

// KL(target || predicted) with predicted probabilities clamped at kLogClamp
// inside the logarithm.
Tensor kl_divergence(const Tensor& predicted, const std::vector<double>& target);

struct SpatialLosses {
  Tensor l1;    // mean over GT frames of the per-frame L1 distance
  Tensor giou;  // mean over GT frames of 1 - gIoU
};

struct TemporalLosses {
  Tensor kl;   // KL(target || predicted), start + end
  Tensor att;  // guided attention; undefined when no attention was recorded
};

SpatialLosses spatial_losses(const Tensor& boxes, const GroundTruthTube& gt);

// attention: [heads, T, T] self-attention of one decoder layer, or undefined.
TemporalLosses temporal_losses(const Tensor& start_prob, const Tensor& end_prob, const GroundTruthTube& gt,
                               const Tensor& attention);

struct LossBreakdown {
  Tensor total;
  // Unweighted components summed over decoder layers.
  double l1 = 0.0, giou = 0.0, kl = 0.0, att = 0.0;
};

// Sum over layers of the weighted four-term objective. `attention` is either
// empty (temporal self-attention ablated) or one entry per layer.
LossBreakdown total_loss(const std::vector<TubePrediction>& predictions, const std::vector<Tensor>& attention,
                         const GroundTruthTube& gt, const LossWeights& weights);

}  // namespace tubedetr
