#pragma once

#include "tubedetr/nn.hpp"

namespace tubedetr {

/// Per-frame boxes and start/end distributions predicted from one decoder layer.
struct TubePrediction {
  Tensor boxes;         // [T, 4] (cx, cy, w, h), strictly inside (0, 1)
  Tensor start_logits;  // [T]
  Tensor end_logits;    // [T]
  Tensor start_prob;    // [T], softmax over frames
  Tensor end_prob;      // [T]

  std::size_t frames() const { return boxes.dim(0); }
};

/// 3-layer MLP box head with logistic squashing, and 2-layer MLP start/end
/// heads preceded by dropout. Shared across decoder layers.
class PredictionHeads {
 public:
  PredictionHeads() = default;
  PredictionHeads(ParameterStore& store, std::size_t dim, double temporal_dropout);

  // queries: [T, d].
  TubePrediction operator()(const Tensor& queries, const nn::Context& ctx) const;

 private:
  nn::Linear box1_, box2_, box3_;
  nn::Linear start1_, start2_;
  nn::Linear end1_, end2_;
  double temporal_dropout_ = 0.5;
};

}  // namespace tubedetr
