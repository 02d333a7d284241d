#pragma once

#include "tubedetr/rng.hpp"
#include "tubedetr/synthetic.hpp"

namespace tubedetr {

struct AugmentConfig {
  bool enabled = false;
  double temporal_probability = 0.5;
  double spatial_probability = 0.5;
};

// Random window [a, b] with a <= t_s and b >= t_e; indices shift by a.
SyntheticSample temporal_crop(const SyntheticSample& sample, Rng& rng);

// Random crop rectangle containing every GT box, resized back to the input
// canvas with bilinear sampling; boxes are expressed in the crop.
SyntheticSample spatial_crop(const SyntheticSample& sample, Rng& rng);

// Returns the input unchanged when augmentation is disabled.
SyntheticSample augment_sample(const SyntheticSample& sample, const AugmentConfig& config, Rng& rng);

// Bilinear resampling of the pixel rectangle [x0, x1) x [y0, y1) of every
// frame onto an out_h x out_w grid (pixel-centre aligned).
Tensor crop_resize(const Tensor& video, double x0, double y0, double x1, double y1, std::size_t out_h,
                   std::size_t out_w);

}  // namespace tubedetr
