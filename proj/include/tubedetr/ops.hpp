#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tubedetr/rng.hpp"
#include "tubedetr/tensor.hpp"

/// Differentiable tensor operations.
///
/// Every op records itself on the active tape (see TapeScope) when at least
/// one input requires a gradient, and validates that its outputs are finite.
namespace tubedetr::ops {

// y = x·Wᵀ + b over the trailing dimension of x. `bias` may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Softmax over the last axis with blocked entries forced to exactly 0. The
// mask either matches the logits shape or covers its trailing dimensions and
// is broadcast over the leading ones. An empty mask allows everything.
Tensor softmax_masked(const Tensor& logits, const Mask& mask);
Tensor softmax(const Tensor& logits);

inline constexpr double kLayerNormEps = 1e-5;
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift);

struct AttentionResult {
  Tensor output;   // [B, Lq, d]
  Tensor weights;  // [B, heads, Lq, Lk], post-softmax
};

// Scaled dot-product attention split over `heads` heads, on already projected
// q [B, Lq, d], k [B, Lk, d], v [B, Lk, d]. Rank-2 inputs are treated as B=1
// and produce rank-2 output / rank-3 weights. The mask is [Lq, Lk] shared
// across the batch (empty = all allowed). Scores are only evaluated at
// allowed positions.
AttentionResult multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Mask& mask,
                                     std::size_t heads);

// Elementwise arithmetic. `b` must have the shape of `a` or of a suffix of
// its dimensions, in which case it is broadcast over the leading axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor abs(const Tensor& x);
// max(x, floor); gradient flows only where x > floor.
Tensor clamp_min(const Tensor& x, double floor);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Sum / mean over one axis, keeping it with size 1.
Tensor sum_axis(const Tensor& x, std::size_t axis);
Tensor mean_axis(const Tensor& x, std::size_t axis);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
// Gathers entries along `axis`; indices may repeat (gradients scatter-add).
Tensor index_select(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices);
// Repeats a size-1 axis `count` times.
Tensor broadcast_axis(const Tensor& x, std::size_t axis, std::size_t count);
// Swaps the first two axes.
Tensor transpose01(const Tensor& x);

// Inverted dropout; identity when p == 0 or not training.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

}  // namespace tubedetr::ops
