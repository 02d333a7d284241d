#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubedetr/backbones.hpp"
#include "tubedetr/nn.hpp"

namespace tubedetr {

// Fast module f / aggregation module g combinations.
enum class AggregationVariant {
  kSumLinear,        // f = Linear, g = Linear(h_v + f)
  kGatedProduct,     // f = Linear, g = sigmoid(h_v * f)
  kFastTransformer,  // f = temporal transformer layer, g = Linear(h_v + f)
  kSpatialPooled,    // f = Linear on spatially pooled tokens, g = Linear(h_v + f)
};

AggregationVariant parse_aggregation(const std::string& name);
std::string to_string(AggregationVariant variant);

struct EncoderConfig {
  std::size_t k = 1;       // temporal stride: frames per clip
  std::size_t layers = 6;  // N
  std::size_t dim = 256;   // d
  std::size_t heads = 8;
  std::size_t ffn_dim = 2048;
  double dropout = 0.1;
  AggregationVariant aggregation = AggregationVariant::kSumLinear;
  bool fast_enabled = true;

  void validate() const;
  // With k = 1 the fast and aggregation modules are inert.
  bool fast_active() const { return fast_enabled && k > 1; }
};

/// Output of the slow multi-modal branch, one entry per clip.
struct SlowOutput {
  Tensor h;  // [M, HW + L, d]
  std::size_t visual_tokens = 0;

  std::size_t clips() const { return h.dim(0); }
  Tensor visual() const;  // h_v: [M, HW, d]
  Tensor text() const;    // h_s: [M, L, d]
};

/// F(v, s) = [F_v, replicated h_s], token order [visual, text].
struct EncoderOutput {
  Tensor features;  // [T, HW + L, d]
  std::size_t visual_tokens = 0;
  std::size_t text_tokens = 0;

  std::size_t frames() const { return features.dim(0); }
  std::size_t tokens_per_frame() const { return visual_tokens + text_tokens; }
};

// Index of the frame sampled for each clip: 0, k, 2k, ... (ceil(T/k) entries).
std::vector<std::size_t> clip_frame_indices(std::size_t frames, std::size_t k);
// Clip index each frame is replicated from: t / k.
std::vector<std::size_t> replication_indices(std::size_t frames, std::size_t k);

// x0: [T, HW, d] -> x_p: [M, HW, d] keeping the first frame of every clip.
Tensor temporal_subsample(const Tensor& x0, std::size_t k);

class VideoTextEncoder {
 public:
  VideoTextEncoder() = default;
  VideoTextEncoder(ParameterStore& store, const EncoderConfig& config);

  // x_p: [M, HW, d]; y0: [L, d]. Clips never attend to each other.
  SlowOutput slow_encode(const Tensor& x_p, const Tensor& y0, const nn::Context& ctx) const;
  // f(v): [T, HW, d]. The input is detached, so no gradient reaches the backbone.
  Tensor fast_branch(const Tensor& x0, const nn::Context& ctx) const;
  // `fast` may be undefined when the fast branch is inert.
  EncoderOutput aggregate(const SlowOutput& slow, const Tensor& fast, std::size_t frames,
                          const nn::Context& ctx) const;

  EncoderOutput operator()(const FrameFeatures& x0, const TextFeatures& y0, const nn::Context& ctx) const;

  const EncoderConfig& config() const { return config_; }

 private:
  EncoderConfig config_;
  std::vector<nn::EncoderLayer> layers_;
  nn::Linear fast_linear_;
  nn::EncoderLayer fast_temporal_;
  nn::Linear aggregation_linear_;
};

}  // namespace tubedetr
