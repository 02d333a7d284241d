#pragma once

#include <vector>

#include "tubedetr/encoder.hpp"
#include "tubedetr/nn.hpp"

namespace tubedetr {

struct DecoderAblation {
  bool use_time_encoding = true;
  bool use_temporal_self_attention = true;
};

struct DecoderConfig {
  std::size_t layers = 6;
  std::size_t dim = 256;
  std::size_t heads = 8;
  std::size_t ffn_dim = 2048;
  double dropout = 0.1;

  void validate() const;
};

// q_t = object_encoding + PE(t); PE is omitted when time encoding is ablated.
// object_encoding: [d]. Returns [T, d].
Tensor build_time_queries(std::size_t frames, const Tensor& object_encoding, const DecoderAblation& ablation);

// Row t allows exactly the columns [t*(HW+L), (t+1)*(HW+L)).
Mask build_cross_attention_mask(std::size_t frames, std::size_t visual_tokens, std::size_t text_tokens);

struct DecoderOutput {
  std::vector<Tensor> queries;          // per layer: [T, d]
  std::vector<Tensor> self_attention;   // per layer: [heads, T, T]; empty when ablated
  std::vector<Tensor> cross_attention;  // per layer: [heads, T, T*(HW+L)]
  Tensor output;                        // last refined queries (input queries when N = 0)

  std::size_t layers() const { return queries.size(); }
};

/// N blocks of temporal self-attention -> time-aligned cross-attention -> FFN,
/// each sub-layer post-norm residual.
class SpaceTimeDecoder {
 public:
  SpaceTimeDecoder() = default;
  SpaceTimeDecoder(ParameterStore& store, const DecoderConfig& config);

  DecoderOutput operator()(const Tensor& queries, const EncoderOutput& features, const DecoderAblation& ablation,
                           const nn::Context& ctx) const;
  DecoderOutput operator()(const EncoderOutput& features, const DecoderAblation& ablation,
                           const nn::Context& ctx) const;

  const Tensor& object_encoding() const { return object_encoding_; }
  const DecoderConfig& config() const { return config_; }

 private:
  struct Block {
    nn::Attention self_attn, cross_attn;
    nn::FeedForward ffn;
    nn::LayerNorm norm1, norm2, norm3;
  };

  DecoderConfig config_;
  Tensor object_encoding_;
  std::vector<Block> blocks_;
};

}  // namespace tubedetr
