#pragma once

#include <cstdint>
#include <vector>

#include "tubedetr/backbones.hpp"
#include "tubedetr/decoder.hpp"
#include "tubedetr/encoder.hpp"
#include "tubedetr/heads.hpp"
#include "tubedetr/losses.hpp"

namespace tubedetr {

struct ModelConfig {
  std::size_t channels = 3;
  std::size_t patch = 4;
  std::size_t max_text_length = 16;
  std::size_t vocab_size = 0;  // 0 = size of the synthetic grammar vocabulary
  EncoderConfig encoder;
  std::size_t decoder_layers = 6;
  DecoderAblation ablation;
  double head_dropout = 0.5;
  std::uint64_t seed = 0;

  DecoderConfig decoder() const {
    return DecoderConfig{decoder_layers, encoder.dim, encoder.heads, encoder.ffn_dim, encoder.dropout};
  }
  void validate() const;
};

struct ModelOutput {
  FrameFeatures frames;
  TextFeatures text;
  EncoderOutput encoder;
  DecoderOutput decoder;
  std::vector<TubePrediction> predictions;  // one per decoder layer

  const TubePrediction& final_prediction() const { return predictions.back(); }
};

/// Backbones -> slow-fast video-text encoder -> space-time decoder -> heads.
class TubeDetr {
 public:
  explicit TubeDetr(const ModelConfig& config);
  TubeDetr(const TubeDetr&) = delete;
  TubeDetr& operator=(const TubeDetr&) = delete;

  // video: [T, C, H_px, W_px]; token_ids from Vocabulary::encode.
  ModelOutput forward(const Tensor& video, const std::vector<std::size_t>& token_ids, const nn::Context& ctx) const;

  LossBreakdown loss(const ModelOutput& out, const GroundTruthTube& gt, const LossWeights& weights) const;

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const VideoTextEncoder& encoder() const { return encoder_; }
  const SpaceTimeDecoder& decoder() const { return decoder_; }

 private:
  ModelConfig config_;
  ParameterStore store_;
  PatchEmbedding patch_embed_;
  TextEncoder text_encoder_;
  VideoTextEncoder encoder_;
  SpaceTimeDecoder decoder_;
  PredictionHeads heads_;
};

}  // namespace tubedetr
