#include "tubedetr/model.hpp"

#include "tubedetr/errors.hpp"

namespace tubedetr {

void ModelConfig::validate() const {
  encoder.validate();
  decoder().validate();
  if (encoder.dim % 4 != 0) throw ConfigError("model dim must be divisible by 4 for the 2D positional encoding");
  if (channels == 0 || patch == 0 || max_text_length == 0) throw ConfigError("model: sizes must be positive");
  if (head_dropout < 0.0 || head_dropout >= 1.0) throw ConfigError("model: head_dropout must lie in [0, 1)");
}

static ModelConfig resolved(ModelConfig c) {
  if (c.vocab_size == 0) c.vocab_size = Vocabulary::synthetic_grammar().size();
  c.validate();
  return c;
}

TubeDetr::TubeDetr(const ModelConfig& config)
    : config_(resolved(config)),
      store_(config_.seed),
      patch_embed_(store_, config_.channels, config_.patch, config_.encoder.dim),
      text_encoder_(store_, config_.vocab_size, config_.max_text_length, config_.encoder.dim, config_.encoder.heads,
                    config_.encoder.ffn_dim, config_.encoder.dropout),
      encoder_(store_, config_.encoder),
      decoder_(store_, config_.decoder()),
      heads_(store_, config_.encoder.dim, config_.head_dropout) {}

ModelOutput TubeDetr::forward(const Tensor& video, const std::vector<std::size_t>& token_ids,
                              const nn::Context& ctx) const {
  ModelOutput out;
  out.frames = patch_embed_(video);
  out.text = text_encoder_(token_ids, ctx);
  out.encoder = encoder_(out.frames, out.text, ctx);
  out.decoder = decoder_(out.encoder, config_.ablation, ctx);
  for (const auto& q : out.decoder.queries) out.predictions.push_back(heads_(q, ctx));
  return out;
}

LossBreakdown TubeDetr::loss(const ModelOutput& out, const GroundTruthTube& gt, const LossWeights& weights) const {
  return total_loss(out.predictions, out.decoder.self_attention, gt, weights);
}

}  // namespace tubedetr
