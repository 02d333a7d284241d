#include "tubedetr/decoder.hpp"

#include "tubedetr/errors.hpp"
#include "tubedetr/positional.hpp"

namespace tubedetr {

void DecoderConfig::validate() const {
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw ConfigError("decoder: dim " + std::to_string(dim) + " must be a positive multiple of heads " +
                      std::to_string(heads));
  }
  if (dim % 2 != 0) throw ConfigError("decoder: time encoding needs an even dim");
  if (ffn_dim == 0) throw ConfigError("decoder: ffn_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("decoder: dropout must lie in [0, 1)");
}

Tensor build_time_queries(std::size_t frames, const Tensor& object_encoding, const DecoderAblation& ablation) {
  if (frames == 0) throw ConfigError("time queries: T must be >= 1");
  if (object_encoding.rank() != 1) throw DimensionError("time queries: object encoding must be [d]");
  const std::size_t d = object_encoding.dim(0);
  if (d % 2 != 0) throw ConfigError("time queries: d must be even, got " + std::to_string(d));
  auto base = ops::broadcast_axis(ops::reshape(object_encoding, {1, d}), 0, frames);
  if (!ablation.use_time_encoding) return base;
  return ops::add(base, sinusoid_table(frames, d));
}

Mask build_cross_attention_mask(std::size_t frames, std::size_t visual_tokens, std::size_t text_tokens) {
  const std::size_t per_frame = visual_tokens + text_tokens;
  if (frames == 0 || per_frame == 0) throw ConfigError("cross-attention mask: sizes must be positive");
  Mask mask({frames, frames * per_frame}, false);
  for (std::size_t t = 0; t < frames; ++t) {
    auto row = mask.allowed.begin() + static_cast<std::ptrdiff_t>(t * frames * per_frame + t * per_frame);
    std::fill(row, row + static_cast<std::ptrdiff_t>(per_frame), std::uint8_t{1});
  }
  return mask;
}

SpaceTimeDecoder::SpaceTimeDecoder(ParameterStore& store, const DecoderConfig& config) : config_(config) {
  config_.validate();
  object_encoding_ = store.create_uniform("decoder.object_encoding", {config_.dim}, 1.0, ParamGroup::kRest);
  for (std::size_t i = 0; i < config_.layers; ++i) {
    const std::string p = "decoder.layers." + std::to_string(i);
    blocks_.push_back(Block{nn::Attention(store, p + ".self_attn", config_.dim, config_.heads),
                            nn::Attention(store, p + ".cross_attn", config_.dim, config_.heads),
                            nn::FeedForward(store, p + ".ffn", config_.dim, config_.ffn_dim),
                            nn::LayerNorm(store, p + ".norm1", config_.dim),
                            nn::LayerNorm(store, p + ".norm2", config_.dim),
                            nn::LayerNorm(store, p + ".norm3", config_.dim)});
  }
}

DecoderOutput SpaceTimeDecoder::operator()(const EncoderOutput& features, const DecoderAblation& ablation,
                                           const nn::Context& ctx) const {
  return (*this)(build_time_queries(features.frames(), object_encoding_, ablation), features, ablation, ctx);
}

DecoderOutput SpaceTimeDecoder::operator()(const Tensor& queries, const EncoderOutput& features,
                                           const DecoderAblation& ablation, const nn::Context& ctx) const {
  const std::size_t T = features.frames(), per_frame = features.tokens_per_frame(), d = config_.dim;
  if (queries.rank() != 2 || queries.dim(0) != T || queries.dim(1) != d ||
      features.features.shape() != Shape{T, per_frame, d}) {
    throw DimensionError("decoder: queries " + to_string(queries.shape()) + " incompatible with features " +
                         to_string(features.features.shape()));
  }
  const auto memory = ops::reshape(features.features, {T * per_frame, d});
  const auto mask = build_cross_attention_mask(T, features.visual_tokens, features.text_tokens);
  const double p = config_.dropout;

  DecoderOutput out;
  Tensor q = queries;
  for (const auto& block : blocks_) {
    if (ablation.use_temporal_self_attention) {
      auto sa = block.self_attn(q, q, q);
      out.self_attention.push_back(sa.weights);
      q = block.norm1(ops::add(q, nn::apply_dropout(sa.output, p, ctx)));
    }
    auto ca = block.cross_attn(q, memory, memory, mask);
    out.cross_attention.push_back(ca.weights);
    q = block.norm2(ops::add(q, nn::apply_dropout(ca.output, p, ctx)));
    q = block.norm3(ops::add(q, nn::apply_dropout(block.ffn(q, p, ctx), p, ctx)));
    out.queries.push_back(q);
  }
  out.output = q;
  return out;
}

}  // namespace tubedetr
