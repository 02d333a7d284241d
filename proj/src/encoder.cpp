#include "tubedetr/encoder.hpp"

#include "tubedetr/errors.hpp"

namespace tubedetr {

AggregationVariant parse_aggregation(const std::string& name) {
  if (name == "sum_linear") return AggregationVariant::kSumLinear;
  if (name == "gated_product") return AggregationVariant::kGatedProduct;
  if (name == "fast_transformer") return AggregationVariant::kFastTransformer;
  if (name == "spatial_pooled") return AggregationVariant::kSpatialPooled;
  throw ConfigError("unknown aggregation variant '" + name +
                    "' (expected sum_linear, gated_product, fast_transformer or spatial_pooled)");
}

std::string to_string(AggregationVariant variant) {
  switch (variant) {
    case AggregationVariant::kSumLinear:
      return "sum_linear";
    case AggregationVariant::kGatedProduct:
      return "gated_product";
    case AggregationVariant::kFastTransformer:
      return "fast_transformer";
    case AggregationVariant::kSpatialPooled:
      return "spatial_pooled";
  }
  return "?";
}

void EncoderConfig::validate() const {
  if (k < 1) throw ConfigError("encoder: temporal stride k must be >= 1");
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw ConfigError("encoder: dim " + std::to_string(dim) + " must be a positive multiple of heads " +
                      std::to_string(heads));
  }
  if (ffn_dim == 0) throw ConfigError("encoder: ffn_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must lie in [0, 1)");
}

Tensor SlowOutput::visual() const { return ops::slice(h, 1, 0, visual_tokens); }
Tensor SlowOutput::text() const { return ops::slice(h, 1, visual_tokens, h.dim(1)); }

std::vector<std::size_t> clip_frame_indices(std::size_t frames, std::size_t k) {
  if (k == 0) throw ConfigError("temporal stride k must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < frames; t += k) idx.push_back(t);
  return idx;
}

std::vector<std::size_t> replication_indices(std::size_t frames, std::size_t k) {
  if (k == 0) throw ConfigError("temporal stride k must be >= 1");
  std::vector<std::size_t> idx(frames);
  for (std::size_t t = 0; t < frames; ++t) idx[t] = t / k;
  return idx;
}

Tensor temporal_subsample(const Tensor& x0, std::size_t k) {
  return ops::index_select(x0, 0, clip_frame_indices(x0.dim(0), k));
}

VideoTextEncoder::VideoTextEncoder(ParameterStore& store, const EncoderConfig& config) : config_(config) {
  config_.validate();
  for (std::size_t i = 0; i < config_.layers; ++i) {
    layers_.emplace_back(store, "encoder.layers." + std::to_string(i), config_.dim, config_.heads, config_.ffn_dim,
                         config_.dropout);
  }
  // Inert modules are not created at all, so a k = 1 model has exactly the
  // parameters of an encoder without fast/aggregation modules.
  if (!config_.fast_active()) return;
  if (config_.aggregation == AggregationVariant::kFastTransformer) {
    fast_temporal_ = nn::EncoderLayer(store, "encoder.fast.temporal", config_.dim, config_.heads, config_.ffn_dim,
                                      config_.dropout);
  } else {
    fast_linear_ = nn::Linear(store, "encoder.fast.linear", config_.dim, config_.dim);
  }
  if (config_.aggregation != AggregationVariant::kGatedProduct) {
    aggregation_linear_ = nn::Linear(store, "encoder.aggregation.linear", config_.dim, config_.dim);
  }
}

SlowOutput VideoTextEncoder::slow_encode(const Tensor& x_p, const Tensor& y0, const nn::Context& ctx) const {
  if (x_p.rank() != 3 || y0.rank() != 2 || x_p.dim(2) != config_.dim || y0.dim(1) != config_.dim) {
    throw DimensionError("slow_encode: visual " + to_string(x_p.shape()) + " and text " + to_string(y0.shape()) +
                         " do not match d=" + std::to_string(config_.dim));
  }
  const std::size_t M = x_p.dim(0), L = y0.dim(0);
  auto text = ops::broadcast_axis(ops::reshape(y0, {1, L, config_.dim}), 0, M);
  auto h = ops::concat({x_p, text}, 1);
  for (const auto& layer : layers_) h = layer(h, ctx);
  return SlowOutput{h, x_p.dim(1)};
}

Tensor VideoTextEncoder::fast_branch(const Tensor& x0, const nn::Context& ctx) const {
  if (!config_.fast_active()) {
    throw ConfigError("fast_branch called while the fast branch is disabled (fast_enabled=" +
                      std::string(config_.fast_enabled ? "true" : "false") + ", k=" + std::to_string(config_.k) + ")");
  }
  const auto x = x0.detach();
  switch (config_.aggregation) {
    case AggregationVariant::kSumLinear:
    case AggregationVariant::kGatedProduct:
      return fast_linear_(x);
    case AggregationVariant::kSpatialPooled:
      return ops::broadcast_axis(fast_linear_(ops::mean_axis(x, 1)), 1, x.dim(1));
    case AggregationVariant::kFastTransformer:
      return ops::transpose01(fast_temporal_(ops::transpose01(x), ctx));
  }
  throw ConfigError("unhandled aggregation variant");
}

EncoderOutput VideoTextEncoder::aggregate(const SlowOutput& slow, const Tensor& fast, std::size_t frames,
                                          const nn::Context&) const {
  const std::size_t k = config_.k;
  if (frames > slow.clips() * k || frames == 0) {
    throw DimensionError("aggregate: T=" + std::to_string(frames) + " exceeds M*k=" +
                         std::to_string(slow.clips() * k));
  }
  const std::size_t HW = slow.visual_tokens, total = slow.h.dim(1);
  auto h = ops::index_select(slow.h, 0, replication_indices(frames, k));
  EncoderOutput out{h, HW, total - HW};
  if (!config_.fast_active()) return out;
  if (!fast.defined() || fast.shape() != Shape{frames, HW, config_.dim}) {
    throw DimensionError("aggregate: fast features must be [T, HW, d]");
  }
  auto h_v = ops::slice(h, 1, 0, HW);
  auto h_s = ops::slice(h, 1, HW, total);
  Tensor g = config_.aggregation == AggregationVariant::kGatedProduct ? ops::sigmoid(ops::mul(h_v, fast))
                                                                       : aggregation_linear_(ops::add(h_v, fast));
  out.features = ops::concat({ops::add(g, h_v), h_s}, 1);
  return out;
}

EncoderOutput VideoTextEncoder::operator()(const FrameFeatures& x0, const TextFeatures& y0,
                                           const nn::Context& ctx) const {
  const auto slow = slow_encode(temporal_subsample(x0.features, config_.k), y0.features, ctx);
  Tensor fast;
  if (config_.fast_active()) fast = fast_branch(x0.features, ctx);
  return aggregate(slow, fast, x0.frames(), ctx);
}

}  // namespace tubedetr
