#include "tubedetr/nn.hpp"

#include "tubedetr/errors.hpp"

namespace tubedetr::nn {

Tensor apply_dropout(const Tensor& x, double p, const Context& ctx) {
  if (!ctx.dropout_active() || p == 0.0) return x;
  return ops::dropout(x, p, true, *ctx.rng);
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, ParamGroup group)
    : weight(store.create(name + ".weight", {out, in}, group)), bias(store.create(name + ".bias", {out}, group)) {}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim, ParamGroup group)
    : gain(store.create_filled(name + ".gain", {dim}, 1.0, group)),
      shift(store.create_filled(name + ".shift", {dim}, 0.0, group)) {}

Attention::Attention(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t heads,
                     ParamGroup group)
    : q_proj_(store, name + ".q_proj", dim, dim, group),
      k_proj_(store, name + ".k_proj", dim, dim, group),
      v_proj_(store, name + ".v_proj", dim, dim, group),
      out_proj_(store, name + ".out_proj", dim, dim, group),
      heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention '" + name + "': dim " + std::to_string(dim) + " not divisible by heads " +
                      std::to_string(heads));
  }
}

ops::AttentionResult Attention::operator()(const Tensor& query, const Tensor& key, const Tensor& value,
                                           const Mask& mask) const {
  auto r = ops::multi_head_attention(q_proj_(query), k_proj_(key), v_proj_(value), mask, heads_);
  r.output = out_proj_(r.output);
  return r;
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t hidden,
                         ParamGroup group)
    : in_(store, name + ".in", dim, hidden, group), out_(store, name + ".out", hidden, dim, group) {}

Tensor FeedForward::operator()(const Tensor& x, double dropout, const Context& ctx) const {
  return out_(apply_dropout(ops::relu(in_(x)), dropout, ctx));
}

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t heads,
                           std::size_t ffn_dim, double dropout, ParamGroup group)
    : self_attn_(store, name + ".self_attn", dim, heads, group),
      ffn_(store, name + ".ffn", dim, ffn_dim, group),
      norm1_(store, name + ".norm1", dim, group),
      norm2_(store, name + ".norm2", dim, group),
      dropout_(dropout) {}

Tensor EncoderLayer::operator()(const Tensor& x, const Context& ctx) const {
  auto attn = self_attn_(x, x, x).output;
  auto h = norm1_(ops::add(x, apply_dropout(attn, dropout_, ctx)));
  auto f = ffn_(h, dropout_, ctx);
  return norm2_(ops::add(h, apply_dropout(f, dropout_, ctx)));
}

}  // namespace tubedetr::nn
