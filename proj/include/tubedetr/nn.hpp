#pragma once

#include <string>

#include "tubedetr/ops.hpp"
#include "tubedetr/parameters.hpp"

namespace tubedetr::nn {

// Forward-pass mode. Dropout is active only when training with an rng.
struct Context {
  bool training = false;
  Rng* rng = nullptr;

  bool dropout_active() const { return training && rng != nullptr; }
};

Tensor apply_dropout(const Tensor& x, double p, const Context& ctx);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
         ParamGroup group = ParamGroup::kRest);
  Tensor operator()(const Tensor& x) const { return ops::linear(x, weight, bias); }

  Tensor weight;
  Tensor bias;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim, ParamGroup group = ParamGroup::kRest);
  Tensor operator()(const Tensor& x) const { return ops::layer_norm(x, gain, shift); }

  Tensor gain;
  Tensor shift;
};

// Input/output projections around ops::multi_head_attention.
class Attention {
 public:
  Attention() = default;
  Attention(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t heads,
            ParamGroup group = ParamGroup::kRest);

  ops::AttentionResult operator()(const Tensor& query, const Tensor& key, const Tensor& value,
                                  const Mask& mask = {}) const;

  std::size_t heads() const { return heads_; }

 private:
  Linear q_proj_, k_proj_, v_proj_, out_proj_;
  std::size_t heads_ = 1;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t hidden,
              ParamGroup group = ParamGroup::kRest);
  Tensor operator()(const Tensor& x, double dropout, const Context& ctx) const;

 private:
  Linear in_, out_;
};

/// Post-norm transformer encoder layer: self-attention then FFN, each wrapped
/// in dropout + residual + LayerNorm.
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t heads,
               std::size_t ffn_dim, double dropout, ParamGroup group = ParamGroup::kRest);

  // x: [B, L, d]; attention runs within each batch entry only.
  Tensor operator()(const Tensor& x, const Context& ctx) const;

 private:
  Attention self_attn_;
  FeedForward ffn_;
  LayerNorm norm1_, norm2_;
  double dropout_ = 0.0;
};

}  // namespace tubedetr::nn
