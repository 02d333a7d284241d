#include "tubedetr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tubedetr/errors.hpp"

namespace tubedetr {

AdamW::AdamW(AdamWConfig config, ParameterStore& params) : config_(config), params_(params) {
  if (config_.ema && !(config_.ema_decay > 0.0 && config_.ema_decay < 1.0)) {
    throw ConfigError("EMA decay must lie in (0, 1)");
  }
  for (const auto& p : params_.all()) {
    state_.first_moment[p.name].assign(p.value.size(), 0.0);
    state_.second_moment[p.name].assign(p.value.size(), 0.0);
    if (config_.ema) {
      auto d = p.value.data();
      state_.ema_shadow[p.name].assign(d.begin(), d.end());
    }
  }
}

double AdamW::learning_rate(ParamGroup group) const {
  switch (group) {
    case ParamGroup::kVisualBackbone:
      return config_.lr_backbone;
    case ParamGroup::kRest:
      return config_.lr_rest;
    case ParamGroup::kTextEncoder:
      break;
  }
  // Schedule factor for the step about to be taken (1-based).
  const double s = static_cast<double>(state_.step + 1);
  double factor = 1.0;
  if (config_.text_warmup_steps > 0 && s <= static_cast<double>(config_.text_warmup_steps)) {
    factor = s / static_cast<double>(config_.text_warmup_steps);
  } else if (config_.total_steps > config_.text_warmup_steps) {
    const double span = static_cast<double>(config_.total_steps - config_.text_warmup_steps);
    factor = std::max(0.0, 1.0 - (s - static_cast<double>(config_.text_warmup_steps)) / span);
  }
  return config_.lr_text * factor;
}

void AdamW::step() {
  for (const auto& p : params_.all()) {
    if (!p.value.has_grad()) throw std::logic_error("optimizer step: parameter '" + p.name + "' has no gradient");
  }
  double clip = 1.0;
  if (config_.clip_max_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params_.all())
      for (double g : p.value.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > config_.clip_max_norm) clip = config_.clip_max_norm / (norm + 1e-6);
  }
  const double t = static_cast<double>(state_.step + 1);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (auto& p : params_.all()) {
    const double lr = learning_rate(p.group);
    auto& m = state_.first_moment.at(p.name);
    auto& v = state_.second_moment.at(p.name);
    auto w = p.value.mutable_data();
    const auto g = p.value.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] * clip;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      w[i] *= 1.0 - lr * config_.weight_decay;
      w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.eps);
    }
    if (config_.ema) {
      auto& shadow = state_.ema_shadow.at(p.name);
      for (std::size_t i = 0; i < w.size(); ++i)
        shadow[i] = config_.ema_decay * shadow[i] + (1.0 - config_.ema_decay) * w[i];
    }
  }
  ++state_.step;
}

void AdamW::swap_ema() {
  if (!config_.ema) return;
  for (auto& p : params_.all()) {
    auto& shadow = state_.ema_shadow.at(p.name);
    auto w = p.value.mutable_data();
    std::swap_ranges(w.begin(), w.end(), shadow.begin());
  }
}

}  // namespace tubedetr
