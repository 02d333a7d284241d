#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tubedetr/parameters.hpp"

namespace tubedetr {

struct AdamWConfig {
  // Full-scale defaults: 1e-5 for the visual backbone, 5e-5 elsewhere.
  double lr_backbone = 1e-5;
  double lr_text = 5e-5;
  double lr_rest = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  // Linear warm-up then linear decay, applied to the text encoder group only.
  std::size_t text_warmup_steps = 0;
  std::size_t total_steps = 0;  // 0 = no decay
  // Rescale the global gradient norm to at most this value (0 = off).
  double clip_max_norm = 0.0;
  bool ema = false;
  double ema_decay = 0.9998;
};

struct OptimizerState {
  std::size_t step = 0;
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;
  std::map<std::string, std::vector<double>> ema_shadow;  // empty when EMA is off
};

/// Decoupled weight-decay Adam over a ParameterStore, with optional EMA of
/// the parameters.
class AdamW {
 public:
  AdamW(AdamWConfig config, ParameterStore& params);

  // One update from the gradients currently held by the parameters. Throws
  // std::logic_error naming the first parameter without a gradient buffer.
  void step();

  double learning_rate(ParamGroup group) const;
  const AdamWConfig& config() const { return config_; }
  const OptimizerState& state() const { return state_; }
  OptimizerState& state() { return state_; }

  // Swaps EMA shadow values into the parameters (and back on a second call).
  void swap_ema();

 private:
  AdamWConfig config_;
  ParameterStore& params_;
  OptimizerState state_;
};

}  // namespace tubedetr
