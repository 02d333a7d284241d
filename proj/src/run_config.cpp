#include "tubedetr/run_config.hpp"

#include <cmath>
#include <fstream>

#include "tubedetr/errors.hpp"

namespace tubedetr {

std::vector<RunConfig::Field> RunConfig::fields() {
  return {
      {"dim", &dim},
      {"heads", &heads},
      {"ffn_dim", &ffn_dim},
      {"encoder_layers", &encoder_layers},
      {"decoder_layers", &decoder_layers},
      {"dropout", &dropout},
      {"head_dropout", &head_dropout},
      {"k", &k},
      {"aggregation", &aggregation},
      {"fast_enabled", &fast_enabled},
      {"use_time_encoding", &use_time_encoding},
      {"use_temporal_self_attention", &use_temporal_self_attention},
      {"patch", &patch},
      {"max_text_length", &max_text_length},
      {"w_l1", &w_l1},
      {"w_giou", &w_giou},
      {"w_kl", &w_kl},
      {"w_att", &w_att},
      {"data_dir", &data_dir},
      {"n_videos", &n_videos},
      {"frames", &frames},
      {"height", &height},
      {"width", &width},
      {"data_seed", &data_seed},
      {"source_fps", &source_fps},
      {"fps", &fps},
      {"t_max", &t_max},
      {"augment", &augment},
      {"epochs", &epochs},
      {"batch_size", &batch_size},
      {"max_steps", &max_steps},
      {"seed", &seed},
      {"lr_backbone", &lr_backbone},
      {"lr_text", &lr_text},
      {"lr_rest", &lr_rest},
      {"weight_decay", &weight_decay},
      {"text_warmup_steps", &text_warmup_steps},
      {"clip_max_norm", &clip_max_norm},
      {"ema", &ema},
      {"ema_decay", &ema_decay},
      {"eval_every_epochs", &eval_every_epochs},
      {"output_dir", &output_dir},
  };
}

void RunConfig::validate() const {
  model_config().validate();
  scene_params().validate();
  if (t_max < 2) throw ConfigError("t_max must be at least 2");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(fps > 0.0) || !(source_fps > 0.0)) throw ConfigError("fps and source_fps must be positive");
  if (fps > source_fps) throw ConfigError("fps cannot exceed source_fps");
  if (height % patch != 0 || width % patch != 0) {
    throw ConfigError("canvas " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by patch size " + std::to_string(patch));
  }
  for (double w : {w_l1, w_giou, w_kl, w_att})
    if (w < 0.0) throw ConfigError("loss weights must be non-negative");
  for (double lr : {lr_backbone, lr_text, lr_rest})
    if (!(lr >= 0.0)) throw ConfigError("learning rates must be non-negative");
  if (ema && !(ema_decay > 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must lie in (0, 1)");
  if (eval_every_epochs == 0) throw ConfigError("eval_every_epochs must be positive");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.patch = patch;
  m.max_text_length = max_text_length;
  m.encoder.k = k;
  m.encoder.layers = encoder_layers;
  m.encoder.dim = dim;
  m.encoder.heads = heads;
  m.encoder.ffn_dim = ffn_dim;
  m.encoder.dropout = dropout;
  m.encoder.aggregation = parse_aggregation(aggregation);
  m.encoder.fast_enabled = fast_enabled;
  m.decoder_layers = decoder_layers;
  m.ablation.use_time_encoding = use_time_encoding;
  m.ablation.use_temporal_self_attention = use_temporal_self_attention;
  m.head_dropout = head_dropout;
  m.seed = seed;
  return m;
}

AdamWConfig RunConfig::optimizer_config(std::size_t total_steps) const {
  AdamWConfig c;
  c.lr_backbone = lr_backbone;
  c.lr_text = lr_text;
  c.lr_rest = lr_rest;
  c.weight_decay = weight_decay;
  c.text_warmup_steps = text_warmup_steps;
  c.total_steps = total_steps;
  c.clip_max_norm = clip_max_norm;
  c.ema = ema;
  c.ema_decay = ema_decay;
  return c;
}

LossWeights RunConfig::loss_weights() const { return LossWeights{w_l1, w_giou, w_kl, w_att}; }

SceneParams RunConfig::scene_params() const {
  SceneParams p;
  p.frames = frames;
  p.height = height;
  p.width = width;
  return p;
}

AugmentConfig RunConfig::augment_config() const {
  AugmentConfig a;
  a.enabled = augment;
  return a;
}

std::size_t RunConfig::frame_stride() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(source_fps / fps)));
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  for (auto& f : const_cast<RunConfig*>(this)->fields()) {
    std::visit([&](auto* p) { j[f.name] = *p; }, f.ref);
  }
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
  RunConfig c;
  auto fields = c.fields();
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; });
    if (it == fields.end()) throw ConfigError("run config: unknown field '" + key + "'");
    try {
      std::visit(
          [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
              if (!value.is_boolean()) throw ConfigError("run config: field '" + key + "' must be a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
              if (!value.is_string()) throw ConfigError("run config: field '" + key + "' must be a string");
            } else if constexpr (std::is_integral_v<T>) {
              if (!value.is_number_integer() || value.get<long long>() < 0) {
                throw ConfigError("run config: field '" + key + "' must be a non-negative integer");
              }
            } else {
              if (!value.is_number()) throw ConfigError("run config: field '" + key + "' must be a number");
            }
            *p = value.get<T>();
          },
          it->ref);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("run config: field '" + key + "': " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open run config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << to_json().dump(2) << '\n';
}

}  // namespace tubedetr
