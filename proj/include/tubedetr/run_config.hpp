#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tubedetr/augment.hpp"
#include "tubedetr/model.hpp"
#include "tubedetr/optimizer.hpp"
#include "tubedetr/synthetic.hpp"

namespace tubedetr {

/// Every knob of a generate / train / eval run. Each field has one name used
/// both as its JSON key and as its command-line flag.
struct RunConfig {
  // model
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  double dropout = 0.0;
  double head_dropout = 0.0;
  std::size_t k = 4;
  std::string aggregation = "sum_linear";
  bool fast_enabled = true;
  bool use_time_encoding = true;
  bool use_temporal_self_attention = true;
  std::size_t patch = 4;
  std::size_t max_text_length = 16;
  // loss
  double w_l1 = 5.0;
  double w_giou = 2.0;
  double w_kl = 10.0;
  double w_att = 1.0;
  // data
  std::string data_dir = "data";
  std::size_t n_videos = 40;
  std::size_t frames = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t data_seed = 0;
  double source_fps = 5.0;  // frame rate of the stored videos
  double fps = 5.0;         // frame rate fed to the model; lower values drop frames
  std::size_t t_max = 200;
  bool augment = false;
  // training
  std::size_t epochs = 250;
  std::size_t batch_size = 4;
  std::size_t max_steps = 0;  // 0 = no limit besides epochs
  std::size_t seed = 0;
  double lr_backbone = 3e-4;
  double lr_text = 3e-4;
  double lr_rest = 3e-4;
  double weight_decay = 1e-4;
  std::size_t text_warmup_steps = 0;
  double clip_max_norm = 1.0;
  bool ema = false;
  double ema_decay = 0.99;
  std::size_t eval_every_epochs = 25;
  std::string output_dir = "runs/default";

  using FieldRef = std::variant<std::size_t*, double*, bool*, std::string*>;
  struct Field {
    std::string name;
    FieldRef ref;
  };
  // Mutable views of every field, in declaration order.
  std::vector<Field> fields();

  // Throws ConfigError on invalid combinations.
  void validate() const;

  ModelConfig model_config() const;
  AdamWConfig optimizer_config(std::size_t total_steps) const;
  LossWeights loss_weights() const;
  SceneParams scene_params() const;
  AugmentConfig augment_config() const;
  // Frame stride derived from source_fps / fps.
  std::size_t frame_stride() const;

  nlohmann::ordered_json to_json() const;
  // Unknown keys and type mismatches raise ConfigError; missing keys keep
  // their defaults.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace tubedetr
