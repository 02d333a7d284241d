#pragma once

#include <string>
#include <vector>

#include "tubedetr/annotation.hpp"
#include "tubedetr/rng.hpp"
#include "tubedetr/tensor.hpp"

namespace tubedetr {

enum class ShapeKind { kSquare, kCircle, kTriangle };
enum class Color { kRed, kGreen, kBlue, kYellow };
enum class Motion { kLeft, kRight, kUp, kDown, kStill };

std::string to_string(ShapeKind s);
std::string to_string(Color c);
std::string to_string(Motion m);

struct SceneParams {
  std::size_t frames = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t min_actors = 2;
  std::size_t max_actors = 4;
  double min_size = 7.0;  // pixels, side of the shape's bounding square
  double max_size = 10.0;
  double min_speed = 1.0;  // pixels per frame
  double max_speed = 1.5;
  std::size_t min_active = 4;  // shortest active interval, in frames
  std::size_t supersample = 4;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static SceneParams from_json(const nlohmann::json& j);
};

struct Actor {
  ShapeKind shape = ShapeKind::kSquare;
  Color color = Color::kRed;
  Motion motion = Motion::kStill;
  double size = 8.0;
  double x = 0.0, y = 0.0;  // top-left corner at t_start, pixels
  double speed = 0.0;
  std::size_t t_start = 0, t_end = 0;

  bool active(std::size_t t) const { return t >= t_start && t <= t_end; }
  // Top-left corner at frame t (extrapolated outside the active interval).
  std::pair<double, double> position(std::size_t t) const;
  bool same_description(const Actor& o) const { return shape == o.shape && color == o.color && motion == o.motion; }
};

struct SyntheticScene {
  std::uint64_t seed = 0;
  SceneParams params;
  std::vector<Actor> actors;
  std::size_t target_index = 0;

  const Actor& target() const { return actors.at(target_index); }
  nlohmann::ordered_json to_json() const;
  static SyntheticScene from_json(const nlohmann::json& j, std::uint64_t seed);
};

SyntheticScene generate_scene(std::uint64_t seed, const SceneParams& params);

// [T, 3, H, W] in [0, 1]; a pure function of the scene record. Values are
// float32-representable so frame files round-trip exactly.
Tensor render_scene(const SyntheticScene& scene);

// Exact normalized bounding box of an actor at frame t.
CenterBox actor_box(const Actor& actor, std::size_t t, const SceneParams& params);

// "the <color> <shape> moving <direction>" or "the <color> <shape> standing still".
std::string describe(const Actor& actor);

AnnotationRecord make_annotation(const SyntheticScene& scene, const std::string& video_id);

struct SyntheticSample {
  Tensor video;
  AnnotationRecord annotation;
};

// Deterministic in (seed, index).
SyntheticSample generate_sample(std::uint64_t seed, std::size_t index, const SceneParams& params);

// Keeps every `stride`-th frame, then caps the length at t_max with evenly
// spaced indices. GT frames map to the nearest kept index (t_s <= t_e kept).
SyntheticSample subsample_sample(const SyntheticSample& sample, std::size_t stride, std::size_t t_max);

// Index i of n_videos is in the training split iff i < round(0.8 * n).
std::size_t train_split_size(std::size_t n_videos);

}  // namespace tubedetr
