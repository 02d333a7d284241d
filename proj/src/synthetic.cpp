#include "tubedetr/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "tubedetr/errors.hpp"

namespace tubedetr {

namespace {

constexpr std::array<ShapeKind, 3> kShapes = {ShapeKind::kSquare, ShapeKind::kCircle, ShapeKind::kTriangle};
constexpr std::array<Color, 4> kColors = {Color::kRed, Color::kGreen, Color::kBlue, Color::kYellow};
constexpr std::array<Motion, 5> kMotions = {Motion::kLeft, Motion::kRight, Motion::kUp, Motion::kDown,
                                            Motion::kStill};

std::array<float, 3> rgb(Color c) {
  switch (c) {
    case Color::kRed: return {1.0f, 0.0f, 0.0f};
    case Color::kGreen: return {0.0f, 1.0f, 0.0f};
    case Color::kBlue: return {0.0f, 0.0f, 1.0f};
    case Color::kYellow: return {1.0f, 1.0f, 0.0f};
  }
  return {0.0f, 0.0f, 0.0f};
}

std::pair<double, double> direction(Motion m) {
  switch (m) {
    case Motion::kLeft: return {-1.0, 0.0};
    case Motion::kRight: return {1.0, 0.0};
    case Motion::kUp: return {0.0, -1.0};
    case Motion::kDown: return {0.0, 1.0};
    case Motion::kStill: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

// Point-in-shape test in the shape's local frame, u, v in [0, 1].
bool inside(ShapeKind s, double u, double v) {
  switch (s) {
    case ShapeKind::kSquare: return u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0;
    case ShapeKind::kCircle: return (u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5) < 0.25;
    case ShapeKind::kTriangle:
      // Apex at the top centre, base along the bottom edge.
      return v >= 0.0 && v < 1.0 && std::abs(u - 0.5) <= 0.5 * v;
  }
  return false;
}

template <typename E, std::size_t N>
E pick(Rng& rng, const std::array<E, N>& options) {
  return options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(N) - 1))];
}

template <typename E, std::size_t N>
E parse_enum(const std::string& name, const std::array<E, N>& options) {
  for (E e : options)
    if (to_string(e) == name) return e;
  throw FormatError("synthetic scene: unknown value '" + name + "'");
}

Actor random_actor(Rng& rng, const SceneParams& p) {
  Actor a;
  a.shape = pick(rng, kShapes);
  a.color = pick(rng, kColors);
  a.motion = pick(rng, kMotions);
  a.size = rng.uniform(p.min_size, p.max_size);
  const auto len = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(p.min_active), static_cast<std::int64_t>(p.frames)));
  a.t_start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(p.frames - len)));
  a.t_end = a.t_start + len - 1;

  const auto [dx, dy] = direction(a.motion);
  const double W = static_cast<double>(p.width), H = static_cast<double>(p.height);
  const double steps = static_cast<double>(len - 1);
  a.speed = 0.0;
  if (a.motion != Motion::kStill) {
    // Slow down when the canvas is too small to fit the full path.
    const double room = (dx != 0.0 ? W : H) - a.size;
    a.speed = rng.uniform(p.min_speed, p.max_speed);
    if (steps > 0.0) a.speed = std::min(a.speed, room / steps);
  }
  const double travel = a.speed * steps;
  const double x_lo = dx < 0.0 ? travel : 0.0, x_hi = W - a.size - (dx > 0.0 ? travel : 0.0);
  const double y_lo = dy < 0.0 ? travel : 0.0, y_hi = H - a.size - (dy > 0.0 ? travel : 0.0);
  a.x = rng.uniform(x_lo, std::max(x_lo, x_hi));
  a.y = rng.uniform(y_lo, std::max(y_lo, y_hi));
  return a;
}

}  // namespace

std::string to_string(ShapeKind s) {
  switch (s) {
    case ShapeKind::kSquare: return "square";
    case ShapeKind::kCircle: return "circle";
    case ShapeKind::kTriangle: return "triangle";
  }
  return "?";
}

std::string to_string(Color c) {
  switch (c) {
    case Color::kRed: return "red";
    case Color::kGreen: return "green";
    case Color::kBlue: return "blue";
    case Color::kYellow: return "yellow";
  }
  return "?";
}

std::string to_string(Motion m) {
  switch (m) {
    case Motion::kLeft: return "left";
    case Motion::kRight: return "right";
    case Motion::kUp: return "up";
    case Motion::kDown: return "down";
    case Motion::kStill: return "still";
  }
  return "?";
}

void SceneParams::validate() const {
  if (frames < 2) throw ConfigError("synthetic scene: need at least 2 frames");
  if (min_actors < 1 || max_actors < min_actors) throw ConfigError("synthetic scene: bad actor count range");
  if (!(min_size > 0.0) || max_size < min_size) throw ConfigError("synthetic scene: bad shape size range");
  if (max_size > static_cast<double>(std::min(height, width))) {
    throw ConfigError("synthetic scene: canvas " + std::to_string(height) + "x" + std::to_string(width) +
                      " is too small for shapes of size " + std::to_string(max_size));
  }
  if (!(min_speed > 0.0) || max_speed < min_speed) throw ConfigError("synthetic scene: bad speed range");
  if (min_active < 2 || min_active > frames) {
    throw ConfigError("synthetic scene: min_active must lie in [2, frames]");
  }
  if (supersample == 0) throw ConfigError("synthetic scene: supersample must be positive");
}

nlohmann::ordered_json SceneParams::to_json() const {
  return {{"frames", frames},       {"height", height},       {"width", width},
          {"min_actors", min_actors}, {"max_actors", max_actors}, {"min_size", min_size},
          {"max_size", max_size},   {"min_speed", min_speed}, {"max_speed", max_speed},
          {"min_active", min_active}, {"supersample", supersample}};
}

SceneParams SceneParams::from_json(const nlohmann::json& j) {
  SceneParams p;
  p.frames = j.value("frames", p.frames);
  p.height = j.value("height", p.height);
  p.width = j.value("width", p.width);
  p.min_actors = j.value("min_actors", p.min_actors);
  p.max_actors = j.value("max_actors", p.max_actors);
  p.min_size = j.value("min_size", p.min_size);
  p.max_size = j.value("max_size", p.max_size);
  p.min_speed = j.value("min_speed", p.min_speed);
  p.max_speed = j.value("max_speed", p.max_speed);
  p.min_active = j.value("min_active", p.min_active);
  p.supersample = j.value("supersample", p.supersample);
  return p;
}

std::pair<double, double> Actor::position(std::size_t t) const {
  const auto [dx, dy] = direction(motion);
  const double dt = static_cast<double>(t) - static_cast<double>(t_start);
  return {x + dx * speed * dt, y + dy * speed * dt};
}

nlohmann::ordered_json SyntheticScene::to_json() const {
  nlohmann::ordered_json actors_json = nlohmann::ordered_json::array();
  for (const auto& a : actors) {
    actors_json.push_back({{"shape", to_string(a.shape)},
                           {"color", to_string(a.color)},
                           {"motion", to_string(a.motion)},
                           {"size", a.size},
                           {"x", a.x},
                           {"y", a.y},
                           {"speed", a.speed},
                           {"t_start", a.t_start},
                           {"t_end", a.t_end}});
  }
  return {{"params", params.to_json()}, {"actors", actors_json}, {"target_index", target_index}};
}

SyntheticScene SyntheticScene::from_json(const nlohmann::json& j, std::uint64_t seed) {
  SyntheticScene s;
  s.seed = seed;
  try {
    s.params = SceneParams::from_json(j.at("params"));
    for (const auto& a : j.at("actors")) {
      Actor actor;
      actor.shape = parse_enum(a.at("shape").get<std::string>(), kShapes);
      actor.color = parse_enum(a.at("color").get<std::string>(), kColors);
      actor.motion = parse_enum(a.at("motion").get<std::string>(), kMotions);
      actor.size = a.at("size").get<double>();
      actor.x = a.at("x").get<double>();
      actor.y = a.at("y").get<double>();
      actor.speed = a.at("speed").get<double>();
      actor.t_start = a.at("t_start").get<std::size_t>();
      actor.t_end = a.at("t_end").get<std::size_t>();
      s.actors.push_back(actor);
    }
    s.target_index = j.at("target_index").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("synthetic scene: ") + e.what());
  }
  if (s.target_index >= s.actors.size()) throw FormatError("synthetic scene: target_index out of range");
  return s;
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneParams& params) {
  params.validate();
  Rng rng(seed);
  SyntheticScene scene;
  scene.seed = seed;
  scene.params = params;
  const auto n = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(params.min_actors),
                                                          static_cast<std::int64_t>(params.max_actors)));
  const Actor target = random_actor(rng, params);
  scene.actors.push_back(target);
  while (scene.actors.size() < n) {
    Actor a = random_actor(rng, params);
    if (a.same_description(target)) continue;  // the query must stay unambiguous
    scene.actors.push_back(a);
  }
  // Place the target at a random layer so occlusion order is not a cue.
  scene.target_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
  std::swap(scene.actors[0], scene.actors[scene.target_index]);
  return scene;
}

Tensor render_scene(const SyntheticScene& scene) {
  const auto& p = scene.params;
  const std::size_t T = p.frames, H = p.height, W = p.width, S = p.supersample;
  std::vector<float> img(T * 3 * H * W, 0.0f);
  const double inv = 1.0 / static_cast<double>(S);
  const float inv_count = 1.0f / static_cast<float>(S * S);
  for (std::size_t t = 0; t < T; ++t) {
    float* frame = img.data() + t * 3 * H * W;
    for (const auto& a : scene.actors) {
      if (!a.active(t)) continue;
      const auto [x0, y0] = a.position(t);
      const auto color = rgb(a.color);
      const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(y0)));
      const auto r1 = std::min(H, static_cast<std::size_t>(std::max(0.0, std::ceil(y0 + a.size))));
      const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(x0)));
      const auto c1 = std::min(W, static_cast<std::size_t>(std::max(0.0, std::ceil(x0 + a.size))));
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          std::size_t hits = 0;
          for (std::size_t sy = 0; sy < S; ++sy)
            for (std::size_t sx = 0; sx < S; ++sx) {
              const double px = static_cast<double>(c) + (static_cast<double>(sx) + 0.5) * inv;
              const double py = static_cast<double>(r) + (static_cast<double>(sy) + 0.5) * inv;
              hits += inside(a.shape, (px - x0) / a.size, (py - y0) / a.size);
            }
          if (!hits) continue;
          const float alpha = static_cast<float>(hits) * inv_count;
          for (std::size_t ch = 0; ch < 3; ++ch) {
            float& v = frame[ch * H * W + r * W + c];
            v = (1.0f - alpha) * v + alpha * color[ch];
          }
        }
      }
    }
  }
  return Tensor({T, 3, H, W}, std::vector<double>(img.begin(), img.end()));
}

CenterBox actor_box(const Actor& actor, std::size_t t, const SceneParams& params) {
  const auto [x0, y0] = actor.position(t);
  const double W = static_cast<double>(params.width), H = static_cast<double>(params.height);
  const double x1 = std::clamp(x0, 0.0, W), x2 = std::clamp(x0 + actor.size, 0.0, W);
  const double y1 = std::clamp(y0, 0.0, H), y2 = std::clamp(y0 + actor.size, 0.0, H);
  return {(x1 + x2) / (2.0 * W), (y1 + y2) / (2.0 * H), (x2 - x1) / W, (y2 - y1) / H};
}

std::string describe(const Actor& a) {
  std::string s = "the " + to_string(a.color) + " " + to_string(a.shape);
  return a.motion == Motion::kStill ? s + " standing still" : s + " moving " + to_string(a.motion);
}

AnnotationRecord make_annotation(const SyntheticScene& scene, const std::string& video_id) {
  const Actor& target = scene.target();
  AnnotationRecord r;
  r.video_id = video_id;
  r.frames = scene.params.frames;
  r.query = describe(target);
  r.t_start = target.t_start;
  r.t_end = target.t_end;
  for (std::size_t t = target.t_start; t <= target.t_end; ++t) r.boxes.push_back(actor_box(target, t, scene.params));
  r.seed = scene.seed;
  r.renderer = scene.to_json();
  r.validate();
  return r;
}

SyntheticSample generate_sample(std::uint64_t seed, std::size_t index, const SceneParams& params) {
  const auto scene = generate_scene(mix_seed(seed, index), params);
  char id[32];
  std::snprintf(id, sizeof(id), "video_%05zu", index);
  return {render_scene(scene), make_annotation(scene, id)};
}

SyntheticSample subsample_sample(const SyntheticSample& sample, std::size_t stride, std::size_t t_max) {
  if (stride == 0) throw ConfigError("subsample: stride must be positive");
  if (t_max < 2) throw ConfigError("subsample: T_max must be at least 2");
  const auto& video = sample.video;
  const std::size_t T = video.dim(0);
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < T; t += stride) keep.push_back(t);
  if (keep.size() > t_max) {
    std::vector<std::size_t> even(t_max);
    const double span = static_cast<double>(keep.size() - 1) / static_cast<double>(t_max - 1);
    for (std::size_t i = 0; i < t_max; ++i) even[i] = keep[static_cast<std::size_t>(std::lround(i * span))];
    keep = std::move(even);
  }
  if (keep.size() == T) return sample;

  auto nearest = [&](std::size_t t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < keep.size(); ++i) {
      const auto d = [&](std::size_t j) { return keep[j] > t ? keep[j] - t : t - keep[j]; };
      if (d(i) < d(best)) best = i;
    }
    return best;
  };
  const auto& a = sample.annotation;
  std::size_t ts = nearest(a.t_start), te = nearest(a.t_end);
  te = std::max(ts, te);

  const std::size_t frame_size = video.size() / T;
  std::vector<double> data;
  data.reserve(keep.size() * frame_size);
  for (std::size_t t : keep) {
    const auto src = video.data().subspan(t * frame_size, frame_size);
    data.insert(data.end(), src.begin(), src.end());
  }
  Shape shape = video.shape();
  shape[0] = keep.size();

  AnnotationRecord out = a;
  out.frames = keep.size();
  out.t_start = ts;
  out.t_end = te;
  out.boxes.clear();
  for (std::size_t i = ts; i <= te; ++i) {
    // A kept frame mapped into the span may sit just outside the original
    // interval; use the nearest annotated box.
    const std::size_t src = std::clamp(keep[i], a.t_start, a.t_end);
    out.boxes.push_back(a.boxes[src - a.t_start]);
  }
  out.validate();
  return {Tensor(std::move(shape), std::move(data)), out};
}

std::size_t train_split_size(std::size_t n_videos) {
  return static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(n_videos)));
}

}  // namespace tubedetr
