#include "tubedetr/augment.hpp"

#include <algorithm>
#include <cmath>

#include "tubedetr/errors.hpp"

namespace tubedetr {

SyntheticSample temporal_crop(const SyntheticSample& sample, Rng& rng) {
  const auto& a = sample.annotation;
  const std::size_t T = sample.video.dim(0);
  auto lo = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(a.t_start)));
  auto hi = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(a.t_end), static_cast<std::int64_t>(T) - 1));
  // Decoding needs two frames.
  if (hi == lo) {
    if (hi + 1 < T) ++hi;
    else if (lo > 0) --lo;
    else return sample;
  }
  if (lo == 0 && hi == T - 1) return sample;

  const std::size_t frame_size = sample.video.size() / T;
  const auto src = sample.video.data().subspan(lo * frame_size, (hi - lo + 1) * frame_size);
  Shape shape = sample.video.shape();
  shape[0] = hi - lo + 1;

  SyntheticSample out{Tensor(std::move(shape), std::vector<double>(src.begin(), src.end())), a};
  out.annotation.frames = hi - lo + 1;
  out.annotation.t_start -= lo;
  out.annotation.t_end -= lo;
  out.annotation.validate();
  return out;
}

Tensor crop_resize(const Tensor& video, double x0, double y0, double x1, double y1, std::size_t out_h,
                   std::size_t out_w) {
  if (video.rank() != 4) throw DimensionError("crop_resize: expected [T, C, H, W]");
  const std::size_t planes = video.dim(0) * video.dim(1), H = video.dim(2), W = video.dim(3);
  const double sx = (x1 - x0) / static_cast<double>(out_w), sy = (y1 - y0) / static_cast<double>(out_h);
  std::vector<double> out(planes * out_h * out_w);
  const auto in = video.data();
  for (std::size_t r = 0; r < out_h; ++r) {
    const double y = std::clamp(y0 + (static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, static_cast<double>(H - 1));
    const auto ya = static_cast<std::size_t>(y);
    const std::size_t yb = std::min(ya + 1, H - 1);
    const double fy = y - static_cast<double>(ya);
    for (std::size_t c = 0; c < out_w; ++c) {
      const double x =
          std::clamp(x0 + (static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, static_cast<double>(W - 1));
      const auto xa = static_cast<std::size_t>(x);
      const std::size_t xb = std::min(xa + 1, W - 1);
      const double fx = x - static_cast<double>(xa);
      for (std::size_t p = 0; p < planes; ++p) {
        const double* img = in.data() + p * H * W;
        const double top = (1 - fx) * img[ya * W + xa] + fx * img[ya * W + xb];
        const double bot = (1 - fx) * img[yb * W + xa] + fx * img[yb * W + xb];
        // Keep values float32-representable like the stored frames.
        out[p * out_h * out_w + r * out_w + c] = static_cast<float>((1 - fy) * top + fy * bot);
      }
    }
  }
  return Tensor({video.dim(0), video.dim(1), out_h, out_w}, std::move(out));
}

SyntheticSample spatial_crop(const SyntheticSample& sample, Rng& rng) {
  const auto& a = sample.annotation;
  const std::size_t H = sample.video.dim(2), W = sample.video.dim(3);
  const double Wd = static_cast<double>(W), Hd = static_cast<double>(H);
  double bx1 = 1.0, by1 = 1.0, bx2 = 0.0, by2 = 0.0;
  for (const auto& b : a.boxes) {
    const auto c = to_corners(b);
    bx1 = std::min(bx1, c[0]);
    by1 = std::min(by1, c[1]);
    bx2 = std::max(bx2, c[2]);
    by2 = std::max(by2, c[3]);
  }
  // Integer pixel bounds so that the crop never cuts into a box.
  const double x0 = std::floor(rng.uniform(0.0, std::floor(std::max(0.0, bx1 * Wd)) + 1.0));
  const double y0 = std::floor(rng.uniform(0.0, std::floor(std::max(0.0, by1 * Hd)) + 1.0));
  const double xmin = std::ceil(std::min(Wd, bx2 * Wd)), ymin = std::ceil(std::min(Hd, by2 * Hd));
  const double x1 = std::min(Wd, std::floor(rng.uniform(xmin, Wd + 1.0)));
  const double y1 = std::min(Hd, std::floor(rng.uniform(ymin, Hd + 1.0)));
  if (x0 == 0.0 && y0 == 0.0 && x1 == Wd && y1 == Hd) return sample;

  SyntheticSample out{crop_resize(sample.video, x0, y0, x1, y1, H, W), a};
  const double cw = x1 - x0, ch = y1 - y0;
  for (auto& b : out.annotation.boxes) {
    const auto c = to_corners(b);
    const CornerBox n{std::clamp((c[0] * Wd - x0) / cw, 0.0, 1.0), std::clamp((c[1] * Hd - y0) / ch, 0.0, 1.0),
                      std::clamp((c[2] * Wd - x0) / cw, 0.0, 1.0), std::clamp((c[3] * Hd - y0) / ch, 0.0, 1.0)};
    b = to_center(n);
  }
  out.annotation.validate();
  return out;
}

SyntheticSample augment_sample(const SyntheticSample& sample, const AugmentConfig& config, Rng& rng) {
  if (!config.enabled) return sample;
  SyntheticSample out = sample;
  if (rng.bernoulli(config.temporal_probability)) out = temporal_crop(out, rng);
  if (rng.bernoulli(config.spatial_probability)) out = spatial_crop(out, rng);
  return out;
}

}  // namespace tubedetr
