#include "tubedetr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tubedetr/errors.hpp"

namespace tubedetr {

std::vector<double> build_target_distribution(std::size_t center, std::size_t frames) {
  if (center >= frames) {
    throw std::out_of_range("target distribution: center " + std::to_string(center) + " outside [0, " +
                            std::to_string(frames) + ")");
  }
  std::vector<double> tau(frames);
  double total = 0.0;
  for (std::size_t i = 0; i < frames; ++i) {
    const double off = static_cast<double>(i) - static_cast<double>(center);
    tau[i] = std::exp(-0.5 * off * off);
    total += tau[i];
  }
  for (auto& v : tau) v /= total;
  return tau;
}

GroundTruthTube GroundTruthTube::create(std::size_t frames, std::size_t t_start, std::size_t t_end, Tensor boxes) {
  if (t_start > t_end || t_end >= frames) {
    throw ValidationError("ground-truth tube: need 0 <= t_s <= t_e < T, got t_s=" + std::to_string(t_start) +
                          " t_e=" + std::to_string(t_end) + " T=" + std::to_string(frames));
  }
  if (boxes.shape() != Shape{t_end - t_start + 1, 4}) {
    throw ValidationError("ground-truth tube: expected " + std::to_string(t_end - t_start + 1) +
                          " boxes, got shape " + to_string(boxes.shape()));
  }
  GroundTruthTube gt;
  gt.frames = frames;
  gt.t_start = t_start;
  gt.t_end = t_end;
  gt.boxes = boxes.detach();
  gt.start_target = build_target_distribution(t_start, frames);
  gt.end_target = build_target_distribution(t_end, frames);
  return gt;
}

namespace {

Tensor column(const Tensor& boxes, std::size_t c) { return ops::slice(boxes, 1, c, c + 1); }

struct Corners {
  Tensor x1, y1, x2, y2;
};

Corners corners(const Tensor& boxes) {
  auto cx = column(boxes, 0), cy = column(boxes, 1);
  auto hw = ops::scale(column(boxes, 2), 0.5), hh = ops::scale(column(boxes, 3), 0.5);
  return {ops::sub(cx, hw), ops::sub(cy, hh), ops::add(cx, hw), ops::add(cy, hh)};
}

void check_distribution(const Tensor& p, std::size_t frames, const char* what) {
  if (p.shape() != Shape{frames}) {
    throw DimensionError(std::string(what) + ": expected [" + std::to_string(frames) + "], got " + to_string(p.shape()));
  }
  double total = 0.0;
  for (double v : p.data()) total += v;
  if (std::abs(total - 1.0) > 1e-6) {
    throw NumericError(std::string(what) + " is not normalized (sums to " + std::to_string(total) + ")");
  }
}

}  // namespace

Tensor kl_divergence(const Tensor& predicted, const std::vector<double>& target) {
  if (predicted.shape() != Shape{target.size()}) {
    throw DimensionError("kl divergence: predicted " + to_string(predicted.shape()) + " vs target of length " +
                         std::to_string(target.size()));
  }
  double entropy_term = 0.0;
  for (double t : target) entropy_term += t * std::log(std::max(t, kLogClamp));
  Tensor tgt({target.size()}, target);
  auto cross = ops::sum(ops::mul(ops::log(ops::clamp_min(predicted, kLogClamp)), tgt));
  return ops::add_scalar(ops::scale(cross, -1.0), entropy_term);
}

SpatialLosses spatial_losses(const Tensor& boxes, const GroundTruthTube& gt) {
  if (boxes.shape() != Shape{gt.frames, 4}) {
    throw DimensionError("spatial losses: predicted boxes " + to_string(boxes.shape()) + " but T=" +
                         std::to_string(gt.frames));
  }
  const double n = static_cast<double>(gt.length());
  const auto seg = ops::slice(boxes, 0, gt.t_start, gt.t_end + 1);
  SpatialLosses out;
  out.l1 = ops::scale(ops::sum(ops::abs(ops::sub(seg, gt.boxes))), 1.0 / n);

  const auto p = corners(seg);
  const auto g = corners(gt.boxes);
  auto inter_w = ops::relu(ops::sub(ops::minimum(p.x2, g.x2), ops::maximum(p.x1, g.x1)));
  auto inter_h = ops::relu(ops::sub(ops::minimum(p.y2, g.y2), ops::maximum(p.y1, g.y1)));
  auto inter = ops::mul(inter_w, inter_h);
  auto area_p = ops::mul(column(seg, 2), column(seg, 3));
  auto area_g = ops::mul(column(gt.boxes, 2), column(gt.boxes, 3));
  auto uni = ops::sub(ops::add(area_p, area_g), inter);
  auto iou = ops::div(inter, uni);
  auto hull = ops::mul(ops::sub(ops::maximum(p.x2, g.x2), ops::minimum(p.x1, g.x1)),
                       ops::sub(ops::maximum(p.y2, g.y2), ops::minimum(p.y1, g.y1)));
  auto giou = ops::sub(iou, ops::div(ops::sub(hull, uni), hull));
  out.giou = ops::add_scalar(ops::scale(ops::sum(giou), -1.0 / n), 1.0);
  return out;
}

TemporalLosses temporal_losses(const Tensor& start_prob, const Tensor& end_prob, const GroundTruthTube& gt,
                               const Tensor& attention) {
  check_distribution(start_prob, gt.frames, "start distribution");
  check_distribution(end_prob, gt.frames, "end distribution");
  TemporalLosses out;
  out.kl = ops::add(kl_divergence(start_prob, gt.start_target), kl_divergence(end_prob, gt.end_target));
  if (!attention.defined()) return out;

  const std::size_t T = gt.frames;
  if (attention.rank() != 3 || attention.dim(1) != T || attention.dim(2) != T) {
    throw DimensionError("guided attention: expected [heads, " + std::to_string(T) + ", " + std::to_string(T) +
                         "], got " + to_string(attention.shape()));
  }
  const auto a = attention.data();
  for (std::size_t r = 0; r < a.size() / T; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < T; ++c) total += a[r * T + c];
    if (std::abs(total - 1.0) > 1e-6) throw NumericError("guided attention: attention row is not normalized");
  }
  auto mean_heads = ops::reshape(ops::mean_axis(attention, 0), {T, T});
  auto inside = ops::sum_axis(ops::slice(mean_heads, 1, gt.t_start, gt.t_end + 1), 1);
  out.att = ops::scale(ops::mean(ops::log(ops::add_scalar(inside, kLogClamp))), -1.0);
  return out;
}

LossBreakdown total_loss(const std::vector<TubePrediction>& predictions, const std::vector<Tensor>& attention,
                         const GroundTruthTube& gt, const LossWeights& weights) {
  if (predictions.empty()) throw std::invalid_argument("total loss: no decoder layers");
  if (!attention.empty() && attention.size() != predictions.size()) {
    throw DimensionError("total loss: " + std::to_string(predictions.size()) + " prediction layers but " +
                         std::to_string(attention.size()) + " attention layers");
  }
  if (weights.l1 < 0 || weights.giou < 0 || weights.kl < 0 || weights.att < 0) {
    throw ConfigError("total loss: weights must be nonnegative");
  }
  LossBreakdown out;
  std::vector<Tensor> terms;
  auto add_term = [&](const Tensor& t, double w) {
    if (w != 0.0) terms.push_back(ops::scale(t, w));
  };
  for (std::size_t l = 0; l < predictions.size(); ++l) {
    const auto& p = predictions[l];
    const auto sp = spatial_losses(p.boxes, gt);
    const auto tp = temporal_losses(p.start_prob, p.end_prob, gt, attention.empty() ? Tensor{} : attention[l]);
    out.l1 += sp.l1.item();
    out.giou += sp.giou.item();
    out.kl += tp.kl.item();
    add_term(sp.l1, weights.l1);
    add_term(sp.giou, weights.giou);
    add_term(tp.kl, weights.kl);
    if (tp.att.defined()) {
      out.att += tp.att.item();
      add_term(tp.att, weights.att);
    }
  }
  if (terms.empty()) {
    out.total = Tensor::scalar(0.0);
    return out;
  }
  Tensor total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = ops::add(total, terms[i]);
  out.total = total;
  return out;
}

}  // namespace tubedetr
