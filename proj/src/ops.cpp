#include "tubedetr/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tubedetr/errors.hpp"
#include "tubedetr/tape.hpp"

namespace tubedetr::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ImplPtr = std::shared_ptr<TensorImpl>;

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->defined() && t->requires_grad(); });
}

Tensor make_output(Shape shape, std::vector<double> data, bool requires_grad, const char* op) {
  Tensor out(std::move(shape), std::move(data), requires_grad);
  check_finite(out, op);
  return out;
}

void require_defined(const Tensor& t, const char* op, const char* what) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined " + what);
}

// Returns true when `suffix` equals the trailing dimensions of `full`.
bool is_suffix(const Shape& suffix, const Shape& full) {
  if (suffix.size() > full.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), full.rbegin());
}

struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " + to_string(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

template <class F, class DF>
Tensor unary(const Tensor& x, const char* op, F f, DF df) {
  require_defined(x, op, "input");
  const auto xd = x.data();
  std::vector<double> y(xd.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xd[i]);
  const bool rec = recording({&x});
  Tensor out = make_output(x.shape(), std::move(y), rec, op);
  if (rec) {
    active_tape()->record(op, {out.impl()}, [xi = x.impl(), oi = out.impl(), df] {
      xi->ensure_grad();
      for (std::size_t i = 0; i < xi->data.size(); ++i) xi->grad[i] += oi->grad[i] * df(xi->data[i], oi->data[i]);
    });
  }
  return out;
}

// DA/DB map (a, b, y) to the partial derivative of y with respect to a / b.
template <class F, class DA, class DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f, DA da, DB db) {
  require_defined(a, op, "lhs");
  require_defined(b, op, "rhs");
  if (!is_suffix(b.shape(), a.shape())) {
    throw DimensionError(std::string(op) + ": cannot broadcast " + to_string(b.shape()) + " onto " +
                         to_string(a.shape()));
  }
  const auto ad = a.data();
  const auto bd = b.data();
  const std::size_t nb = bd.size();
  std::vector<double> y(ad.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(ad[i], bd[i % nb]);
  const bool rec = recording({&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), rec, op);
  if (rec) {
    active_tape()->record(op, {out.impl()}, [ai = a.impl(), bi = b.impl(), oi = out.impl(), da, db] {
      const std::size_t nb = bi->data.size();
      if (ai->requires_grad) {
        ai->ensure_grad();
        for (std::size_t i = 0; i < ai->data.size(); ++i)
          ai->grad[i] += oi->grad[i] * da(ai->data[i], bi->data[i % nb], oi->data[i]);
      }
      if (bi->requires_grad) {
        bi->ensure_grad();
        for (std::size_t i = 0; i < ai->data.size(); ++i)
          bi->grad[i % nb] += oi->grad[i] * db(ai->data[i], bi->data[i % nb], oi->data[i]);
      }
    });
  }
  return out;
}

std::size_t mask_offset_check(const Mask& mask, const Shape& logits, const char* op) {
  if (mask.empty()) return 0;
  if (mask.allowed.size() != numel(mask.shape) || !is_suffix(mask.shape, logits)) {
    throw DimensionError(std::string(op) + ": mask shape " + to_string(mask.shape) + " incompatible with " +
                         to_string(logits));
  }
  return mask.allowed.size();
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_defined(x, "linear", "input");
  require_defined(weight, "linear", "weight");
  if (weight.rank() != 2 || x.rank() == 0 || x.shape().back() != weight.dim(1)) {
    throw DimensionError("linear: input " + to_string(x.shape()) + " incompatible with weight " +
                         to_string(weight.shape()));
  }
  const std::size_t in = weight.dim(1), out_dim = weight.dim(0), rows = x.size() / in;
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != out_dim)) {
    throw DimensionError("linear: bias " + to_string(bias.shape()) + " incompatible with weight " +
                         to_string(weight.shape()));
  }
  std::vector<double> y(rows * out_dim);
  {
    ConstMap X(x.data().data(), rows, in);
    ConstMap W(weight.data().data(), out_dim, in);
    MutMap Y(y.data(), rows, out_dim);
    Y.noalias() = X * W.transpose();
    if (bias.defined()) {
      Eigen::Map<const Eigen::RowVectorXd> b(bias.data().data(), out_dim);
      Y.rowwise() += b;
    }
  }
  Shape shape = x.shape();
  shape.back() = out_dim;
  const bool rec = recording({&x, &weight, &bias});
  Tensor out = make_output(std::move(shape), std::move(y), rec, "linear");
  if (rec) {
    ImplPtr bi = bias.defined() ? bias.impl() : nullptr;
    active_tape()->record("linear", {out.impl()}, [xi = x.impl(), wi = weight.impl(), bi, oi = out.impl(), rows, in,
                                                   out_dim] {
      ConstMap dY(oi->grad.data(), rows, out_dim);
      if (xi->requires_grad) {
        xi->ensure_grad();
        MutMap dX(xi->grad.data(), rows, in);
        dX.noalias() += dY * ConstMap(wi->data.data(), out_dim, in);
      }
      if (wi->requires_grad) {
        wi->ensure_grad();
        MutMap dW(wi->grad.data(), out_dim, in);
        dW.noalias() += dY.transpose() * ConstMap(xi->data.data(), rows, in);
      }
      if (bi && bi->requires_grad) {
        bi->ensure_grad();
        Eigen::Map<Eigen::RowVectorXd> db(bi->grad.data(), out_dim);
        db += dY.colwise().sum();
      }
    });
  }
  return out;
}

Tensor softmax_masked(const Tensor& logits, const Mask& mask) {
  require_defined(logits, "softmax_masked", "logits");
  if (logits.rank() == 0) throw DimensionError("softmax_masked: scalar logits");
  const std::size_t msize = mask_offset_check(mask, logits.shape(), "softmax_masked");
  const std::size_t n = logits.shape().back();
  const std::size_t rows = logits.size() / n;
  const auto ld = logits.data();
  std::vector<double> p(ld.size(), 0.0);
  auto allowed = [&](std::size_t flat) { return msize == 0 || mask.allowed[flat % msize] != 0; };
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * n;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (allowed(base + j)) {
        mx = std::max(mx, ld[base + j]);
        any = true;
      }
    }
    if (!any) throw NumericError("softmax_masked: row " + std::to_string(r) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (allowed(base + j)) {
        p[base + j] = std::exp(ld[base + j] - mx);
        total += p[base + j];
      }
    }
    for (std::size_t j = 0; j < n; ++j) p[base + j] /= total;
  }
  const bool rec = recording({&logits});
  Tensor out = make_output(logits.shape(), std::move(p), rec, "softmax_masked");
  if (rec) {
    active_tape()->record("softmax_masked", {out.impl()}, [li = logits.impl(), oi = out.impl(), n, rows] {
      li->ensure_grad();
      // Blocked entries have p == 0, so they receive exactly zero gradient.
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += oi->data[base + j] * oi->grad[base + j];
        for (std::size_t j = 0; j < n; ++j)
          li->grad[base + j] += oi->data[base + j] * (oi->grad[base + j] - dot);
      }
    });
  }
  return out;
}

Tensor softmax(const Tensor& logits) { return softmax_masked(logits, Mask{}); }

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift) {
  require_defined(x, "layer_norm", "input");
  if (x.rank() == 0) throw DimensionError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gain.rank() != 1 || shift.rank() != 1 || gain.dim(0) != d || shift.dim(0) != d) {
    throw DimensionError("layer_norm: input " + to_string(x.shape()) + " with gain " + to_string(gain.shape()) +
                         " and shift " + to_string(shift.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto xd = x.data();
  const auto g = gain.data();
  const auto s = shift.data();
  std::vector<double> y(xd.size());
  std::vector<double> xhat(xd.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (row[j] - mu) * inv_std[r];
      y[r * d + j] = g[j] * xhat[r * d + j] + s[j];
    }
  }
  const bool rec = recording({&x, &gain, &shift});
  Tensor out = make_output(x.shape(), std::move(y), rec, "layer_norm");
  if (rec) {
    active_tape()->record("layer_norm", {out.impl()},
                          [xi = x.impl(), gi = gain.impl(), si = shift.impl(), oi = out.impl(), xhat = std::move(xhat),
                           inv_std = std::move(inv_std), rows, d] {
                            if (gi->requires_grad) gi->ensure_grad();
                            if (si->requires_grad) si->ensure_grad();
                            if (xi->requires_grad) xi->ensure_grad();
                            std::vector<double> dxhat(d);
                            for (std::size_t r = 0; r < rows; ++r) {
                              const double* dy = oi->grad.data() + r * d;
                              const double* xh = xhat.data() + r * d;
                              double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                              for (std::size_t j = 0; j < d; ++j) {
                                if (gi->requires_grad) gi->grad[j] += dy[j] * xh[j];
                                if (si->requires_grad) si->grad[j] += dy[j];
                                dxhat[j] = dy[j] * gi->data[j];
                                mean_dxhat += dxhat[j];
                                mean_dxhat_xhat += dxhat[j] * xh[j];
                              }
                              if (!xi->requires_grad) continue;
                              mean_dxhat /= static_cast<double>(d);
                              mean_dxhat_xhat /= static_cast<double>(d);
                              for (std::size_t j = 0; j < d; ++j)
                                xi->grad[r * d + j] += inv_std[r] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
                            }
                          });
  }
  return out;
}

AttentionResult multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Mask& mask,
                                     std::size_t heads) {
  require_defined(q, "multi_head_attention", "query");
  require_defined(k, "multi_head_attention", "key");
  require_defined(v, "multi_head_attention", "value");
  const bool batched = q.rank() == 3;
  if ((q.rank() != 2 && q.rank() != 3) || k.rank() != q.rank() || v.rank() != q.rank()) {
    throw DimensionError("multi_head_attention: expected rank-2 or rank-3 q/k/v, got " + to_string(q.shape()) + ", " +
                         to_string(k.shape()) + ", " + to_string(v.shape()));
  }
  const std::size_t B = batched ? q.dim(0) : 1;
  const std::size_t Lq = q.dim(q.rank() - 2), d = q.shape().back();
  const std::size_t Lk = k.dim(k.rank() - 2);
  if (k.shape().back() != d || v.shape() != k.shape() || (batched && k.dim(0) != B)) {
    throw DimensionError("multi_head_attention: incompatible q/k/v shapes " + to_string(q.shape()) + ", " +
                         to_string(k.shape()) + ", " + to_string(v.shape()));
  }
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("multi_head_attention: model dim " + std::to_string(d) + " not divisible by heads " +
                      std::to_string(heads));
  }
  if (!mask.empty() && (mask.shape != Shape{Lq, Lk} || mask.allowed.size() != Lq * Lk)) {
    throw DimensionError("multi_head_attention: mask shape " + to_string(mask.shape) + " but expected [" +
                         std::to_string(Lq) + ", " + std::to_string(Lk) + "]");
  }
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Allowed key indices per query row, shared by every batch entry and head.
  auto allowed = std::make_shared<std::vector<std::vector<std::size_t>>>(Lq);
  for (std::size_t i = 0; i < Lq; ++i) {
    auto& row = (*allowed)[i];
    for (std::size_t j = 0; j < Lk; ++j) {
      if (mask.empty() || mask.allowed[i * Lk + j]) row.push_back(j);
    }
    if (row.empty()) throw NumericError("multi_head_attention: query row " + std::to_string(i) + " is fully masked");
  }

  const auto qd = q.data(), kd = k.data(), vd = v.data();
  std::vector<double> out(B * Lq * d, 0.0);
  std::vector<double> w(B * heads * Lq * Lk, 0.0);
  std::vector<double> scores;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < Lq; ++i) {
        const auto& keys = (*allowed)[i];
        const double* qi = qd.data() + (b * Lq + i) * d + h * dh;
        scores.resize(keys.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < keys.size(); ++a) {
          const double* kj = kd.data() + (b * Lk + keys[a]) * d + h * dh;
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          scores[a] = s * scale;
          mx = std::max(mx, scores[a]);
        }
        double total = 0.0;
        for (auto& s : scores) {
          s = std::exp(s - mx);
          total += s;
        }
        double* wrow = w.data() + ((b * heads + h) * Lq + i) * Lk;
        double* orow = out.data() + (b * Lq + i) * d + h * dh;
        for (std::size_t a = 0; a < keys.size(); ++a) {
          const double p = scores[a] / total;
          wrow[keys[a]] = p;
          const double* vj = vd.data() + (b * Lk + keys[a]) * d + h * dh;
          for (std::size_t c = 0; c < dh; ++c) orow[c] += p * vj[c];
        }
      }
    }
  }

  const bool rec = recording({&q, &k, &v});
  Shape out_shape = batched ? Shape{B, Lq, d} : Shape{Lq, d};
  Shape w_shape = batched ? Shape{B, heads, Lq, Lk} : Shape{heads, Lq, Lk};
  AttentionResult result{make_output(std::move(out_shape), std::move(out), rec, "multi_head_attention"),
                         make_output(std::move(w_shape), std::move(w), rec, "multi_head_attention")};
  if (rec) {
    active_tape()->record(
        "multi_head_attention", {result.output.impl(), result.weights.impl()},
        [qi = q.impl(), ki = k.impl(), vi = v.impl(), oi = result.output.impl(), wi = result.weights.impl(), allowed, B,
         Lq, Lk, d, dh, heads, scale] {
          for (auto* t : {qi.get(), ki.get(), vi.get()})
            if (t->requires_grad) t->ensure_grad();
          std::vector<double> dq(qi->data.size(), 0.0), dk(ki->data.size(), 0.0), dv(vi->data.size(), 0.0);
          std::vector<double> dp;
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t h = 0; h < heads; ++h) {
              for (std::size_t i = 0; i < Lq; ++i) {
                const auto& keys = (*allowed)[i];
                const std::size_t wbase = ((b * heads + h) * Lq + i) * Lk;
                const double* dout = oi->grad.data() + (b * Lq + i) * d + h * dh;
                const double* qrow = qi->data.data() + (b * Lq + i) * d + h * dh;
                dp.resize(keys.size());
                double dot = 0.0;
                for (std::size_t a = 0; a < keys.size(); ++a) {
                  const std::size_t j = keys[a];
                  const double p = wi->data[wbase + j];
                  const double* vj = vi->data.data() + (b * Lk + j) * d + h * dh;
                  double* dvj = dv.data() + (b * Lk + j) * d + h * dh;
                  double g = wi->grad[wbase + j];
                  for (std::size_t c = 0; c < dh; ++c) {
                    g += dout[c] * vj[c];
                    dvj[c] += p * dout[c];
                  }
                  dp[a] = g;
                  dot += p * g;
                }
                double* dqi = dq.data() + (b * Lq + i) * d + h * dh;
                for (std::size_t a = 0; a < keys.size(); ++a) {
                  const std::size_t j = keys[a];
                  const double ds = wi->data[wbase + j] * (dp[a] - dot) * scale;
                  const double* kj = ki->data.data() + (b * Lk + j) * d + h * dh;
                  double* dkj = dk.data() + (b * Lk + j) * d + h * dh;
                  for (std::size_t c = 0; c < dh; ++c) {
                    dqi[c] += ds * kj[c];
                    dkj[c] += ds * qrow[c];
                  }
                }
              }
            }
          }
          auto flush = [](TensorImpl* t, const std::vector<double>& g) {
            if (!t->requires_grad) return;
            for (std::size_t n = 0; n < g.size(); ++n) t->grad[n] += g[n];
          };
          flush(qi.get(), dq);
          flush(ki.get(), dk);
          flush(vi.get(), dv);
        });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double x, double y, double) { return -x / (y * y); });
}

// Ties send the gradient to the left operand.
Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "minimum", [](double x, double y) { return std::min(x, y); },
      [](double x, double y, double) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y, double) { return x <= y ? 0.0 : 1.0; });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "maximum", [](double x, double y) { return std::max(x, y); },
      [](double x, double y, double) { return x >= y ? 1.0 : 0.0; },
      [](double x, double y, double) { return x >= y ? 0.0 : 1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, "add_scalar", [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid",
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, "abs", [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor clamp_min(const Tensor& x, double floor) {
  return unary(
      x, "clamp_min", [floor](double v) { return std::max(v, floor); },
      [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum", "input");
  double total = 0.0;
  for (double v : x.data()) total += v;
  const bool rec = recording({&x});
  Tensor out = make_output({}, {total}, rec, "sum");
  if (rec) {
    active_tape()->record("sum", {out.impl()}, [xi = x.impl(), oi = out.impl()] {
      xi->ensure_grad();
      for (auto& g : xi->grad) g += oi->grad[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor sum_axis(const Tensor& x, std::size_t axis) {
  require_defined(x, "sum_axis", "input");
  const auto sp = split_at(x.shape(), axis, "sum_axis");
  const auto xd = x.data();
  std::vector<double> y(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t j = 0; j < sp.n; ++j)
      for (std::size_t i = 0; i < sp.inner; ++i) y[o * sp.inner + i] += xd[(o * sp.n + j) * sp.inner + i];
  Shape shape = x.shape();
  shape[axis] = 1;
  const bool rec = recording({&x});
  Tensor out = make_output(std::move(shape), std::move(y), rec, "sum_axis");
  if (rec) {
    active_tape()->record("sum_axis", {out.impl()}, [xi = x.impl(), oi = out.impl(), sp] {
      xi->ensure_grad();
      for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t j = 0; j < sp.n; ++j)
          for (std::size_t i = 0; i < sp.inner; ++i)
            xi->grad[(o * sp.n + j) * sp.inner + i] += oi->grad[o * sp.inner + i];
    });
  }
  return out;
}

Tensor mean_axis(const Tensor& x, std::size_t axis) {
  return scale(sum_axis(x, axis), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined(x, "reshape", "input");
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  const auto xd = x.data();
  const bool rec = recording({&x});
  Tensor out = make_output(std::move(shape), std::vector<double>(xd.begin(), xd.end()), rec, "reshape");
  if (rec) {
    active_tape()->record("reshape", {out.impl()}, [xi = x.impl(), oi = out.impl()] {
      xi->ensure_grad();
      for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  require_defined(x, "slice", "input");
  const auto sp = split_at(x.shape(), axis, "slice");
  if (begin >= end || end > sp.n) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for axis " + std::to_string(axis) + " of " + to_string(x.shape()));
  }
  const std::size_t m = end - begin;
  const auto xd = x.data();
  std::vector<double> y(sp.outer * m * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    std::copy_n(xd.data() + (o * sp.n + begin) * sp.inner, m * sp.inner, y.data() + o * m * sp.inner);
  Shape shape = x.shape();
  shape[axis] = m;
  const bool rec = recording({&x});
  Tensor out = make_output(std::move(shape), std::move(y), rec, "slice");
  if (rec) {
    active_tape()->record("slice", {out.impl()}, [xi = x.impl(), oi = out.impl(), sp, begin, m] {
      xi->ensure_grad();
      for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t e = 0; e < m * sp.inner; ++e)
          xi->grad[(o * sp.n + begin) * sp.inner + e] += oi->grad[o * m * sp.inner + e];
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw DimensionError("concat: axis out of range for " + to_string(ref));
  std::size_t total = 0;
  bool rec = false;
  for (const auto& p : parts) {
    require_defined(p, "concat", "part");
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == ref[i];
    if (!ok) throw DimensionError("concat: shape " + to_string(s) + " incompatible with " + to_string(ref));
    total += s[axis];
    rec = rec || recording({&p});
  }
  const auto sp = split_at(ref, axis, "concat");
  std::vector<double> y(sp.outer * total * sp.inner);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t m = p.dim(axis);
    const auto pd = p.data();
    for (std::size_t o = 0; o < sp.outer; ++o)
      std::copy_n(pd.data() + o * m * sp.inner, m * sp.inner, y.data() + (o * total + off) * sp.inner);
    off += m;
  }
  Shape shape = ref;
  shape[axis] = total;
  Tensor out = make_output(std::move(shape), std::move(y), rec, "concat");
  if (rec) {
    std::vector<ImplPtr> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    active_tape()->record("concat", {out.impl()}, [impls, offsets, oi = out.impl(), sp, total, axis] {
      for (std::size_t pi = 0; pi < impls.size(); ++pi) {
        auto& t = *impls[pi];
        if (!t.requires_grad) continue;
        t.ensure_grad();
        const std::size_t m = t.shape[axis];
        for (std::size_t o = 0; o < sp.outer; ++o)
          for (std::size_t e = 0; e < m * sp.inner; ++e)
            t.grad[o * m * sp.inner + e] += oi->grad[(o * total + offsets[pi]) * sp.inner + e];
      }
    });
  }
  return out;
}

Tensor index_select(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices) {
  require_defined(x, "index_select", "input");
  const auto sp = split_at(x.shape(), axis, "index_select");
  if (indices.empty()) throw DimensionError("index_select: empty index list");
  for (auto idx : indices) {
    if (idx >= sp.n) {
      throw DimensionError("index_select: index " + std::to_string(idx) + " out of range for axis of size " +
                           std::to_string(sp.n));
    }
  }
  const std::size_t m = indices.size();
  const auto xd = x.data();
  std::vector<double> y(sp.outer * m * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t a = 0; a < m; ++a)
      std::copy_n(xd.data() + (o * sp.n + indices[a]) * sp.inner, sp.inner, y.data() + (o * m + a) * sp.inner);
  Shape shape = x.shape();
  shape[axis] = m;
  const bool rec = recording({&x});
  Tensor out = make_output(std::move(shape), std::move(y), rec, "index_select");
  if (rec) {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    active_tape()->record("index_select", {out.impl()}, [xi = x.impl(), oi = out.impl(), sp, idx = std::move(idx)] {
      xi->ensure_grad();
      const std::size_t m = idx.size();
      for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t i = 0; i < sp.inner; ++i)
            xi->grad[(o * sp.n + idx[a]) * sp.inner + i] += oi->grad[(o * m + a) * sp.inner + i];
    });
  }
  return out;
}

Tensor broadcast_axis(const Tensor& x, std::size_t axis, std::size_t count) {
  const auto sp = split_at(x.shape(), axis, "broadcast_axis");
  if (sp.n != 1) throw DimensionError("broadcast_axis: axis " + std::to_string(axis) + " of " + to_string(x.shape()) +
                                      " is not of size 1");
  std::vector<std::size_t> idx(count, 0);
  return index_select(x, axis, idx);
}

Tensor transpose01(const Tensor& x) {
  require_defined(x, "transpose01", "input");
  if (x.rank() < 2) throw DimensionError("transpose01: rank < 2 for " + to_string(x.shape()));
  const std::size_t a = x.dim(0), b = x.dim(1), inner = x.size() / (a * b);
  const auto xd = x.data();
  std::vector<double> y(xd.size());
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      std::copy_n(xd.data() + (i * b + j) * inner, inner, y.data() + (j * a + i) * inner);
  Shape shape = x.shape();
  std::swap(shape[0], shape[1]);
  const bool rec = recording({&x});
  Tensor out = make_output(std::move(shape), std::move(y), rec, "transpose01");
  if (rec) {
    active_tape()->record("transpose01", {out.impl()}, [xi = x.impl(), oi = out.impl(), a, b, inner] {
      xi->ensure_grad();
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
          for (std::size_t c = 0; c < inner; ++c) xi->grad[(i * b + j) * inner + c] += oi->grad[(j * a + i) * inner + c];
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: probability must be in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> factors(x.size());
  for (auto& f : factors) f = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor m(x.shape(), std::move(factors));
  return mul(x, m);
}

}  // namespace tubedetr::ops
