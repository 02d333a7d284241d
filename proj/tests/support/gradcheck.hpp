#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tubedetr/ops.hpp"
#include "tubedetr/rng.hpp"
#include "tubedetr/tape.hpp"
#include "tubedetr/tensor.hpp"

namespace tubedetr::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "input i, element j: analytic a, numeric n"
  std::size_t checked = 0;
};

// Relative error with a small floor so that gradients that are zero up to
// rounding do not produce huge ratios.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Compares the analytic gradient of the scalar `loss()` with respect to every
// element of `inputs` against central differences. `loss` must read the
// inputs' current values; they are perturbed in place and restored.
inline GradCheckResult gradcheck(std::vector<Tensor> inputs, const std::function<Tensor()>& loss, double eps = 1e-6,
                                 double floor = 1e-6) {
  for (auto& x : inputs) {
    x.set_requires_grad(true);
    x.clear_grad();
  }
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor l = loss();
    backward(l, tape);
  }
  GradCheckResult r;
  NoGradScope no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].mutable_data();
    const auto analytic = inputs[i].has_grad() ? std::vector<double>(inputs[i].grad().begin(), inputs[i].grad().end())
                                               : std::vector<double>(values.size(), 0.0);
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double orig = values[j];
      values[j] = orig + eps;
      const double up = loss().item();
      values[j] = orig - eps;
      const double down = loss().item();
      values[j] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[j], numeric, floor);
      ++r.checked;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst = "input " + std::to_string(i) + ", element " + std::to_string(j) + ": analytic " +
                  std::to_string(analytic[j]) + ", numeric " + std::to_string(numeric);
      }
    }
  }
  return r;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

// Fixed random projection of an arbitrary tensor to a scalar, so every output
// element contributes a distinct weight to the loss.
inline Tensor probe(const Tensor& y, std::uint64_t seed = 99) {
  Rng rng(seed);
  return ops::sum(ops::mul(y, random_tensor(y.shape(), rng)));
}

}  // namespace tubedetr::testing
