#include "tubedetr/positional.hpp"

#include <cmath>

#include "tubedetr/errors.hpp"

namespace tubedetr {

Tensor sinusoid_table(std::size_t count, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("sinusoidal encoding needs an even dimension, got " + std::to_string(dim));
  std::vector<double> data(count * dim);
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle = static_cast<double>(t) / std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(dim));
      data[t * dim + 2 * i] = std::sin(angle);
      data[t * dim + 2 * i + 1] = std::cos(angle);
    }
  }
  return Tensor({count, dim}, std::move(data));
}

Tensor sinusoid_table_2d(std::size_t height, std::size_t width, std::size_t dim) {
  if (dim % 4 != 0) throw ConfigError("2D sinusoidal encoding needs dim divisible by 4, got " + std::to_string(dim));
  const std::size_t half = dim / 2;
  const auto rows = sinusoid_table(height, half);
  const auto cols = sinusoid_table(width, half);
  std::vector<double> data(height * width * dim);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double* out = data.data() + (y * width + x) * dim;
      for (std::size_t c = 0; c < half; ++c) {
        out[c] = rows.at(y * half + c);
        out[half + c] = cols.at(x * half + c);
      }
    }
  }
  return Tensor({height * width, dim}, std::move(data));
}

}  // namespace tubedetr
