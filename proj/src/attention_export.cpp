#include "tubedetr/attention_export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tubedetr/errors.hpp"

namespace tubedetr {

namespace {

// Mean over layers and heads: returns [rows, cols].
std::vector<double> average(const std::vector<Tensor>& per_layer, std::size_t rows, std::size_t cols) {
  std::vector<double> acc(rows * cols, 0.0);
  std::size_t count = 0;
  for (const auto& w : per_layer) {
    if (w.rank() != 3 || w.dim(1) != rows || w.dim(2) != cols) {
      throw DimensionError("attention export: unexpected attention shape " + to_string(w.shape()));
    }
    const auto d = w.data();
    for (std::size_t h = 0; h < w.dim(0); ++h, ++count)
      for (std::size_t i = 0; i < rows * cols; ++i) acc[i] += d[h * rows * cols + i];
  }
  for (auto& v : acc) v /= static_cast<double>(count);
  return acc;
}

void renormalize(std::span<double> values) {
  const double mx = *std::max_element(values.begin(), values.end());
  if (mx <= 0.0) return;
  for (auto& v : values) v /= mx;
}

}  // namespace

AttentionMaps compute_attention_maps(const DecoderOutput& decoder, std::size_t height, std::size_t width,
                                     std::size_t text_tokens) {
  if (decoder.self_attention.empty() || decoder.cross_attention.empty()) {
    throw std::invalid_argument("attention export: decoder recorded no self- or cross-attention weights");
  }
  AttentionMaps m;
  m.frames = decoder.self_attention.front().dim(1);
  m.height = height;
  m.width = width;
  m.text_tokens = text_tokens;
  const std::size_t T = m.frames, HW = height * width, per_frame = HW + text_tokens;

  const auto self = average(decoder.self_attention, T, T);
  m.temporal.assign(T * T, 0.0);
  // Transpose so that column t is query t, then renormalize each column.
  for (std::size_t q = 0; q < T; ++q) {
    std::vector<double> col(self.begin() + static_cast<std::ptrdiff_t>(q * T),
                            self.begin() + static_cast<std::ptrdiff_t>((q + 1) * T));
    renormalize(col);
    for (std::size_t key = 0; key < T; ++key) m.temporal[key * T + q] = col[key];
  }

  const auto cross = average(decoder.cross_attention, T, T * per_frame);
  m.spatial.resize(T * HW);
  m.text.resize(T * text_tokens);
  for (std::size_t t = 0; t < T; ++t) {
    const double* row = cross.data() + t * T * per_frame + t * per_frame;
    std::copy_n(row, HW, m.spatial.begin() + static_cast<std::ptrdiff_t>(t * HW));
    std::copy_n(row + HW, text_tokens, m.text.begin() + static_cast<std::ptrdiff_t>(t * text_tokens));
    renormalize(std::span<double>(m.spatial).subspan(t * HW, HW));
    renormalize(std::span<double>(m.text).subspan(t * text_tokens, text_tokens));
  }
  return m;
}

void write_csv(const std::filesystem::path& path, const std::vector<double>& values, std::size_t rows,
               std::size_t cols) {
  if (values.size() != rows * cols) throw DimensionError("write_csv: value count does not match rows x cols");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) os << ',';
      auto res = std::to_chars(buf, buf + sizeof(buf), values[r * cols + c]);
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const std::vector<double>& values, std::size_t rows,
               std::size_t cols) {
  if (values.size() != rows * cols) throw DimensionError("write_pgm: value count does not match rows x cols");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (double v : values) {
    const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    os.put(static_cast<char>(byte));
  }
}

std::vector<std::filesystem::path> export_attention_maps(const AttentionMaps& maps,
                                                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& stem, const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    write_csv(out_dir / (stem + ".csv"), v, rows, cols);
    write_pgm(out_dir / (stem + ".pgm"), v, rows, cols);
    written.push_back(out_dir / (stem + ".csv"));
    written.push_back(out_dir / (stem + ".pgm"));
  };
  emit("temporal", maps.temporal, maps.frames, maps.frames);
  emit("text", maps.text, maps.frames, maps.text_tokens);
  const std::size_t HW = maps.height * maps.width;
  for (std::size_t t = 0; t < maps.frames; ++t) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "spatial_t%03zu", t);
    std::vector<double> frame(maps.spatial.begin() + static_cast<std::ptrdiff_t>(t * HW),
                              maps.spatial.begin() + static_cast<std::ptrdiff_t>((t + 1) * HW));
    emit(stem, frame, maps.height, maps.width);
  }
  return written;
}

}  // namespace tubedetr
