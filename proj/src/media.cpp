#include "tubedetr/media.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tubedetr/errors.hpp"

namespace tubedetr {

namespace {

static_assert(std::endian::native == std::endian::little, "frame files assume a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string encode_frames(const Tensor& video) {
  if (video.rank() != 4) throw DimensionError("write_frames: expected [T, C, H, W], got " + to_string(video.shape()));
  std::string out(kFrameMagic, 4);
  for (std::size_t d : video.shape()) {
    if (d > 0xffffffffULL) throw DimensionError("write_frames: dimension does not fit in uint32");
    put(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + video.size() * 4);
  for (double v : video.data()) put(out, static_cast<float>(v));
  return out;
}

void write_frames(const std::string& path, const Tensor& video) {
  const auto bytes = encode_frames(video);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Tensor decode_frames(const std::string& bytes) {
  if (bytes.size() < 4) {
    throw FormatError("frame file: truncated header at offset 0: expected 4 bytes of magic, got " +
                      std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kFrameMagic, 4) != 0) throw FormatError("frame file: bad magic at offset 0");
  if (bytes.size() < 20) {
    throw FormatError("frame file: truncated header at offset 4: expected 20 header bytes, got " +
                      std::to_string(bytes.size()));
  }
  Shape shape(4);
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint32_t d;
    std::memcpy(&d, bytes.data() + 4 + 4 * i, 4);
    if (d == 0) throw FormatError("frame file: zero dimension at offset " + std::to_string(4 + 4 * i));
    shape[i] = d;
  }
  const std::size_t n = numel(shape);
  const std::size_t expected = 20 + 4 * n;
  if (bytes.size() != expected) {
    throw FormatError("frame file: payload size mismatch at offset 20: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()));
  }
  std::vector<double> data(n);
  const char* p = bytes.data() + 20;
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    float f;
    std::memcpy(&f, p, 4);
    data[i] = f;
  }
  return Tensor(std::move(shape), std::move(data));
}

Tensor read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open frame file " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_frames(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace tubedetr
