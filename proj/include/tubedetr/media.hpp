#pragma once

#include <string>

#include "tubedetr/tensor.hpp"

namespace tubedetr {

// Frame file: "VTFR", four little-endian uint32 dims (T, C, H, W), then
// T*C*H*W little-endian float32 values.
inline constexpr char kFrameMagic[4] = {'V', 'T', 'F', 'R'};

// video: [T, C, H, W]. Values are narrowed to float32.
void write_frames(const std::string& path, const Tensor& video);
std::string encode_frames(const Tensor& video);

// Throws FormatError with the byte offset of the problem.
Tensor read_frames(const std::string& path);
Tensor decode_frames(const std::string& bytes);

}  // namespace tubedetr
