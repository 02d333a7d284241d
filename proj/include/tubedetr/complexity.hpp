#pragma once

#include <cstdint>
#include <string>

namespace tubedetr {

struct ComplexityInput {
  std::uint64_t frames = 200;  // T
  std::uint64_t visual_tokens = 49;  // HW
  std::uint64_t text_tokens = 16;    // L
  std::uint64_t k = 5;
  std::uint64_t layers = 6;  // N, used for both encoder and decoder
  std::uint64_t dim = 256;
  std::uint64_t heads = 8;
};

/// Closed-form attention score counts and an activation-memory estimate.
struct ComplexityReport {
  ComplexityInput input;
  std::uint64_t clips = 0;                   // ceil(T / k)
  std::uint64_t encoder_slow_entries = 0;    // N * heads * M * (HW+L)^2
  std::uint64_t encoder_dense_entries = 0;   // N * heads * T * (HW+L)^2
  std::uint64_t decoder_self_entries = 0;    // N * heads * T^2
  std::uint64_t decoder_cross_entries = 0;   // N * heads * T * (HW+L)
  std::uint64_t activation_floats = 0;

  double encoder_ratio() const {
    return static_cast<double>(encoder_slow_entries) / static_cast<double>(encoder_dense_entries);
  }
  std::string to_json() const;
};

ComplexityReport complexity_report(const ComplexityInput& in);

}  // namespace tubedetr
