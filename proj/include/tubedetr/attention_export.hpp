#pragma once

#include <filesystem>
#include <vector>

#include "tubedetr/decoder.hpp"

namespace tubedetr {

/// Decoder attention averaged over layers and heads, renormalized by the
/// maximum weight of each timestep for display.
struct AttentionMaps {
  std::size_t frames = 0, height = 0, width = 0, text_tokens = 0;
  std::vector<double> temporal;  // [T, T]; column t holds query t's weights over keys
  std::vector<double> spatial;   // [T, H*W]; frame t's own visual tokens
  std::vector<double> text;      // [T, L]
};

AttentionMaps compute_attention_maps(const DecoderOutput& decoder, std::size_t height, std::size_t width,
                                     std::size_t text_tokens);

// Writes temporal.{csv,pgm}, text.{csv,pgm} and spatial_tNNN.{csv,pgm}.
// Returns the written paths.
std::vector<std::filesystem::path> export_attention_maps(const AttentionMaps& maps,
                                                         const std::filesystem::path& out_dir);

void write_csv(const std::filesystem::path& path, const std::vector<double>& values, std::size_t rows,
               std::size_t cols);
// Binary greyscale (P5, maxval 255); values are expected in [0, 1].
void write_pgm(const std::filesystem::path& path, const std::vector<double>& values, std::size_t rows,
               std::size_t cols);

}  // namespace tubedetr
