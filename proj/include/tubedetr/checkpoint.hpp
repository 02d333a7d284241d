#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tubedetr/optimizer.hpp"
#include "tubedetr/parameters.hpp"

namespace tubedetr {

// A checkpoint is a directory holding manifest.json and tensors.bin. The
// manifest lists each tensor's section, name, shape, byte offset and byte
// length inside the little-endian float64 blob. Sections: "parameters",
// "first_moment", "second_moment" and, when EMA is on, "ema".
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kBlobFile = "tensors.bin";

struct CheckpointInfo {
  std::size_t step = 0;
  nlohmann::json config;  // run configuration stored alongside, may be null
  bool has_optimizer = false;
  bool has_ema = false;
};

void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& params, const OptimizerState* optimizer,
                     const nlohmann::json& config = nullptr);

// Reads the manifest only.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir);

// Loads parameter values (and optimizer state when `optimizer` is non-null and
// the checkpoint has one). A missing, duplicated or mis-shaped parameter
// raises ValidationError naming it; blob problems raise FormatError.
CheckpointInfo load_checkpoint(const std::filesystem::path& dir, ParameterStore& params,
                               OptimizerState* optimizer = nullptr);

}  // namespace tubedetr
