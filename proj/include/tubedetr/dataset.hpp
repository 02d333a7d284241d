#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tubedetr/synthetic.hpp"

namespace tubedetr {

// Layout: <dir>/index.json, <dir>/vocab.json, <dir>/frames/<id>.vtfr,
// <dir>/annotations/<id>.json.
struct DatasetIndex {
  std::uint64_t seed = 0;
  SceneParams params;
  std::vector<std::string> train;
  std::vector<std::string> val;

  nlohmann::ordered_json to_json() const;
  static DatasetIndex from_json(const nlohmann::json& j);
};

DatasetIndex generate_dataset(const std::filesystem::path& dir, std::size_t n_videos, std::uint64_t seed,
                              const SceneParams& params);

DatasetIndex load_index(const std::filesystem::path& dir);

// Loads one sample and checks that the annotation matches the frame file.
SyntheticSample load_sample(const std::filesystem::path& dir, const std::string& video_id);

// split: "train", "val" or "all". Frames are subsampled by `stride` and
// capped at t_max.
std::vector<SyntheticSample> load_split(const std::filesystem::path& dir, const std::string& split,
                                        std::size_t stride = 1, std::size_t t_max = 200);

}  // namespace tubedetr
