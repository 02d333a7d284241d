#include "tubedetr/dataset.hpp"

#include <fstream>

#include "tubedetr/backbones.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/media.hpp"

namespace tubedetr {

nlohmann::ordered_json DatasetIndex::to_json() const {
  return {{"seed", seed}, {"params", params.to_json()}, {"train", train}, {"val", val}};
}

DatasetIndex DatasetIndex::from_json(const nlohmann::json& j) {
  DatasetIndex idx;
  try {
    idx.seed = j.at("seed").get<std::uint64_t>();
    idx.params = SceneParams::from_json(j.at("params"));
    idx.train = j.at("train").get<std::vector<std::string>>();
    idx.val = j.at("val").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset index: ") + e.what());
  }
  return idx;
}

DatasetIndex generate_dataset(const std::filesystem::path& dir, std::size_t n_videos, std::uint64_t seed,
                              const SceneParams& params) {
  if (n_videos == 0) throw ConfigError("generate: need at least one video");
  params.validate();
  std::filesystem::create_directories(dir / "frames");
  std::filesystem::create_directories(dir / "annotations");
  DatasetIndex idx;
  idx.seed = seed;
  idx.params = params;
  const std::size_t n_train = train_split_size(n_videos);
  for (std::size_t i = 0; i < n_videos; ++i) {
    const auto s = generate_sample(seed, i, params);
    const auto& id = s.annotation.video_id;
    write_frames((dir / "frames" / (id + ".vtfr")).string(), s.video);
    save_annotation((dir / "annotations" / (id + ".json")).string(), s.annotation);
    (i < n_train ? idx.train : idx.val).push_back(id);
  }
  std::ofstream(dir / "index.json") << idx.to_json().dump(1) << '\n';
  std::ofstream(dir / "vocab.json") << Vocabulary::synthetic_grammar().to_json() << '\n';
  return idx;
}

DatasetIndex load_index(const std::filesystem::path& dir) {
  std::ifstream is(dir / "index.json");
  if (!is) throw FormatError("dataset: cannot open " + (dir / "index.json").string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset index: " + std::string(e.what()));
  }
  return DatasetIndex::from_json(j);
}

SyntheticSample load_sample(const std::filesystem::path& dir, const std::string& video_id) {
  SyntheticSample s{read_frames((dir / "frames" / (video_id + ".vtfr")).string()),
                    load_annotation((dir / "annotations" / (video_id + ".json")).string())};
  if (s.video.dim(0) != s.annotation.frames) {
    throw ValidationError("sample '" + video_id + "': annotation says T = " + std::to_string(s.annotation.frames) +
                          " but the frame file has " + std::to_string(s.video.dim(0)) + " frames");
  }
  return s;
}

std::vector<SyntheticSample> load_split(const std::filesystem::path& dir, const std::string& split,
                                        std::size_t stride, std::size_t t_max) {
  const auto idx = load_index(dir);
  std::vector<std::string> ids;
  if (split == "train" || split == "all") ids.insert(ids.end(), idx.train.begin(), idx.train.end());
  if (split == "val" || split == "all") ids.insert(ids.end(), idx.val.begin(), idx.val.end());
  if (split != "train" && split != "val" && split != "all") throw ConfigError("unknown split '" + split + "'");
  std::vector<SyntheticSample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(subsample_sample(load_sample(dir, id), stride, t_max));
  return out;
}

}  // namespace tubedetr
