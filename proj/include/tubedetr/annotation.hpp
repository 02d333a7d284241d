#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tubedetr/boxes.hpp"
#include "tubedetr/losses.hpp"

namespace tubedetr {

struct AnnotationRecord {
  std::string video_id;
  std::size_t frames = 0;  // T
  std::string query;
  std::size_t t_start = 0;
  std::size_t t_end = 0;
  std::vector<CenterBox> boxes;  // one per frame of [t_start, t_end]
  std::uint64_t seed = 0;
  nlohmann::ordered_json renderer = nlohmann::ordered_json::object();

  // Throws ValidationError on a broken invariant.
  void validate() const;
  GroundTruthTube ground_truth() const;

  nlohmann::ordered_json to_json() const;
  // Schema problems raise FormatError, invariant violations ValidationError.
  static AnnotationRecord from_json(const nlohmann::json& j);
};

void save_annotation(const std::string& path, const AnnotationRecord& record);
AnnotationRecord load_annotation(const std::string& path);

}  // namespace tubedetr
