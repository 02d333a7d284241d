#include "tubedetr/annotation.hpp"

#include <fstream>
#include <sstream>

#include "tubedetr/errors.hpp"

namespace tubedetr {

void AnnotationRecord::validate() const {
  const std::string where = "annotation '" + video_id + "': ";
  if (frames == 0) throw ValidationError(where + "T must be positive");
  if (t_end < t_start) {
    throw ValidationError(where + "t_e (" + std::to_string(t_end) + ") < t_s (" + std::to_string(t_start) + ")");
  }
  if (t_end >= frames) {
    throw ValidationError(where + "t_e (" + std::to_string(t_end) + ") outside T = " + std::to_string(frames));
  }
  if (boxes.size() != t_end - t_start + 1) {
    throw ValidationError(where + "expected " + std::to_string(t_end - t_start + 1) + " boxes for [t_s, t_e], got " +
                          std::to_string(boxes.size()));
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (double c : boxes[i])
      if (!(c >= 0.0 && c <= 1.0)) {
        throw ValidationError(where + "box " + std::to_string(i) + " has a coordinate outside [0, 1]");
      }
}

GroundTruthTube AnnotationRecord::ground_truth() const {
  validate();
  std::vector<double> flat;
  flat.reserve(boxes.size() * 4);
  for (const auto& b : boxes) flat.insert(flat.end(), b.begin(), b.end());
  return GroundTruthTube::create(frames, t_start, t_end, Tensor({boxes.size(), 4}, std::move(flat)));
}

nlohmann::ordered_json AnnotationRecord::to_json() const {
  nlohmann::ordered_json j;
  j["video_id"] = video_id;
  j["T"] = frames;
  j["query"] = query;
  j["t_s"] = t_start;
  j["t_e"] = t_end;
  j["boxes"] = boxes;
  j["seed"] = seed;
  j["renderer"] = renderer;
  return j;
}

AnnotationRecord AnnotationRecord::from_json(const nlohmann::json& j) {
  AnnotationRecord r;
  try {
    r.video_id = j.at("video_id").get<std::string>();
    r.frames = j.at("T").get<std::size_t>();
    r.query = j.at("query").get<std::string>();
    // Read as signed so that negative indices are reported as invariant
    // violations rather than wrapping around.
    const auto ts = j.at("t_s").get<long long>();
    const auto te = j.at("t_e").get<long long>();
    if (ts < 0 || te < 0) throw ValidationError("annotation '" + r.video_id + "': negative frame index");
    r.t_start = static_cast<std::size_t>(ts);
    r.t_end = static_cast<std::size_t>(te);
    r.boxes = j.at("boxes").get<std::vector<CenterBox>>();
    if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("renderer")) r.renderer = j.at("renderer");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("annotation: ") + e.what());
  }
  r.validate();
  return r;
}

void save_annotation(const std::string& path, const AnnotationRecord& record) {
  record.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << record.to_json().dump(1) << '\n';
}

AnnotationRecord load_annotation(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open annotation " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return AnnotationRecord::from_json(j);
}

}  // namespace tubedetr
