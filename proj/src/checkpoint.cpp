#include "tubedetr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "tubedetr/errors.hpp"

namespace tubedetr {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

struct Entry {
  Shape shape;
  std::size_t offset = 0;
  std::size_t bytes = 0;
};

class BlobWriter {
 public:
  nlohmann::ordered_json add(const std::string& section, const std::string& name, const Shape& shape,
                             std::span<const double> values) {
    const std::size_t offset = blob_.size();
    blob_.resize(offset + values.size_bytes());
    std::memcpy(blob_.data() + offset, values.data(), values.size_bytes());
    return {{"section", section}, {"name", name}, {"shape", shape}, {"offset", offset}, {"bytes", values.size_bytes()}};
  }
  const std::string& blob() const { return blob_; }

 private:
  std::string blob_;
};

nlohmann::json read_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / kManifestFile);
  if (!is) throw FormatError("checkpoint: cannot open " + (dir / kManifestFile).string());
  try {
    nlohmann::json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint manifest: " + std::string(e.what()));
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& params, const OptimizerState* optimizer,
                     const nlohmann::json& config) {
  std::filesystem::create_directories(dir);
  BlobWriter w;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& p : params.all()) tensors.push_back(w.add("parameters", p.name, p.value.shape(), p.value.data()));
  const bool has_ema = optimizer && !optimizer->ema_shadow.empty();
  if (optimizer) {
    for (const auto& p : params.all()) {
      tensors.push_back(w.add("first_moment", p.name, p.value.shape(), optimizer->first_moment.at(p.name)));
      tensors.push_back(w.add("second_moment", p.name, p.value.shape(), optimizer->second_moment.at(p.name)));
      if (has_ema) tensors.push_back(w.add("ema", p.name, p.value.shape(), optimizer->ema_shadow.at(p.name)));
    }
  }
  nlohmann::ordered_json manifest;
  manifest["format"] = "tubedetr-checkpoint";
  manifest["version"] = 1;
  manifest["step"] = optimizer ? optimizer->step : 0;
  manifest["has_optimizer"] = optimizer != nullptr;
  manifest["has_ema"] = has_ema;
  manifest["blob"] = kBlobFile;
  manifest["blob_bytes"] = w.blob().size();
  manifest["config"] = config;
  manifest["tensors"] = std::move(tensors);

  std::ofstream blob(dir / kBlobFile, std::ios::binary);
  if (!blob) throw std::runtime_error("checkpoint: cannot write " + (dir / kBlobFile).string());
  blob.write(w.blob().data(), static_cast<std::streamsize>(w.blob().size()));
  std::ofstream os(dir / kManifestFile);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + (dir / kManifestFile).string());
  os << manifest.dump(1) << '\n';
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir) {
  const auto j = read_manifest(dir);
  CheckpointInfo info;
  try {
    if (j.at("format").get<std::string>() != "tubedetr-checkpoint") throw FormatError("checkpoint: unknown format");
    info.step = j.at("step").get<std::size_t>();
    info.has_optimizer = j.at("has_optimizer").get<bool>();
    info.has_ema = j.at("has_ema").get<bool>();
    info.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint manifest: " + std::string(e.what()));
  }
  return info;
}

CheckpointInfo load_checkpoint(const std::filesystem::path& dir, ParameterStore& params, OptimizerState* optimizer) {
  const auto info = read_checkpoint_info(dir);
  const auto manifest = read_manifest(dir);

  std::ifstream is(dir / kBlobFile, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open " + (dir / kBlobFile).string());
  const std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto expected = manifest.value("blob_bytes", std::size_t{0});
  if (blob.size() != expected) {
    throw FormatError("checkpoint: blob size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(blob.size()));
  }

  std::map<std::pair<std::string, std::string>, Entry> entries;
  try {
    for (const auto& t : manifest.at("tensors")) {
      Entry e{t.at("shape").get<Shape>(), t.at("offset").get<std::size_t>(), t.at("bytes").get<std::size_t>()};
      const auto key = std::make_pair(t.at("section").get<std::string>(), t.at("name").get<std::string>());
      if (e.bytes != numel(e.shape) * sizeof(double) || e.offset + e.bytes > blob.size()) {
        throw FormatError("checkpoint: entry '" + key.second + "' has inconsistent offset/length");
      }
      if (!entries.emplace(key, e).second) {
        throw ValidationError("checkpoint: parameter '" + key.second + "' listed twice in section " + key.first);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint manifest: " + std::string(e.what()));
  }

  auto fetch = [&](const std::string& section, const Parameter& p) {
    auto it = entries.find({section, p.name});
    if (it == entries.end()) throw ValidationError("checkpoint: missing parameter '" + p.name + "' in " + section);
    if (it->second.shape != p.value.shape()) {
      throw ValidationError("checkpoint: parameter '" + p.name + "' has shape " + to_string(it->second.shape) +
                            " in the checkpoint but " + to_string(p.value.shape()) + " in the model");
    }
    std::vector<double> values(numel(it->second.shape));
    std::memcpy(values.data(), blob.data() + it->second.offset, it->second.bytes);
    return values;
  };

  std::size_t in_section = 0;
  for (const auto& [key, e] : entries) in_section += key.first == "parameters";
  if (in_section != params.all().size()) {
    for (const auto& [key, e] : entries) {
      if (key.first != "parameters") continue;
      bool known = false;
      for (const auto& p : params.all()) known |= p.name == key.second;
      if (!known) throw ValidationError("checkpoint: unknown parameter '" + key.second + "'");
    }
  }

  // Validate everything before touching the model.
  std::vector<std::vector<double>> values;
  for (const auto& p : params.all()) values.push_back(fetch("parameters", p));
  OptimizerState state;
  if (optimizer && info.has_optimizer) {
    state.step = info.step;
    for (const auto& p : params.all()) {
      state.first_moment[p.name] = fetch("first_moment", p);
      state.second_moment[p.name] = fetch("second_moment", p);
      if (info.has_ema) state.ema_shadow[p.name] = fetch("ema", p);
    }
  }
  for (std::size_t i = 0; i < params.all().size(); ++i) {
    auto dst = params.all()[i].value.mutable_data();
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
  if (optimizer && info.has_optimizer) {
    // An optimizer configured with EMA restarts its shadow from the loaded weights.
    if (!info.has_ema && !optimizer->ema_shadow.empty()) {
      for (std::size_t i = 0; i < params.all().size(); ++i) state.ema_shadow[params.all()[i].name] = values[i];
    }
    *optimizer = std::move(state);
  }
  return info;
}

}  // namespace tubedetr
