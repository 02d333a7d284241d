#include "tubedetr/backbones.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tubedetr/errors.hpp"
#include "tubedetr/positional.hpp"

namespace tubedetr {

PatchEmbedding::PatchEmbedding(ParameterStore& store, std::size_t channels, std::size_t patch, std::size_t dim)
    : proj_(store, "backbone.patch_embed", channels * patch * patch, dim, ParamGroup::kVisualBackbone),
      channels_(channels),
      patch_(patch),
      dim_(dim) {
  if (patch == 0) throw ConfigError("patch size must be positive");
}

FrameFeatures PatchEmbedding::operator()(const Tensor& video) const {
  if (video.rank() != 4 || video.dim(1) != channels_) {
    throw DimensionError("encode_frames: expected [T, " + std::to_string(channels_) + ", H, W] video, got " +
                         to_string(video.shape()));
  }
  const std::size_t T = video.dim(0), C = channels_, Hp = video.dim(2), Wp = video.dim(3), P = patch_;
  if (Hp % P != 0 || Wp % P != 0) {
    throw DimensionError("encode_frames: frame size " + std::to_string(Hp) + "x" + std::to_string(Wp) +
                         " is not divisible by patch size P=" + std::to_string(P));
  }
  const std::size_t H = Hp / P, W = Wp / P, patch_len = C * P * P;
  const auto v = video.data();
  std::vector<double> patches(T * H * W * patch_len);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        double* out = patches.data() + ((t * H + y) * W + x) * patch_len;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t py = 0; py < P; ++py)
            for (std::size_t px = 0; px < P; ++px)
              *out++ = v[((t * C + c) * Hp + y * P + py) * Wp + x * P + px];
      }
  Tensor flat({T, H * W, patch_len}, std::move(patches));
  FrameFeatures ff;
  ff.height = H;
  ff.width = W;
  ff.positional = sinusoid_table_2d(H, W, dim_);
  ff.features = ops::add(proj_(flat), ff.positional);
  return ff;
}

std::vector<std::string> tokenize(const std::string& query) {
  std::istringstream is(query);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) {
    std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(tok);
  }
  return out;
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  tokens_ = {"<pad>", "<unk>"};
  for (const auto& t : tokens) {
    if (t == "<pad>" || t == "<unk>") continue;
    if (std::find(tokens_.begin(), tokens_.end(), t) == tokens_.end()) tokens_.push_back(t);
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

Vocabulary Vocabulary::synthetic_grammar() {
  return Vocabulary({"the", "red", "green", "blue", "yellow", "square", "circle", "triangle", "moving", "left",
                     "right", "up", "down", "standing", "still"});
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const std::string& query) const {
  const auto toks = tokenize(query);
  if (toks.empty()) throw std::invalid_argument("query is empty after tokenization");
  std::vector<std::size_t> ids;
  ids.reserve(toks.size());
  for (const auto& t : toks) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::to_json() const {
  nlohmann::json j;
  j["tokens"] = tokens_;
  j["pad_id"] = kPadId;
  j["unk_id"] = kUnkId;
  return j.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary JSON: ") + e.what());
  }
  if (!j.contains("tokens") || !j["tokens"].is_array()) throw FormatError("vocabulary JSON: missing 'tokens' array");
  auto tokens = j["tokens"].get<std::vector<std::string>>();
  if (tokens.size() < 2 || tokens[kPadId] != "<pad>" || tokens[kUnkId] != "<unk>" ||
      j.value("pad_id", kPadId) != kPadId || j.value("unk_id", kUnkId) != kUnkId) {
    throw FormatError("vocabulary JSON: ids 0/1 must be <pad>/<unk>");
  }
  Vocabulary v(std::vector<std::string>(tokens.begin() + 2, tokens.end()));
  if (v.tokens_ != tokens) throw FormatError("vocabulary JSON: duplicate tokens");
  return v;
}

TextEncoder::TextEncoder(ParameterStore& store, std::size_t vocab_size, std::size_t max_length, std::size_t dim,
                         std::size_t heads, std::size_t ffn_dim, double dropout)
    : token_embedding_(store.create_uniform("text.token_embedding", {vocab_size, dim}, 1.0, ParamGroup::kTextEncoder)),
      position_embedding_(
          store.create_uniform("text.position_embedding", {max_length, dim}, 0.1, ParamGroup::kTextEncoder)),
      layer_(store, "text.layer", dim, heads, ffn_dim, dropout, ParamGroup::kTextEncoder),
      vocab_size_(vocab_size),
      max_length_(max_length) {}

TextFeatures TextEncoder::operator()(const std::vector<std::size_t>& ids, const nn::Context& ctx) const {
  if (ids.empty() || ids.size() > max_length_) {
    throw DimensionError("text encoder: token count " + std::to_string(ids.size()) + " outside [1, " +
                         std::to_string(max_length_) + "]");
  }
  for (auto id : ids) {
    if (id >= vocab_size_) throw DimensionError("text encoder: token id " + std::to_string(id) + " >= vocabulary size");
  }
  std::vector<std::size_t> positions(ids.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  auto x = ops::add(ops::index_select(token_embedding_, 0, ids), ops::index_select(position_embedding_, 0, positions));
  const std::size_t L = ids.size(), d = x.dim(1);
  auto y = layer_(ops::reshape(x, {1, L, d}), ctx);
  return TextFeatures{ops::reshape(y, {L, d}), ids};
}

}  // namespace tubedetr
