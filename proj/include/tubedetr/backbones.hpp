#pragma once

#include <map>
#include <string>
#include <vector>

#include "tubedetr/nn.hpp"

namespace tubedetr {

/// Per-frame flattened visual tokens x0(v).
struct FrameFeatures {
  Tensor features;    // [T, H*W, d], positional encoding already added
  Tensor positional;  // [H*W, d]
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t frames() const { return features.dim(0); }
  std::size_t tokens() const { return height * width; }
};

/// Stand-in visual backbone: non-overlapping P×P patches linearly projected to
/// d channels, plus a fixed 2D sinusoidal encoding.
class PatchEmbedding {
 public:
  PatchEmbedding() = default;
  PatchEmbedding(ParameterStore& store, std::size_t channels, std::size_t patch, std::size_t dim);

  // video: [T, C, H_px, W_px].
  FrameFeatures operator()(const Tensor& video) const;

  std::size_t patch() const { return patch_; }

 private:
  nn::Linear proj_;
  std::size_t channels_ = 0, patch_ = 0, dim_ = 0;
};

// Lower-cases and splits on whitespace.
std::vector<std::string> tokenize(const std::string& query);

class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kUnkId = 1;

  // Builds from a token list; "<pad>" and "<unk>" are prepended.
  explicit Vocabulary(const std::vector<std::string>& tokens = {});
  // Closed vocabulary of the synthetic query grammar.
  static Vocabulary synthetic_grammar();

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(const std::string& token) const;  // kUnkId if unknown
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::vector<std::size_t> encode(const std::string& query) const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> index_;
};

/// Text features y0(s).
struct TextFeatures {
  Tensor features;  // [L, d]
  std::vector<std::size_t> token_ids;

  std::size_t length() const { return token_ids.size(); }
};

/// Stand-in text encoder: token embedding + learned position embedding, then
/// one transformer encoder layer.
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(ParameterStore& store, std::size_t vocab_size, std::size_t max_length, std::size_t dim,
              std::size_t heads, std::size_t ffn_dim, double dropout);

  TextFeatures operator()(const std::vector<std::size_t>& token_ids, const nn::Context& ctx) const;

  std::size_t max_length() const { return max_length_; }

 private:
  Tensor token_embedding_;     // [V, d]
  Tensor position_embedding_;  // [max_length, d]
  nn::EncoderLayer layer_;
  std::size_t vocab_size_ = 0, max_length_ = 0;
};

}  // namespace tubedetr
