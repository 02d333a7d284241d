#include "tubedetr/complexity.hpp"

#include <stdexcept>

#include <json.hpp>

namespace tubedetr {

ComplexityReport complexity_report(const ComplexityInput& in) {
  if (in.frames == 0 || in.visual_tokens == 0 || in.text_tokens == 0 || in.k == 0 || in.layers == 0 || in.dim == 0 ||
      in.heads == 0) {
    throw std::invalid_argument("complexity report: all inputs must be positive");
  }
  ComplexityReport r;
  r.input = in;
  const std::uint64_t tokens = in.visual_tokens + in.text_tokens;
  r.clips = (in.frames + in.k - 1) / in.k;
  r.encoder_slow_entries = in.layers * in.heads * r.clips * tokens * tokens;
  r.encoder_dense_entries = in.layers * in.heads * in.frames * tokens * tokens;
  r.decoder_self_entries = in.layers * in.heads * in.frames * in.frames;
  r.decoder_cross_entries = in.layers * in.heads * in.frames * tokens;

  // Stored activations per encoder layer: ~8 token-sized buffers (q, k, v,
  // attention output, projection, two residual/norm outputs, FFN output) plus
  // the score matrix. Decoder layers keep ~10 query-sized buffers plus scores.
  // The fast branch (k > 1) adds f, g and the replicated slow features.
  const std::uint64_t encoder = in.layers * (8 * r.clips * tokens * in.dim) + r.encoder_slow_entries;
  const std::uint64_t fast = in.k > 1 ? 2 * in.frames * in.visual_tokens * in.dim + in.frames * tokens * in.dim : 0;
  const std::uint64_t decoder =
      in.layers * (10 * in.frames * in.dim) + r.decoder_self_entries + r.decoder_cross_entries;
  r.activation_floats = encoder + fast + decoder;
  return r;
}

std::string ComplexityReport::to_json() const {
  nlohmann::ordered_json j;
  j["T"] = input.frames;
  j["HW"] = input.visual_tokens;
  j["L"] = input.text_tokens;
  j["k"] = input.k;
  j["N"] = input.layers;
  j["d"] = input.dim;
  j["heads"] = input.heads;
  j["clips"] = clips;
  j["encoder_slow_entries"] = encoder_slow_entries;
  j["encoder_dense_entries"] = encoder_dense_entries;
  j["encoder_ratio"] = encoder_ratio();
  j["decoder_self_entries"] = decoder_self_entries;
  j["decoder_cross_entries"] = decoder_cross_entries;
  j["activation_floats"] = activation_floats;
  return j.dump(2);
}

}  // namespace tubedetr
