#include "tubedetr/heads.hpp"

namespace tubedetr {

PredictionHeads::PredictionHeads(ParameterStore& store, std::size_t dim, double temporal_dropout)
    : box1_(store, "heads.box.0", dim, dim),
      box2_(store, "heads.box.1", dim, dim),
      box3_(store, "heads.box.2", dim, 4),
      start1_(store, "heads.start.0", dim, dim),
      start2_(store, "heads.start.1", dim, 1),
      end1_(store, "heads.end.0", dim, dim),
      end2_(store, "heads.end.1", dim, 1),
      temporal_dropout_(temporal_dropout) {}

TubePrediction PredictionHeads::operator()(const Tensor& queries, const nn::Context& ctx) const {
  const std::size_t T = queries.dim(0);
  TubePrediction p;
  p.boxes = ops::sigmoid(box3_(ops::relu(box2_(ops::relu(box1_(queries))))));
  const auto temporal_in = nn::apply_dropout(queries, temporal_dropout_, ctx);
  p.start_logits = ops::reshape(start2_(ops::relu(start1_(temporal_in))), {T});
  p.end_logits = ops::reshape(end2_(ops::relu(end1_(temporal_in))), {T});
  p.start_prob = ops::softmax(p.start_logits);
  p.end_prob = ops::softmax(p.end_logits);
  return p;
}

}  // namespace tubedetr
