#pragma once

#include <string>
#include <vector>

#include "tubedetr/rng.hpp"
#include "tubedetr/tensor.hpp"

namespace tubedetr {

// Learning-rate group a parameter belongs to.
enum class ParamGroup { kVisualBackbone, kTextEncoder, kRest };

const char* to_string(ParamGroup group);

struct Parameter {
  std::string name;
  Tensor value;
  ParamGroup group = ParamGroup::kRest;
};

/// Owns the named trainable tensors of a model, in creation order.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : rng_(seed) {}

  // Glorot-uniform for rank-2 shapes, zeros otherwise unless `fill` is given.
  Tensor create(const std::string& name, Shape shape, ParamGroup group);
  Tensor create_filled(const std::string& name, Shape shape, double fill, ParamGroup group);
  Tensor create_uniform(const std::string& name, Shape shape, double limit, ParamGroup group);

  const std::vector<Parameter>& all() const { return params_; }
  std::vector<Parameter>& all() { return params_; }
  const Parameter& find(const std::string& name) const;
  std::size_t count_scalars() const;

  void zero_grads();

 private:
  Tensor add(const std::string& name, Tensor t, ParamGroup group);

  Rng rng_;
  std::vector<Parameter> params_;
};

}  // namespace tubedetr
