#include "tubedetr/parameters.hpp"

#include <cmath>
#include <stdexcept>

#include "tubedetr/errors.hpp"

namespace tubedetr {

const char* to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::kVisualBackbone:
      return "visual_backbone";
    case ParamGroup::kTextEncoder:
      return "text_encoder";
    case ParamGroup::kRest:
      return "rest";
  }
  return "?";
}

Tensor ParameterStore::add(const std::string& name, Tensor t, ParamGroup group) {
  for (const auto& p : params_) {
    if (p.name == name) throw ConfigError("duplicate parameter name '" + name + "'");
  }
  t.set_requires_grad(true);
  params_.push_back(Parameter{name, t, group});
  return t;
}

Tensor ParameterStore::create(const std::string& name, Shape shape, ParamGroup group) {
  if (shape.size() == 2) {
    const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
    return create_uniform(name, std::move(shape), limit, group);
  }
  return add(name, Tensor::zeros(std::move(shape)), group);
}

Tensor ParameterStore::create_filled(const std::string& name, Shape shape, double fill, ParamGroup group) {
  return add(name, Tensor::full(std::move(shape), fill), group);
}

Tensor ParameterStore::create_uniform(const std::string& name, Shape shape, double limit, ParamGroup group) {
  std::vector<double> data(numel(shape));
  for (auto& v : data) v = rng_.uniform(-limit, limit);
  return add(name, Tensor(std::move(shape), std::move(data)), group);
}

const Parameter& ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

std::size_t ParameterStore::count_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p.value.zero_grad();
}

}  // namespace tubedetr
