#include "tubedetr/tape.hpp"

#include "tubedetr/errors.hpp"

namespace tubedetr {

namespace {
thread_local Tape* current_tape = nullptr;
}

void Tape::record(std::string op, std::vector<std::shared_ptr<TensorImpl>> outputs, BackwardFn backward) {
  entries_.push_back(Entry{std::move(op), std::move(outputs), std::move(backward)});
}

std::vector<std::string> Tape::op_names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& e : entries_) names.push_back(e.op);
  return names;
}

void Tape::zero_output_grads() {
  for (auto& e : entries_) {
    for (auto& out : e.outputs) out->grad.assign(out->data.size(), 0.0);
  }
}

void Tape::replay_backward() {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

Tape* active_tape() { return current_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(current_tape) { current_tape = &tape; }
TapeScope::~TapeScope() { current_tape = previous_; }

NoGradScope::NoGradScope() : previous_(current_tape) { current_tape = nullptr; }
NoGradScope::~NoGradScope() { current_tape = previous_; }

void backward(const Tensor& loss, Tape& tape) {
  if (!loss.defined() || loss.size() != 1) {
    throw DimensionError("backward requires a scalar loss, got shape " +
                         (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (tape.empty()) throw std::logic_error("backward called with an empty tape");
  // Intermediate gradients from a previous pass must not leak into this one;
  // leaf gradients keep accumulating.
  tape.zero_output_grads();
  auto impl = loss.impl();
  impl->ensure_grad();
  impl->grad[0] += 1.0;
  tape.replay_backward();
}

}  // namespace tubedetr
