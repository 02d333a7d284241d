#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tubedetr/tensor.hpp"

namespace tubedetr {

/// Ordered log of differentiable operations executed while the tape is active.
///
/// Each entry owns its backward closure together with the tensors it reads and
/// writes, so intermediate activations live exactly as long as the tape.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  void record(std::string op, std::vector<std::shared_ptr<TensorImpl>> outputs, BackwardFn backward);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }
  std::vector<std::string> op_names() const;

  // Resets gradients of every recorded output (intermediate values).
  void zero_output_grads();
  // Runs the backward closures in reverse execution order.
  void replay_backward();

 private:
  struct Entry {
    std::string op;
    std::vector<std::shared_ptr<TensorImpl>> outputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

// Tape that differentiable ops record into on this thread (nullptr = no recording).
Tape* active_tape();

/// RAII activation of a tape for the current thread. Nests; restores the
/// previous tape on destruction.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Disables recording for the current thread until destroyed.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

/// Accumulates d(loss)/d(x) into the gradient buffer of every requires-grad
/// leaf reachable through `tape`. Calling again without clearing leaf
/// gradients accumulates.
void backward(const Tensor& loss, Tape& tape);

}  // namespace tubedetr
