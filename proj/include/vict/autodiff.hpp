#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vict/tensor.hpp"

namespace vict {

template <class T>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
template <class T>
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }
  bool requires_grad() const;

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode gradient tape.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order and backward() is a single reverse sweep. Leaves created
/// with leaf() keep their gradients across backward() calls (they accumulate
/// until zero_grads()); interior gradients are recomputed per call.
template <class T>
class Tape {
 public:
  /// Receives dL/d(output) and the per-input gradient buffers (nullptr for
  /// inputs that do not require grad); adds each input's contribution.
  using BackwardFn = std::function<void(const Tensor<T>& grad_out, std::span<Tensor<T>*> grad_in)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value);
  Var<T> leaf(Tensor<T> value);

  /// Appends an op output. The backward rule is kept only when some input
  /// requires grad.
  Var<T> record(Tensor<T> value, std::vector<Var<T>> inputs, BackwardFn backward, const char* op);

  /// Populates gradients of every grad-requiring node reachable from `root`.
  void backward(const Var<T>& root);

  /// Gradient of a leaf; a zero tensor when nothing flowed into it.
  Tensor<T> grad(const Var<T>& v) const;
  void zero_grads();

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::optional<Tensor<T>> grad;
    bool requires_grad = false;
    bool is_leaf = false;
  };

  void check_owner(const Var<T>& v, const char* op) const;

  std::vector<Node> nodes_;
};

template <class T>
const Tensor<T>& Var<T>::value() const {
  if (!tape_) throw Error("use of an unbound Var");
  return tape_->value(id_);
}

template <class T>
bool Var<T>::requires_grad() const {
  return tape_ && tape_->requires_grad(id_);
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace vict
