#include "vict/autodiff.hpp"

#include <string>

namespace vict {

template <class T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  check_finite(value, "constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
Var<T> Tape<T>::leaf(Tensor<T> value) {
  check_finite(value, "leaf");
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
void Tape<T>::check_owner(const Var<T>& v, const char* op) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw Error(std::string(op) + ": operand belongs to a different tape");
  }
}

template <class T>
Var<T> Tape<T>::record(Tensor<T> value, std::vector<Var<T>> inputs, BackwardFn backward, const char* op) {
  check_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    check_owner(in, op);
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
void Tape<T>::backward(const Var<T>& root) {
  check_owner(root, "backward");
  if (nodes_.empty()) throw Error("backward: empty tape");
  Node& r = nodes_[root.id()];
  if (r.value.numel() != 1) {
    throw ShapeError("backward: root must be a scalar, got shape " + shape_str(r.value.shape()));
  }
  if (!r.requires_grad) throw Error("backward: root does not depend on any leaf requiring grad");

  for (auto& n : nodes_) {
    if (!n.is_leaf) n.grad.reset();
  }
  Tensor<T> seed(r.value.shape(), T{1});
  if (r.grad) {
    (*r.grad)[0] += T{1};
  } else {
    r.grad = std::move(seed);
  }

  std::vector<Tensor<T>*> grad_in;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad || !n.backward) continue;
    grad_in.assign(n.inputs.size(), nullptr);
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      Node& in = nodes_[n.inputs[k]];
      if (!in.requires_grad) continue;
      if (!in.grad) in.grad = Tensor<T>(in.value.shape(), T{0});
      grad_in[k] = &*in.grad;
    }
    n.backward(*n.grad, grad_in);
  }
}

template <class T>
Tensor<T> Tape<T>::grad(const Var<T>& v) const {
  check_owner(v, "grad");
  const Node& n = nodes_[v.id()];
  if (n.grad) return *n.grad;
  return Tensor<T>(n.value.shape(), T{0});
}

template <class T>
void Tape<T>::zero_grads() {
  for (auto& n : nodes_) n.grad.reset();
}

template class Tape<float>;
template class Tape<double>;

}  // namespace vict
