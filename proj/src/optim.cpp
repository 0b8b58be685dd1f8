#include "vict/optim.hpp"

#include <cmath>
#include <string>

namespace vict {

template <class T>
void adamw_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, AdamWState<T>& state) {
  const AdamWHyper& h = state.hyper;
  if (h.lr < 0 || h.eps <= 0 || h.beta1 < 0 || h.beta1 >= 1 || h.beta2 < 0 || h.beta2 >= 1 || h.weight_decay < 0) {
    throw ValueError("adamw_step: invalid hyperparameters");
  }
  if (params.size() != grads.size()) {
    throw ShapeError("adamw_step: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape()) {
      throw ShapeError("adamw_step: param " + std::to_string(i) + " shape " + shape_str(params[i]->shape()) +
                       " vs grad " + shape_str(grads[i].shape()));
    }
    if (!all_finite(grads[i].data())) {
      throw NumericError("adamw_step: non-finite gradient for param " + std::to_string(i));
    }
  }
  if (state.t == 0 && state.m.empty()) {
    for (auto* p : params) {
      state.m.emplace_back(p->shape(), T{0});
      state.v.emplace_back(p->shape(), T{0});
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adamw_step: optimizer state tracks a different parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].shape() != params[i]->shape() || state.v[i].shape() != params[i]->shape()) {
      throw ShapeError("adamw_step: moment buffer shape mismatch for param " + std::to_string(i));
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(h.beta1), b2 = static_cast<T>(h.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(h.beta1, t));
  const T bc2 = static_cast<T>(1.0 - std::pow(h.beta2, t));
  const T lr = static_cast<T>(h.lr), eps = static_cast<T>(h.eps), wd = static_cast<T>(h.weight_decay);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    const auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (T{1} - b1) * g[k];
      v[k] = b2 * v[k] + (T{1} - b2) * g[k] * g[k];
      const T m_hat = m[k] / bc1;
      const T v_hat = v[k] / bc2;
      p[k] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * p[k]);
    }
  }
}

template void adamw_step<float>(std::span<Tensor<float>* const>, std::span<const Tensor<float>>, AdamWState<float>&);
template void adamw_step<double>(std::span<Tensor<double>* const>, std::span<const Tensor<double>>,
                                 AdamWState<double>&);

}  // namespace vict
