#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vict/tensor.hpp"

namespace vict {

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// First/second moment buffers plus the step counter. A default-constructed
/// state is fresh: buffers are sized on the first step.
template <class T>
struct AdamWState {
  AdamWHyper hyper;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t t = 0;
};

/// One decoupled-weight-decay Adam update with bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta).
/// Throws ShapeError on misaligned params/grads/state and NumericError on a
/// non-finite gradient; in both cases nothing is modified.
template <class T>
void adamw_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, AdamWState<T>& state);

}  // namespace vict
