#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vict/autodiff.hpp"
#include "vict/ops.hpp"
#include "vict/rng.hpp"

namespace vict::testing {

// Central finite differences of a scalar function of one tensor.
inline Tensor<double> numeric_grad(const std::function<double(const Tensor<double>&)>& f, Tensor<double> x,
                                   double h = 1e-5) {
  Tensor<double> g(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    x[i] = x0;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline double max_rel_diff(const Tensor<double>& a, const Tensor<double>& b, double floor = 1e-8) {
  double worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), floor}));
  }
  return worst;
}

inline Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  Rng rng{seed, 0x7e57};
  for (auto& v : t.data()) v = scale * rng.normal();
  return t;
}

// Analytic gradient of op(x) reduced by a fixed random weighting, against
// finite differences. Returns the max relative error.
inline double check_unary(const std::function<Var<double>(const Var<double>&)>& op, const Tensor<double>& x,
                          std::uint64_t seed) {
  Tensor<double> probe;
  auto loss = [&](Tape<double>& tape, const Var<double>& in) {
    const Var<double> out = op(in);
    if (probe.empty()) probe = random_tensor(out.shape(), seed + 1);
    return ops::sum(ops::mul(out, tape.constant(probe)));
  };
  Tape<double> tape;
  const auto leaf = tape.leaf(x);
  tape.backward(loss(tape, leaf));
  const auto analytic = tape.grad(leaf);
  const auto numeric = numeric_grad(
      [&](const Tensor<double>& xv) {
        Tape<double> t;
        return loss(t, t.constant(xv)).value()[0];
      },
      x);
  return max_rel_diff(analytic, numeric);
}

}  // namespace vict::testing
