#include "vict/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vict/kernels.hpp"

namespace vict::ops {

namespace {

template <class T>
Tape<T>& tape_of(const Var<T>& v, const char* op) {
  if (!v.valid()) throw Error(std::string(op) + ": unbound operand");
  return *v.tape();
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void require_same(const char* op, const Shape& a, const Shape& b) {
  if (a != b) shape_mismatch(op, a, b);
}

void require_rank(const char* op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(s));
  }
}

}  // namespace

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same("add", a.shape(), b.shape());
  Tensor<T> out = a.value();
  const auto bv = b.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return tape_of(a, "add").record(std::move(out), {a, b},
      [](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        for (auto* dst : gi) {
          if (!dst) continue;
          auto d = dst->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
        }
      }, "add");
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same("sub", a.shape(), b.shape());
  Tensor<T> out = a.value();
  const auto bv = b.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return tape_of(a, "sub").record(std::move(out), {a, b},
      [](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        if (gi[0]) {
          auto d = gi[0]->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
        }
        if (gi[1]) {
          auto d = gi[1]->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
        }
      }, "sub");
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same("mul", a.shape(), b.shape());
  Tensor<T> out = a.value();
  const auto bv = b.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  Tape<T>& tape = tape_of(a, "mul");
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b},
      [&tape, ia, ib](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto av = tape.value(ia).data();
        const auto bv = tape.value(ib).data();
        if (gi[0]) {
          auto d = gi[0]->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * bv[i];
        }
        if (gi[1]) {
          auto d = gi[1]->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * av[i];
        }
      }, "mul");
}

template <class T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= factor;
  return tape_of(a, "scale").record(std::move(out), {a},
      [factor](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * factor;
      }, "scale");
}

template <class T>
Var<T> add_bias(const Var<T>& x, const Var<T>& bias) {
  require_rank("add_bias", x.shape(), 2);
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (bias.numel() != n) shape_mismatch("add_bias", x.shape(), bias.shape());
  Tensor<T> out = x.value();
  const auto b = bias.value().data();
  for (std::size_t r = 0; r < m; ++r) {
    T* row = out.data().data() + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += b[c];
  }
  return tape_of(x, "add_bias").record(std::move(out), {x, bias},
      [m, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        if (gi[0]) {
          auto d = gi[0]->data();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
        }
        if (gi[1]) {
          auto d = gi[1]->data();
          for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n; ++c) d[c] += g[r * n + c];
          }
        }
      }, "add_bias");
}

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  require_rank("matmul", a.shape(), 2);
  require_rank("matmul", b.shape(), 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) shape_mismatch("matmul", a.shape(), b.shape());
  Tensor<T> out(Shape{m, n}, T{0});
  kernels::gemm_nn(a.value().data().data(), b.value().data().data(), out.data().data(), m, k, n);
  Tape<T>& tape = tape_of(a, "matmul");
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b},
      [&tape, ia, ib, m, k, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        if (gi[0]) {
          kernels::gemm_nt(g.data().data(), tape.value(ib).data().data(), gi[0]->data().data(), m, n, k);
        }
        if (gi[1]) {
          kernels::gemm_tn(tape.value(ia).data().data(), g.data().data(), gi[1]->data().data(), m, k, n);
        }
      }, "matmul");
}

template <class T>
Var<T> transpose(const Var<T>& a) {
  require_rank("transpose", a.shape(), 2);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor<T> out(Shape{n, m});
  const auto& av = a.value();
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.at(c, r) = av.at(r, c);
  }
  return tape_of(a, "transpose").record(std::move(out), {a},
      [m, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        auto& d = *gi[0];
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < n; ++c) d.at(r, c) += g.at(c, r);
        }
      }, "transpose");
}

template <class T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  return tape_of(a, "reshape").record(std::move(out), {a},
      [](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
      }, "reshape");
}

namespace {
struct AxisSplit {
  std::size_t outer = 1, dim = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit out;
  for (std::size_t i = 0; i < axis; ++i) out.outer *= s[i];
  out.dim = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) out.inner *= s[i];
  return out;
}
}  // namespace

template <class T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& s = a.shape();
  if (axis >= s.size() || length == 0 || start + length > s[axis]) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") on axis " + std::to_string(axis) + " is outside " + shape_str(s));
  }
  const AxisSplit sp = split_axis(s, axis);
  Shape os = s;
  os[axis] = length;
  Tensor<T> out(os);
  const auto av = a.value().data();
  const std::size_t run = length * sp.inner;
  for (std::size_t o = 0; o < sp.outer; ++o) {
    const T* src = av.data() + (o * sp.dim + start) * sp.inner;
    std::copy(src, src + run, out.data().data() + o * run);
  }
  return tape_of(a, "slice").record(std::move(out), {a},
      [sp, start, run](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        T* d = gi[0]->data().data();
        for (std::size_t o = 0; o < sp.outer; ++o) {
          T* dst = d + (o * sp.dim + start) * sp.inner;
          const T* src = g.data().data() + o * run;
          for (std::size_t i = 0; i < run; ++i) dst[i] += src[i];
        }
      }, "slice");
}

template <class T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) throw ShapeError("concat: axis out of range for " + shape_str(s0));
  std::vector<std::size_t> dims;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape a = p.shape(), b = s0;
    if (a.size() != b.size()) shape_mismatch("concat", b, a);
    a[axis] = b[axis] = 0;
    if (a != b) shape_mismatch("concat", s0, p.shape());
    dims.push_back(p.shape()[axis]);
    total += p.shape()[axis];
  }
  Shape os = s0;
  os[axis] = total;
  const AxisSplit sp = split_axis(os, axis);
  Tensor<T> out(os);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t run = dims[k] * sp.inner;
    const auto pv = parts[k].value().data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy(pv.data() + o * run, pv.data() + (o + 1) * run,
                out.data().data() + (o * sp.dim + offset) * sp.inner);
    }
    offset += dims[k];
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return tape_of(parts[0], "concat").record(std::move(out), std::move(inputs),
      [sp, dims](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < gi.size(); ++k) {
          const std::size_t run = dims[k] * sp.inner;
          if (gi[k]) {
            T* d = gi[k]->data().data();
            for (std::size_t o = 0; o < sp.outer; ++o) {
              const T* src = g.data().data() + (o * sp.dim + offset) * sp.inner;
              for (std::size_t i = 0; i < run; ++i) d[o * run + i] += src[i];
            }
          }
          offset += dims[k];
        }
      }, "concat");
}

template <class T>
Var<T> gather(const Var<T>& a, std::shared_ptr<const Index> index, Shape out_shape) {
  if (!index || index->size() != shape_numel(out_shape)) {
    throw ShapeError("gather: index length does not match output shape " + shape_str(out_shape));
  }
  const auto av = a.value().data();
  Tensor<T> out(std::move(out_shape));
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const std::size_t src = (*index)[i];
    if (src >= av.size()) throw ShapeError("gather: index out of range for " + shape_str(a.shape()));
    o[i] = av[src];
  }
  return tape_of(a, "gather").record(std::move(out), {a},
      [index](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        auto d = gi[0]->data();
        const auto& idx = *index;
        for (std::size_t i = 0; i < idx.size(); ++i) d[idx[i]] += g[i];
      }, "gather");
}

template <class T>
Var<T> softmax_rows(const Var<T>& a) {
  require_rank("softmax_rows", a.shape(), 2);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor<T> out = a.value();
  for (std::size_t r = 0; r < m; ++r) {
    T* row = out.data().data() + r * n;
    T mx = row[0];
    for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, row[c]);
    T z = 0;
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = std::exp(row[c] - mx);
      z += row[c];
    }
    for (std::size_t c = 0; c < n; ++c) row[c] /= z;
  }
  Tape<T>& tape = tape_of(a, "softmax_rows");
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {a},
      [&tape, self, m, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto y = tape.value(self).data();
        auto d = gi[0]->data();
        for (std::size_t r = 0; r < m; ++r) {
          T dot = 0;
          for (std::size_t c = 0; c < n; ++c) dot += g[r * n + c] * y[r * n + c];
          for (std::size_t c = 0; c < n; ++c) d[r * n + c] += y[r * n + c] * (g[r * n + c] - dot);
        }
      }, "softmax_rows");
}

template <class T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps) {
  require_rank("layer_norm", x.shape(), 2);
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (gain.numel() != n) shape_mismatch("layer_norm", x.shape(), gain.shape());
  if (bias.numel() != n) shape_mismatch("layer_norm", x.shape(), bias.shape());
  const auto xv = x.value().data();
  const auto gv = gain.value().data();
  const auto bv = bias.value().data();
  auto xhat = std::make_shared<std::vector<T>>(m * n);
  auto inv_std = std::make_shared<std::vector<T>>(m);
  Tensor<T> out(Shape{m, n});
  for (std::size_t r = 0; r < m; ++r) {
    T mu = 0;
    for (std::size_t c = 0; c < n; ++c) mu += xv[r * n + c];
    mu /= static_cast<T>(n);
    T var = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const T d = xv[r * n + c] - mu;
      var += d * d;
    }
    var /= static_cast<T>(n);
    const T inv = T{1} / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t c = 0; c < n; ++c) {
      const T h = (xv[r * n + c] - mu) * inv;
      (*xhat)[r * n + c] = h;
      out[r * n + c] = h * gv[c] + bv[c];
    }
  }
  Tape<T>& tape = tape_of(x, "layer_norm");
  const std::size_t ig = gain.id();
  return tape.record(std::move(out), {x, gain, bias},
      [&tape, ig, xhat, inv_std, m, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto gv = tape.value(ig).data();
        const auto& h = *xhat;
        if (gi[1]) {
          auto d = gi[1]->data();
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) d[c] += g[r * n + c] * h[r * n + c];
        }
        if (gi[2]) {
          auto d = gi[2]->data();
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) d[c] += g[r * n + c];
        }
        if (gi[0]) {
          auto d = gi[0]->data();
          const T nn = static_cast<T>(n);
          for (std::size_t r = 0; r < m; ++r) {
            T sum_dh = 0, sum_dh_h = 0;
            for (std::size_t c = 0; c < n; ++c) {
              const T dh = g[r * n + c] * gv[c];
              sum_dh += dh;
              sum_dh_h += dh * h[r * n + c];
            }
            const T k = (*inv_std)[r] / nn;
            for (std::size_t c = 0; c < n; ++c) {
              const T dh = g[r * n + c] * gv[c];
              d[r * n + c] += k * (nn * dh - sum_dh - h[r * n + c] * sum_dh_h);
            }
          }
        }
      }, "layer_norm");
}

template <class T>
Var<T> gelu(const Var<T>& a) {
  const T inv_sqrt2 = T{1} / std::numbers::sqrt2_v<T>;
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = T(0.5) * v * (T{1} + std::erf(v * inv_sqrt2));
  Tape<T>& tape = tape_of(a, "gelu");
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a},
      [&tape, ia, inv_sqrt2](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const T inv_sqrt_2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<T>;
        const auto xv = tape.value(ia).data();
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) {
          const T x = xv[i];
          const T cdf = T(0.5) * (T{1} + std::erf(x * inv_sqrt2));
          const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * x * x);
          d[i] += g[i] * (cdf + x * pdf);
        }
      }, "gelu");
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) {
    if (v >= 0) {
      v = T{1} / (T{1} + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T{1} + e);
    }
  }
  Tape<T>& tape = tape_of(a, "sigmoid");
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {a},
      [&tape, self](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto y = tape.value(self).data();
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * y[i] * (T{1} - y[i]);
      }, "sigmoid");
}

template <class T>
Var<T> clamp(const Var<T>& a, T lo, T hi) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = std::min(std::max(v, lo), hi);
  Tape<T>& tape = tape_of(a, "clamp");
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a},
      [&tape, ia, lo, hi](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto xv = tape.value(ia).data();
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (xv[i] >= lo && xv[i] <= hi) d[i] += g[i];
        }
      }, "clamp");
}

template <class T>
Var<T> clamp_straight_through(const Var<T>& a, T lo, T hi) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = std::min(std::max(v, lo), hi);
  return tape_of(a, "clamp_straight_through").record(std::move(out), {a},
      [](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        auto d = gi[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
      }, "clamp_straight_through");
}

template <class T>
Var<T> sum(const Var<T>& a) {
  T s = 0;
  for (T v : a.value().data()) s += v;
  return tape_of(a, "sum").record(Tensor<T>::scalar(s), {a},
      [](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        for (auto& d : gi[0]->data()) d += g[0];
      }, "sum");
}

template <class T>
Var<T> mean(const Var<T>& a) {
  const T n = static_cast<T>(a.numel());
  T s = 0;
  for (T v : a.value().data()) s += v;
  return tape_of(a, "mean").record(Tensor<T>::scalar(s / n), {a},
      [n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const T share = g[0] / n;
        for (auto& d : gi[0]->data()) d += share;
      }, "mean");
}

template <class T>
Var<T> replace_rows(const Var<T>& x, const std::vector<std::uint8_t>& row_mask, const Var<T>& token) {
  require_rank("replace_rows", x.shape(), 2);
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (row_mask.size() != m) {
    throw ShapeError("replace_rows: mask length " + std::to_string(row_mask.size()) + " vs rows of " +
                     shape_str(x.shape()));
  }
  if (token.numel() != n) shape_mismatch("replace_rows", x.shape(), token.shape());
  Tensor<T> out = x.value();
  const auto tv = token.value().data();
  for (std::size_t r = 0; r < m; ++r) {
    if (row_mask[r]) std::copy(tv.begin(), tv.end(), out.data().begin() + r * n);
  }
  return tape_of(x, "replace_rows").record(std::move(out), {x, token},
      [row_mask, m, n](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        for (std::size_t r = 0; r < m; ++r) {
          Tensor<T>* dst = row_mask[r] ? gi[1] : gi[0];
          if (!dst) continue;
          T* d = dst->data().data() + (row_mask[r] ? 0 : r * n);
          for (std::size_t c = 0; c < n; ++c) d[c] += g[r * n + c];
        }
      }, "replace_rows");
}

template <class T>
T smooth_l1_elem(T diff, T beta) {
  const T ad = std::abs(diff);
  return ad < beta ? T(0.5) * diff * diff / beta : ad - T(0.5) * beta;
}

template <class T>
Var<T> smooth_l1(const Var<T>& pred, const Var<T>& target, T beta, const std::optional<Tensor<T>>& mask) {
  if (!(beta > 0)) throw ValueError("smooth_l1: beta must be positive");
  require_same("smooth_l1", pred.shape(), target.shape());
  if (mask) require_same("smooth_l1", pred.shape(), mask->shape());
  const auto pv = pred.value().data();
  const auto tv = target.value().data();
  std::size_t count = 0;
  T total = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (mask && (*mask)[i] == T{0}) continue;
    ++count;
    total += smooth_l1_elem(pv[i] - tv[i], beta);
  }
  if (count == 0) throw ValueError("smooth_l1: mask selects no elements");
  const T n = static_cast<T>(count);
  Tape<T>& tape = tape_of(pred, "smooth_l1");
  const std::size_t ip = pred.id(), it = target.id();
  std::optional<Tensor<T>> m = mask;
  return tape.record(Tensor<T>::scalar(total / n), {pred, target},
      [&tape, ip, it, beta, n, m](const Tensor<T>& g, std::span<Tensor<T>*> gi) {
        const auto pv = tape.value(ip).data();
        const auto tv = tape.value(it).data();
        for (std::size_t i = 0; i < pv.size(); ++i) {
          if (m && (*m)[i] == T{0}) continue;
          const T d = pv[i] - tv[i];
          T slope = std::abs(d) < beta ? d / beta : (d > 0 ? T{1} : T{-1});
          slope *= g[0] / n;
          if (gi[0]) (*gi[0])[i] += slope;
          if (gi[1]) (*gi[1])[i] -= slope;
        }
      }, "smooth_l1");
}

#define VICT_INSTANTIATE_OPS(T)                                                                  \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> scale<T>(const Var<T>&, T);                                                  \
  template Var<T> add_bias<T>(const Var<T>&, const Var<T>&);                                   \
  template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                                     \
  template Var<T> transpose<T>(const Var<T>&);                                                 \
  template Var<T> reshape<T>(const Var<T>&, Shape);                                            \
  template Var<T> slice<T>(const Var<T>&, std::size_t, std::size_t, std::size_t);              \
  template Var<T> concat<T>(std::span<const Var<T>>, std::size_t);                             \
  template Var<T> gather<T>(const Var<T>&, std::shared_ptr<const Index>, Shape);               \
  template Var<T> softmax_rows<T>(const Var<T>&);                                              \
  template Var<T> layer_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);               \
  template Var<T> gelu<T>(const Var<T>&);                                                      \
  template Var<T> sigmoid<T>(const Var<T>&);                                                   \
  template Var<T> clamp<T>(const Var<T>&, T, T);                                               \
  template Var<T> clamp_straight_through<T>(const Var<T>&, T, T);                               \
  template Var<T> sum<T>(const Var<T>&);                                                       \
  template Var<T> mean<T>(const Var<T>&);                                                      \
  template Var<T> replace_rows<T>(const Var<T>&, const std::vector<std::uint8_t>&, const Var<T>&); \
  template T smooth_l1_elem<T>(T, T);                                                          \
  template Var<T> smooth_l1<T>(const Var<T>&, const Var<T>&, T, const std::optional<Tensor<T>>&);

VICT_INSTANTIATE_OPS(float)
VICT_INSTANTIATE_OPS(double)

}  // namespace vict::ops
