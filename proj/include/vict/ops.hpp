#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "vict/autodiff.hpp"

/// Differentiable operations over Var. Shapes must match exactly (no
/// broadcasting) except where an op documents otherwise; a mismatch raises
/// ShapeError naming the op and both shapes. Every op output is checked for
/// finiteness.
namespace vict::ops {

using Index = std::vector<std::uint32_t>;

template <class T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> scale(const Var<T>& a, T factor);

/// x[m,n] + b[n] added to every row.
template <class T> Var<T> add_bias(const Var<T>& x, const Var<T>& bias);

/// [m,k] x [k,n] -> [m,n].
template <class T> Var<T> matmul(const Var<T>& a, const Var<T>& b);
/// Rank-2 transpose.
template <class T> Var<T> transpose(const Var<T>& a);
template <class T> Var<T> reshape(const Var<T>& a, Shape shape);

template <class T> Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t start, std::size_t length);
template <class T> Var<T> concat(std::span<const Var<T>> parts, std::size_t axis);

/// out.flat[i] = a.flat[index[i]]; the backward pass scatter-adds.
template <class T> Var<T> gather(const Var<T>& a, std::shared_ptr<const Index> index, Shape out_shape);

/// Softmax over the last axis of a rank-2 tensor.
template <class T> Var<T> softmax_rows(const Var<T>& a);
/// Per-row normalization of x[m,n] with gain[n] and bias[n].
template <class T> Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps = T(1e-5));
/// Exact (erf) GELU.
template <class T> Var<T> gelu(const Var<T>& a);
template <class T> Var<T> sigmoid(const Var<T>& a);
/// Gradient is passed through inside [lo, hi] and zeroed outside.
template <class T> Var<T> clamp(const Var<T>& a, T lo, T hi);
/// Clamps the value but passes the incoming gradient through unchanged.
template <class T> Var<T> clamp_straight_through(const Var<T>& a, T lo, T hi);

template <class T> Var<T> sum(const Var<T>& a);
template <class T> Var<T> mean(const Var<T>& a);

/// Rows of x[m,d] whose mask entry is nonzero are replaced by token[d].
template <class T> Var<T> replace_rows(const Var<T>& x, const std::vector<std::uint8_t>& row_mask, const Var<T>& token);

/// Smooth-L1 (Huber with threshold beta), averaged over elements whose mask
/// entry is 1 (all elements when no mask is given).
template <class T>
Var<T> smooth_l1(const Var<T>& pred, const Var<T>& target, T beta, const std::optional<Tensor<T>>& mask = std::nullopt);

/// Value-only smooth-L1 of a single difference; shared by tests and tools.
template <class T> T smooth_l1_elem(T diff, T beta);

}  // namespace vict::ops
