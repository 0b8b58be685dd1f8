#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "vict/error.hpp"

namespace vict {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array. Plain value type; differentiation lives in Tape.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> data);

  static Tensor scalar(T value) { return Tensor(Shape{1}, std::vector<T>{value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  /// Element of a rank-2 tensor.
  T& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  T at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// Element of a rank-3 tensor.
  T& at(std::size_t a, std::size_t b, std::size_t c) {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }
  T at(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }

  void fill(T value);
  /// Same data, new shape with the same element count.
  Tensor reshaped(Shape shape) const;

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  /// Bitwise comparison of shape and values.
  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Throws NumericError naming `what` when any element is NaN or Inf.
template <class T>
void check_finite(const Tensor<T>& t, const char* what);

template <class T>
bool all_finite(std::span<const T> values);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace vict
