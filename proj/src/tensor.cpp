#include "vict/tensor.hpp"

#include <cmath>
#include <sstream>

namespace vict {

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {
void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_str(shape) + " has a zero dimension");
  }
}
}  // namespace

template <class T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_str(shape_));
  }
}

template <class T>
void Tensor<T>::fill(T value) {
  for (auto& v : data_) v = value;
}

template <class T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(shape_) + " as " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <class T>
bool all_finite(std::span<const T> values) {
  for (T v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <class T>
void check_finite(const Tensor<T>& t, const char* what) {
  if (!all_finite(t.data())) throw NumericError(std::string(what) + ": non-finite value in output");
}

template class Tensor<float>;
template class Tensor<double>;
template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);
template void check_finite<float>(const Tensor<float>&, const char*);
template void check_finite<double>(const Tensor<double>&, const char*);

}  // namespace vict
