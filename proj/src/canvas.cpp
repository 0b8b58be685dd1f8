#include "vict/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vict {

std::string_view cell_name(CellPos pos) {
  switch (pos) {
    case CellPos::TopLeft: return "top_left";
    case CellPos::TopRight: return "top_right";
    case CellPos::BottomLeft: return "bottom_left";
    case CellPos::BottomRight: return "bottom_right";
  }
  return "invalid";
}

namespace {

std::size_t cell_index(std::size_t r, std::size_t c, std::size_t size) {
  return (r >= size ? 2 : 0) + (c >= size ? 1 : 0);
}

void check_cell(const Image& img, std::size_t size, const char* what) {
  validate_image(img, what);
  if (img.dim(1) != size || img.dim(2) != size) {
    throw ShapeError(std::string(what) + ": expected [3," + std::to_string(size) + "," + std::to_string(size) +
                     "], got " + shape_str(img.shape()));
  }
}

}  // namespace

std::vector<std::uint8_t> MaskSpec::patch_mask(std::size_t cell_size, std::size_t patch_size) const {
  if (patch_size == 0 || cell_size % patch_size != 0) {
    throw ValueError("patch_mask: cell size " + std::to_string(cell_size) + " is not a multiple of patch size " +
                     std::to_string(patch_size));
  }
  const std::size_t grid = 2 * cell_size / patch_size;
  const std::size_t half = grid / 2;
  std::vector<std::uint8_t> mask(grid * grid, 0);
  const auto target = static_cast<std::size_t>(masked);
  for (std::size_t r = 0; r < grid; ++r) {
    for (std::size_t c = 0; c < grid; ++c) {
      mask[r * grid + c] = cell_index(r, c, half) == target ? 1 : 0;
    }
  }
  return mask;
}

Canvas::Canvas(std::array<std::optional<Image>, 4> cells, std::size_t cell_size)
    : cells_(std::move(cells)), cell_size_(cell_size), empty_(CellPos::BottomRight) {
  if (cell_size_ == 0 || cell_size_ % 2 != 0) throw ValueError("canvas: cell size must be a positive even integer");
  int empties = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (cells_[i]) {
      check_cell(*cells_[i], cell_size_, "canvas");
    } else {
      ++empties;
      empty_ = static_cast<CellPos>(i);
    }
  }
  if (empties != 1) throw ValueError("canvas: exactly one cell must be empty, got " + std::to_string(empties));
}

Image Canvas::pixels() const {
  const std::size_t c = cell_size_;
  std::vector<float> stacked(4 * 3 * c * c, kEmptyFill);
  for (std::size_t i = 0; i < 4; ++i) {
    if (cells_[i]) std::copy(cells_[i]->data().begin(), cells_[i]->data().end(), stacked.begin() + i * 3 * c * c);
  }
  const auto index = canvas_index::assemble(c);
  Image out(Shape{3, 2 * c, 2 * c});
  for (std::size_t i = 0; i < index->size(); ++i) out[i] = stacked[(*index)[i]];
  return out;
}

std::pair<Canvas, MaskSpec> assemble_inference(const Image& x, const Image& y, const Image& x_t) {
  validate_image(x, "assemble_inference");
  const std::size_t size = x.dim(1);
  check_cell(y, size, "assemble_inference");
  check_cell(x_t, size, "assemble_inference");
  Canvas canvas({x, y, x_t, std::nullopt}, size);
  return {std::move(canvas), MaskSpec{CellPos::BottomRight}};
}

std::pair<Canvas, MaskSpec> assemble_flipped(const Image& x, const Image& x_t, const Image& y_t_hat) {
  validate_image(x, "assemble_flipped");
  const std::size_t size = x.dim(1);
  check_cell(x_t, size, "assemble_flipped");
  Image clamped = y_t_hat;
  for (auto& v : clamped.data()) {
    if (std::isnan(v)) throw NumericError("assemble_flipped: NaN in predicted test output");
    v = std::clamp(v, 0.0f, 1.0f);
  }
  check_cell(clamped, size, "assemble_flipped");
  Canvas canvas({x, std::nullopt, x_t, std::move(clamped)}, size);
  return {std::move(canvas), MaskSpec{CellPos::TopRight}};
}

Image extract_cell(const Image& canvas_pixels, CellPos pos) {
  const auto& s = canvas_pixels.shape();
  if (s.size() != 3 || s[0] != 3 || s[1] != s[2] || s[1] % 2 != 0) {
    throw ShapeError("extract_cell: expected [3,2C,2C], got " + shape_str(s));
  }
  const std::size_t c = s[1] / 2;
  const auto index = canvas_index::extract(c, pos);
  Image out(Shape{3, c, c});
  for (std::size_t i = 0; i < index->size(); ++i) out[i] = canvas_pixels[(*index)[i]];
  return out;
}

namespace canvas_index {

std::shared_ptr<const ops::Index> assemble(std::size_t c) {
  auto index = std::make_shared<ops::Index>(3 * 4 * c * c);
  const std::size_t w = 2 * c;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t r = 0; r < w; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        const std::size_t cell = cell_index(r, col, c);
        (*index)[(ch * w + r) * w + col] =
            static_cast<std::uint32_t>(((cell * 3 + ch) * c + r % c) * c + col % c);
      }
    }
  }
  return index;
}

std::shared_ptr<const ops::Index> extract(std::size_t c, CellPos pos) {
  auto index = std::make_shared<ops::Index>(3 * c * c);
  const std::size_t w = 2 * c;
  const auto p = static_cast<std::size_t>(pos);
  const std::size_t r0 = (p / 2) * c, c0 = (p % 2) * c;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t r = 0; r < c; ++r) {
      for (std::size_t col = 0; col < c; ++col) {
        (*index)[(ch * c + r) * c + col] = static_cast<std::uint32_t>((ch * w + r0 + r) * w + c0 + col);
      }
    }
  }
  return index;
}

}  // namespace canvas_index

template <class T>
Var<T> assemble_on_tape(Tape<T>& tape, const std::array<std::optional<Var<T>>, 4>& cells, std::size_t cell_size) {
  const Shape cell_shape{3, cell_size, cell_size};
  std::vector<Var<T>> parts;
  parts.reserve(4);
  int empties = 0;
  for (const auto& cell : cells) {
    if (cell) {
      if (cell->shape() != cell_shape) {
        throw ShapeError("assemble_on_tape: cell shape " + shape_str(cell->shape()) + " vs " + shape_str(cell_shape));
      }
      parts.push_back(*cell);
    } else {
      ++empties;
      parts.push_back(tape.constant(Tensor<T>(cell_shape, static_cast<T>(kEmptyFill))));
    }
  }
  if (empties != 1) throw ValueError("assemble_on_tape: exactly one cell must be empty");
  Var<T> stacked = ops::concat<T>(parts, 0);
  return ops::gather(stacked, canvas_index::assemble(cell_size), Shape{3, 2 * cell_size, 2 * cell_size});
}

template <class T>
Var<T> extract_cell(const Var<T>& canvas_pixels, CellPos pos) {
  const auto& s = canvas_pixels.shape();
  if (s.size() != 3 || s[0] != 3 || s[1] != s[2] || s[1] % 2 != 0) {
    throw ShapeError("extract_cell: expected [3,2C,2C], got " + shape_str(s));
  }
  const std::size_t c = s[1] / 2;
  return ops::gather(canvas_pixels, canvas_index::extract(c, pos), Shape{3, c, c});
}

template Var<float> assemble_on_tape<float>(Tape<float>&, const std::array<std::optional<Var<float>>, 4>&, std::size_t);
template Var<double> assemble_on_tape<double>(Tape<double>&, const std::array<std::optional<Var<double>>, 4>&,
                                              std::size_t);
template Var<float> extract_cell<float>(const Var<float>&, CellPos);
template Var<double> extract_cell<double>(const Var<double>&, CellPos);

}  // namespace vict
