#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "vict/autodiff.hpp"
#include "vict/image.hpp"
#include "vict/ops.hpp"

namespace vict {

/// Quadrant of the 2x2 canvas, in reading order.
enum class CellPos : std::uint8_t { TopLeft = 0, TopRight = 1, BottomLeft = 2, BottomRight = 3 };

std::string_view cell_name(CellPos pos);

/// Pixel value of the empty cell in the assembled array. The model swaps the
/// patch embeddings of that cell for its mask token, so the network never
/// sees this value.
inline constexpr float kEmptyFill = 0.5f;

/// Which cell is masked, and the per-patch mask it induces.
struct MaskSpec {
  CellPos masked = CellPos::BottomRight;

  /// Row-major over the (2C/P) x (2C/P) patch grid; 1 for patches inside the
  /// masked cell. Requires cell_size % patch_size == 0.
  std::vector<std::uint8_t> patch_mask(std::size_t cell_size, std::size_t patch_size) const;
};

/// Four cells with exactly one left empty.
class Canvas {
 public:
  Canvas(std::array<std::optional<Image>, 4> cells, std::size_t cell_size);

  std::size_t cell_size() const { return cell_size_; }
  const std::optional<Image>& cell(CellPos pos) const { return cells_[static_cast<std::size_t>(pos)]; }
  CellPos empty_cell() const { return empty_; }

  /// [3, 2C, 2C] array; the empty cell is filled with kEmptyFill.
  Image pixels() const;

 private:
  std::array<std::optional<Image>, 4> cells_;
  std::size_t cell_size_;
  CellPos empty_;
};

/// I = (x, y, x_t, empty): predicts the test output in the bottom-right cell.
std::pair<Canvas, MaskSpec> assemble_inference(const Image& x, const Image& y, const Image& x_t);

/// I' = (x, empty, x_t, y_t_hat): prompt and test roles flipped, predicts the
/// prompt output in the top-right cell. y_t_hat is clamped to [0, 1] first.
std::pair<Canvas, MaskSpec> assemble_flipped(const Image& x, const Image& x_t, const Image& y_t_hat);

/// Quadrant slice of a [3, 2C, 2C] array.
Image extract_cell(const Image& canvas_pixels, CellPos pos);

namespace canvas_index {
/// Maps the [4*3, C, C] stack of cells (in CellPos order) to the [3, 2C, 2C] canvas.
std::shared_ptr<const ops::Index> assemble(std::size_t cell_size);
/// Maps a [3, 2C, 2C] canvas to the [3, C, C] cell at `pos`.
std::shared_ptr<const ops::Index> extract(std::size_t cell_size, CellPos pos);
}  // namespace canvas_index

/// Differentiable assembly: empty entries become kEmptyFill constants.
template <class T>
Var<T> assemble_on_tape(Tape<T>& tape, const std::array<std::optional<Var<T>>, 4>& cells, std::size_t cell_size);

/// Differentiable extract_cell.
template <class T>
Var<T> extract_cell(const Var<T>& canvas_pixels, CellPos pos);

}  // namespace vict
