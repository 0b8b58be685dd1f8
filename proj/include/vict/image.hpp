#pragma once

#include <filesystem>
#include <span>

#include "vict/tensor.hpp"

namespace vict {

/// Images are [3, H, W] tensors with values in [0, 1].
using Image = Tensor<float>;

/// Throws ShapeError unless `img` is [3, H, W]; ValueError when a value falls
/// outside [0, 1] (or is not finite).
void validate_image(const Image& img, const char* what);

Image constant_image(std::size_t size, float r, float g, float b);

double mse(const Image& a, const Image& b);

/// Mean of the three channels, one value per pixel.
std::vector<double> luminance(const Image& img);

/// Binary portable pixmap (P6, maxval 255). Values are clamped and rounded.
void write_ppm(const Image& img, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

}  // namespace vict
