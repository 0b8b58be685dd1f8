#include "vict/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace vict {

void validate_image(const Image& img, const char* what) {
  if (img.rank() != 3 || img.dim(0) != 3) {
    throw ShapeError(std::string(what) + ": expected [3,H,W] image, got " + shape_str(img.shape()));
  }
  for (float v : img.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValueError(std::string(what) + ": pixel value outside [0,1]");
  }
}

Image constant_image(std::size_t size, float r, float g, float b) {
  Image img(Shape{3, size, size});
  const float rgb[3] = {r, g, b};
  const std::size_t plane = size * size;
  for (std::size_t c = 0; c < 3; ++c) std::fill_n(img.data().begin() + c * plane, plane, rgb[c]);
  return img;
}

double mse(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mse: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.numel());
}

std::vector<double> luminance(const Image& img) {
  const std::size_t plane = img.dim(1) * img.dim(2);
  std::vector<double> out(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = (static_cast<double>(img[i]) + img[plane + i] + img[2 * plane + i]) / 3.0;
  }
  return out;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ShapeError("write_ppm: expected [3,H,W], got " + shape_str(img.shape()));
  const std::size_t h = img.dim(1), w = img.dim(2), plane = h * w;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_ppm: cannot open " + path.string());
  out << "P6\n" << w << ' ' << h << "\n255\n";
  std::string bytes(plane * 3, '\0');
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = std::clamp(img[c * plane + i], 0.0f, 1.0f);
      bytes[i * 3 + c] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write_ppm: write failed for " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_ppm: cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w == 0 || h == 0) throw FormatError("read_ppm: unsupported header in " + path.string());
  in.get();
  const std::size_t plane = w * h;
  std::string bytes(plane * 3, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw FormatError("read_ppm: truncated " + path.string());
  Image img(Shape{3, h, w});
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      img[c * plane + i] = static_cast<float>(static_cast<unsigned char>(bytes[i * 3 + c])) / 255.0f;
    }
  }
  return img;
}

}  // namespace vict
