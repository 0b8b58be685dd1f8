#include "vict/corruptions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "vict/rng.hpp"
#include "vict/tasks.hpp"

namespace vict {

namespace {

using K = CorruptionKind;

constexpr std::array<CorruptionKind, kNumCorruptions> kDeclared = {
    K::GaussianNoise, K::ShotNoise,        K::ImpulseNoise,    K::DefocusBlur, K::GlassBlur,
    K::MotionBlur,    K::ZoomBlur,         K::Fog,             K::Frost,       K::Snow,
    K::Brightness,    K::Contrast,         K::ElasticTransform, K::JpegCompression, K::Pixelate,
};

constexpr std::array<CorruptionKind, kNumCorruptions> kReport = {
    K::Brightness, K::Contrast,  K::DefocusBlur,  K::ElasticTransform, K::Fog,
    K::Frost,      K::GaussianNoise, K::GlassBlur, K::ImpulseNoise,   K::JpegCompression,
    K::MotionBlur, K::Pixelate,  K::ShotNoise,    K::Snow,             K::ZoomBlur,
};

struct KindInfo {
  std::string_view name;
  std::string_view abbrev;
  CorruptionCategory category;
  std::size_t arity;
};

constexpr std::array<KindInfo, kNumCorruptions> kInfo = {{
    {"gaussian_noise", "gauss", CorruptionCategory::Noise, 1},
    {"shot_noise", "shot", CorruptionCategory::Noise, 1},
    {"impulse_noise", "impul", CorruptionCategory::Noise, 1},
    {"defocus_blur", "defoc", CorruptionCategory::Blur, 1},
    {"glass_blur", "glass", CorruptionCategory::Blur, 3},
    {"motion_blur", "motn", CorruptionCategory::Blur, 1},
    {"zoom_blur", "zoom", CorruptionCategory::Blur, 2},
    {"fog", "fog", CorruptionCategory::Weather, 2},
    {"frost", "frost", CorruptionCategory::Weather, 2},
    {"snow", "snow", CorruptionCategory::Weather, 3},
    {"brightness", "brigh", CorruptionCategory::Digital, 1},
    {"contrast", "cont", CorruptionCategory::Digital, 1},
    {"elastic_transform", "elast", CorruptionCategory::Digital, 2},
    {"jpeg_compression", "jpeg", CorruptionCategory::Digital, 1},
    {"pixelate", "pixel", CorruptionCategory::Digital, 1},
}};

const KindInfo& info(CorruptionKind kind) {
  const auto i = static_cast<std::size_t>(kind);
  if (i >= kNumCorruptions) throw ValueError("unknown corruption kind " + std::to_string(i));
  return kInfo[i];
}

void check_severity(int severity) {
  if (severity < 1 || severity > kMaxSeverity) {
    throw ValueError("severity must be in [1,5], got " + std::to_string(severity));
  }
}

// ---- plane helpers -------------------------------------------------------

// Mirror without repeating the edge sample: ... c b | a b c d | c b ...
std::ptrdiff_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::ptrdiff_t clamp_index(std::ptrdiff_t i, std::ptrdiff_t n) { return std::clamp<std::ptrdiff_t>(i, 0, n - 1); }

struct Kernel {
  std::ptrdiff_t radius;
  std::vector<double> w;  // (2r+1)^2, row-major

  double at(std::ptrdiff_t dy, std::ptrdiff_t dx) const {
    const auto side = 2 * radius + 1;
    return w[static_cast<std::size_t>((dy + radius) * side + dx + radius)];
  }
};

void normalize(Kernel& k) {
  double s = 0;
  for (double v : k.w) s += v;
  for (double& v : k.w) v /= s;
}

Image convolve(const Image& img, const Kernel& k) {
  const auto n = static_cast<std::ptrdiff_t>(img.dim(1));
  Image out(img.shape());
  for (std::ptrdiff_t ch = 0; ch < 3; ++ch) {
    const float* src = img.data().data() + ch * n * n;
    float* dst = out.data().data() + ch * n * n;
    for (std::ptrdiff_t y = 0; y < n; ++y) {
      for (std::ptrdiff_t x = 0; x < n; ++x) {
        double acc = 0;
        for (std::ptrdiff_t dy = -k.radius; dy <= k.radius; ++dy) {
          const auto sy = reflect(y + dy, n);
          for (std::ptrdiff_t dx = -k.radius; dx <= k.radius; ++dx) {
            const double w = k.at(dy, dx);
            if (w != 0.0) acc += w * src[sy * n + reflect(x + dx, n)];
          }
        }
        dst[y * n + x] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::vector<double> gaussian_1d(double sigma, std::ptrdiff_t& radius) {
  radius = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma)));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double s = 0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    w[static_cast<std::size_t>(i + radius)] = v;
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

// Separable Gaussian blur of a single n x n plane, reflect padding.
std::vector<double> blur_plane(const std::vector<double>& plane, std::ptrdiff_t n, double sigma) {
  if (sigma <= 0) return plane;
  std::ptrdiff_t r = 0;
  const auto w = gaussian_1d(sigma, r);
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (std::ptrdiff_t y = 0; y < n; ++y) {
    for (std::ptrdiff_t x = 0; x < n; ++x) {
      double acc = 0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) acc += w[static_cast<std::size_t>(d + r)] * plane[y * n + reflect(x + d, n)];
      tmp[y * n + x] = acc;
    }
  }
  for (std::ptrdiff_t y = 0; y < n; ++y) {
    for (std::ptrdiff_t x = 0; x < n; ++x) {
      double acc = 0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) acc += w[static_cast<std::size_t>(d + r)] * tmp[reflect(y + d, n) * n + x];
      out[y * n + x] = acc;
    }
  }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto n = static_cast<std::ptrdiff_t>(img.dim(1));
  const auto plane = static_cast<std::size_t>(n * n);
  Image out(img.shape());
  for (std::size_t ch = 0; ch < 3; ++ch) {
    std::vector<double> p(plane);
    for (std::size_t i = 0; i < plane; ++i) p[i] = img[ch * plane + i];
    const auto b = blur_plane(p, n, sigma);
    for (std::size_t i = 0; i < plane; ++i) out[ch * plane + i] = static_cast<float>(b[i]);
  }
  return out;
}

// Bilinear sample with clamp-to-edge; (x, y) in pixel-index coordinates.
float bilinear(const float* plane, std::ptrdiff_t n, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto x0 = static_cast<std::ptrdiff_t>(fx), y0 = static_cast<std::ptrdiff_t>(fy);
  const double ax = x - fx, ay = y - fy;
  auto px = [&](std::ptrdiff_t yy, std::ptrdiff_t xx) {
    return static_cast<double>(plane[clamp_index(yy, n) * n + clamp_index(xx, n)]);
  };
  const double top = px(y0, x0) * (1 - ax) + px(y0, x0 + 1) * ax;
  const double bot = px(y0 + 1, x0) * (1 - ax) + px(y0 + 1, x0 + 1) * ax;
  return static_cast<float>(top * (1 - ay) + bot * ay);
}

// Toroidal diamond-square fractal on a 2^k grid, min-max normalized to [0,1],
// cropped to n x n. Larger decay gives a smoother field.
std::vector<double> plasma(Rng& rng, std::size_t n, double decay) {
  std::size_t side = 2;
  while (side < n) side *= 2;
  const auto s = static_cast<std::ptrdiff_t>(side);
  std::vector<double> m(side * side, 0.0);
  auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) -> double& {
    return m[static_cast<std::size_t>(((y % s + s) % s) * s + (x % s + s) % s)];
  };
  double wibble = 1.0;
  for (std::ptrdiff_t step = s; step >= 2; step /= 2) {
    const std::ptrdiff_t h = step / 2;
    for (std::ptrdiff_t y = 0; y < s; y += step) {
      for (std::ptrdiff_t x = 0; x < s; x += step) {
        const double avg = 0.25 * (at(y, x) + at(y, x + step) + at(y + step, x) + at(y + step, x + step));
        at(y + h, x + h) = avg + rng.uniform(-wibble, wibble);
      }
    }
    for (std::ptrdiff_t y = 0; y < s; y += step) {
      for (std::ptrdiff_t x = 0; x < s; x += step) {
        for (auto [py, px] : {std::pair{y, x + h}, std::pair{y + h, x}}) {
          const double avg = 0.25 * (at(py - h, px) + at(py + h, px) + at(py, px - h) + at(py, px + h));
          at(py, px) = avg + rng.uniform(-wibble, wibble);
        }
      }
    }
    wibble /= decay;
  }
  std::vector<double> out(n * n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) out[y * n + x] = m[y * side + x];
  }
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double a = *lo, b = *hi;
  for (double& v : out) v = b > a ? (v - a) / (b - a) : 0.0;
  return out;
}

Kernel line_kernel(double length, double angle) {
  Kernel k;
  k.radius = static_cast<std::ptrdiff_t>(std::ceil(length / 2.0));
  const auto side = 2 * k.radius + 1;
  k.w.assign(static_cast<std::size_t>(side * side), 0.0);
  const int samples = std::max(2, static_cast<int>(std::ceil(length * 4)));
  const double half = (length - 1.0) / 2.0;
  for (int i = 0; i < samples; ++i) {
    const double t = -half + 2.0 * half * i / (samples - 1);
    const double x = t * std::cos(angle) + static_cast<double>(k.radius);
    const double y = t * std::sin(angle) + static_cast<double>(k.radius);
    const double fx = std::floor(x), fy = std::floor(y);
    const double ax = x - fx, ay = y - fy;
    auto splat = [&](double yy, double xx, double w) {
      const auto iy = static_cast<std::ptrdiff_t>(yy), ix = static_cast<std::ptrdiff_t>(xx);
      if (iy < 0 || ix < 0 || iy >= side || ix >= side) return;
      k.w[static_cast<std::size_t>(iy * side + ix)] += w;
    };
    splat(fy, fx, (1 - ax) * (1 - ay));
    splat(fy, fx + 1, ax * (1 - ay));
    splat(fy + 1, fx, (1 - ax) * ay);
    splat(fy + 1, fx + 1, ax * ay);
  }
  normalize(k);
  return k;
}

void clamp01(Image& img) {
  for (auto& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
}

// ---- JPEG ----------------------------------------------------------------

constexpr std::array<int, 64> kLumaQ = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55, 64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr std::array<int, 64> kChromaQ = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99,
    99, 99, 47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

std::array<double, 64> scaled_table(const std::array<int, 64>& base, double quality) {
  const double q = std::clamp(quality, 1.0, 100.0);
  const double scale = q < 50 ? 5000.0 / q : 200.0 - 2.0 * q;
  std::array<double, 64> t{};
  for (std::size_t i = 0; i < 64; ++i) t[i] = std::clamp(std::floor((base[i] * scale + 50.0) / 100.0), 1.0, 255.0);
  return t;
}

const std::array<double, 64>& dct_basis() {
  static const std::array<double, 64> basis = [] {
    std::array<double, 64> b{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) b[static_cast<std::size_t>(u * 8 + x)] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

void jpeg_block(std::array<double, 64>& block, const std::array<double, 64>& q) {
  const auto& b = dct_basis();
  std::array<double, 64> tmp{}, coef{};
  // coef = B * block * B^T
  for (int u = 0; u < 8; ++u)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += b[static_cast<std::size_t>(u * 8 + y)] * block[static_cast<std::size_t>(y * 8 + x)];
      tmp[static_cast<std::size_t>(u * 8 + x)] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += tmp[static_cast<std::size_t>(u * 8 + x)] * b[static_cast<std::size_t>(v * 8 + x)];
      const auto i = static_cast<std::size_t>(u * 8 + v);
      coef[i] = std::round(s / q[i]) * q[i];
    }
  // block = B^T * coef * B
  for (int y = 0; y < 8; ++y)
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[static_cast<std::size_t>(u * 8 + y)] * coef[static_cast<std::size_t>(u * 8 + v)];
      tmp[static_cast<std::size_t>(y * 8 + v)] = s;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += tmp[static_cast<std::size_t>(y * 8 + v)] * b[static_cast<std::size_t>(v * 8 + x)];
      block[static_cast<std::size_t>(y * 8 + x)] = s;
    }
}

Image jpeg(const Image& img, double quality) {
  const auto n = static_cast<std::ptrdiff_t>(img.dim(1));
  const auto plane = static_cast<std::size_t>(n * n);
  std::array<std::vector<double>, 3> ycc;
  for (auto& p : ycc) p.resize(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const double r = img[i] * 255.0, g = img[plane + i] * 255.0, b = img[2 * plane + i] * 255.0;
    ycc[0][i] = 0.299 * r + 0.587 * g + 0.114 * b;
    ycc[1][i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
    ycc[2][i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
  }
  const auto ql = scaled_table(kLumaQ, quality), qc = scaled_table(kChromaQ, quality);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const auto& q = ch == 0 ? ql : qc;
    for (std::ptrdiff_t by = 0; by < n; by += 8) {
      for (std::ptrdiff_t bx = 0; bx < n; bx += 8) {
        std::array<double, 64> block{};
        for (std::ptrdiff_t y = 0; y < 8; ++y)
          for (std::ptrdiff_t x = 0; x < 8; ++x)
            block[static_cast<std::size_t>(y * 8 + x)] =
                ycc[ch][static_cast<std::size_t>(clamp_index(by + y, n) * n + clamp_index(bx + x, n))] - 128.0;
        jpeg_block(block, q);
        for (std::ptrdiff_t y = 0; y < 8 && by + y < n; ++y)
          for (std::ptrdiff_t x = 0; x < 8 && bx + x < n; ++x)
            ycc[ch][static_cast<std::size_t>((by + y) * n + bx + x)] = block[static_cast<std::size_t>(y * 8 + x)] + 128.0;
      }
    }
  }
  Image out(img.shape());
  for (std::size_t i = 0; i < plane; ++i) {
    const double y = ycc[0][i], cb = ycc[1][i] - 128.0, cr = ycc[2][i] - 128.0;
    out[i] = static_cast<float>((y + 1.402 * cr) / 255.0);
    out[plane + i] = static_cast<float>((y - 0.344136 * cb - 0.714136 * cr) / 255.0);
    out[2 * plane + i] = static_cast<float>((y + 1.772 * cb) / 255.0);
  }
  return out;
}

// ---- per-kind implementations -------------------------------------------

Image apply_kind(const Image& img, CorruptionKind kind, const std::vector<double>& p, Rng& rng) {
  const auto n = static_cast<std::ptrdiff_t>(img.dim(1));
  const auto plane = static_cast<std::size_t>(n * n);
  Image out = img;
  switch (kind) {
    case K::GaussianNoise:
      if (p[0] == 0.0) return out;
      for (auto& v : out.data()) v = static_cast<float>(v + p[0] * rng.normal());
      break;
    case K::ShotNoise:
      for (auto& v : out.data()) v = static_cast<float>(static_cast<double>(rng.poisson(v * p[0])) / p[0]);
      break;
    case K::ImpulseNoise:
      for (auto& v : out.data()) {
        if (rng.bernoulli(p[0])) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
      }
      break;
    case K::DefocusBlur: {
      Kernel k;
      k.radius = static_cast<std::ptrdiff_t>(std::floor(p[0]));
      const auto side = 2 * k.radius + 1;
      k.w.assign(static_cast<std::size_t>(side * side), 0.0);
      for (std::ptrdiff_t dy = -k.radius; dy <= k.radius; ++dy)
        for (std::ptrdiff_t dx = -k.radius; dx <= k.radius; ++dx)
          if (static_cast<double>(dx * dx + dy * dy) <= p[0] * p[0])
            k.w[static_cast<std::size_t>((dy + k.radius) * side + dx + k.radius)] = 1.0;
      normalize(k);
      out = convolve(img, k);
      break;
    }
    case K::GlassBlur: {
      const auto r = static_cast<std::ptrdiff_t>(p[1]);
      const auto iters = static_cast<int>(p[2]);
      for (int it = 0; it < iters; ++it) {
        for (std::ptrdiff_t y = n - r - 1; y >= r; --y) {
          for (std::ptrdiff_t x = n - r - 1; x >= r; --x) {
            const auto dy = rng.uniform_int(-r, r), dx = rng.uniform_int(-r, r);
            for (std::size_t ch = 0; ch < 3; ++ch) {
              std::swap(out[ch * plane + static_cast<std::size_t>(y * n + x)],
                        out[ch * plane + static_cast<std::size_t>((y + dy) * n + x + dx)]);
            }
          }
        }
      }
      out = gaussian_blur(out, p[0]);
      break;
    }
    case K::MotionBlur:
      out = convolve(img, line_kernel(p[0], rng.uniform(0.0, std::numbers::pi)));
      break;
    case K::ZoomBlur: {
      std::vector<double> acc(img.data().begin(), img.data().end());
      int copies = 1;
      const double c = static_cast<double>(n) / 2.0;
      for (double z = 1.0 + p[1]; z <= p[0] + 1e-9; z += p[1], ++copies) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const float* src = img.data().data() + ch * plane;
          for (std::ptrdiff_t y = 0; y < n; ++y)
            for (std::ptrdiff_t x = 0; x < n; ++x)
              acc[ch * plane + static_cast<std::size_t>(y * n + x)] +=
                  bilinear(src, n, c + (static_cast<double>(x) + 0.5 - c) / z - 0.5,
                           c + (static_cast<double>(y) + 0.5 - c) / z - 0.5);
        }
      }
      for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / copies);
      break;
    }
    case K::Fog: {
      const auto f = plasma(rng, static_cast<std::size_t>(n), p[1]);
      for (std::size_t ch = 0; ch < 3; ++ch)
        for (std::size_t i = 0; i < plane; ++i) {
          const double a = p[0] * f[i];
          out[ch * plane + i] = static_cast<float>(img[ch * plane + i] * (1 - a) + a);
        }
      break;
    }
    case K::Frost: {
      // Rough field (decay near 1 keeps high frequencies) thresholded into crystals.
      const auto f = plasma(rng, static_cast<std::size_t>(n), 1.15);
      constexpr std::array<double, 3> ice = {0.85, 0.92, 1.0};
      for (std::size_t i = 0; i < plane; ++i) {
        const double m = std::clamp((f[i] - p[1]) / (1.0 - p[1]), 0.0, 1.0);
        const double a = p[0] * std::sqrt(m);
        for (std::size_t ch = 0; ch < 3; ++ch)
          out[ch * plane + i] = static_cast<float>(img[ch * plane + i] * (1 - a) + ice[ch] * a);
      }
      break;
    }
    case K::Snow: {
      Image flakes(Shape{3, img.dim(1), img.dim(2)}, 0.0f);
      for (std::size_t i = 0; i < plane; ++i) {
        if (rng.bernoulli(p[0])) {
          const auto v = static_cast<float>(rng.uniform(0.7, 1.0));
          for (std::size_t ch = 0; ch < 3; ++ch) flakes[ch * plane + i] = v;
        }
      }
      const double angle = std::numbers::pi / 2 + rng.uniform(-0.4, 0.4);
      const Image streaks = convolve(flakes, line_kernel(p[1], angle));
      const double w = p[2];
      for (std::size_t i = 0; i < out.numel(); ++i) {
        const double base = img[i] + w * (1.0 - img[i]);
        out[i] = static_cast<float>(base + std::min(1.0, streaks[i] * p[1] * 0.6));
      }
      break;
    }
    case K::Brightness:
      for (auto& v : out.data()) v = static_cast<float>(v + p[0]);
      break;
    case K::Contrast: {
      double mean = 0;
      for (float v : img.data()) mean += v;
      mean /= static_cast<double>(img.numel());
      for (auto& v : out.data()) v = static_cast<float>((v - mean) * p[0] + mean);
      break;
    }
    case K::ElasticTransform: {
      std::array<std::vector<double>, 2> field;
      for (auto& f : field) {
        f.resize(plane);
        for (auto& v : f) v = rng.uniform(-1.0, 1.0);
        f = blur_plane(f, n, p[1]);
        double peak = 0;
        for (double v : f) peak = std::max(peak, std::abs(v));
        for (double& v : f) v = peak > 0 ? v / peak * p[0] : 0.0;
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const float* src = img.data().data() + ch * plane;
        for (std::ptrdiff_t y = 0; y < n; ++y)
          for (std::ptrdiff_t x = 0; x < n; ++x) {
            const auto i = static_cast<std::size_t>(y * n + x);
            out[ch * plane + i] = bilinear(src, n, static_cast<double>(x) + field[0][i], static_cast<double>(y) + field[1][i]);
          }
      }
      break;
    }
    case K::JpegCompression:
      out = jpeg(img, p[0]);
      break;
    case K::Pixelate: {
      const auto small = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::lround(static_cast<double>(n) / p[0])));
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::ptrdiff_t y = 0; y < n; ++y) {
          const auto sy = std::min(n - 1, ((y * small / n) * n + n / 2) / small);
          for (std::ptrdiff_t x = 0; x < n; ++x) {
            const auto sx = std::min(n - 1, ((x * small / n) * n + n / 2) / small);
            out[ch * plane + static_cast<std::size_t>(y * n + x)] = img[ch * plane + static_cast<std::size_t>(sy * n + sx)];
          }
        }
      }
      break;
    }
  }
  clamp01(out);
  return out;
}

SeverityTable build_defaults() {
  SeverityTable t;
  auto set = [&](CorruptionKind k, std::initializer_list<std::vector<double>> rows) {
    int s = 1;
    for (const auto& r : rows) t.set_row(k, s++, r);
  };
  set(K::GaussianNoise, {{0.04}, {0.08}, {0.12}, {0.18}, {0.26}});
  set(K::ShotNoise, {{60}, {25}, {12}, {5}, {3}});
  set(K::ImpulseNoise, {{0.03}, {0.06}, {0.09}, {0.17}, {0.27}});
  set(K::DefocusBlur, {{1.0}, {1.5}, {2.0}, {2.5}, {3.0}});
  set(K::GlassBlur, {{0.5, 1, 1}, {0.6, 1, 2}, {0.7, 2, 1}, {0.8, 2, 2}, {1.0, 3, 2}});
  set(K::MotionBlur, {{3}, {5}, {7}, {9}, {11}});
  set(K::ZoomBlur, {{1.06, 0.02}, {1.10, 0.02}, {1.14, 0.02}, {1.20, 0.02}, {1.26, 0.02}});
  set(K::Fog, {{0.3, 2.0}, {0.4, 2.0}, {0.5, 1.7}, {0.6, 1.5}, {0.75, 1.4}});
  set(K::Frost, {{0.35, 0.6}, {0.45, 0.55}, {0.55, 0.5}, {0.65, 0.45}, {0.75, 0.4}});
  set(K::Snow, {{0.01, 3, 0.05}, {0.02, 4, 0.08}, {0.03, 5, 0.11}, {0.05, 6, 0.14}, {0.07, 7, 0.18}});
  set(K::Brightness, {{0.1}, {0.2}, {0.3}, {0.4}, {0.5}});
  set(K::Contrast, {{0.4}, {0.3}, {0.2}, {0.1}, {0.05}});
  set(K::ElasticTransform, {{1.0, 2.0}, {1.5, 2.0}, {2.0, 2.0}, {2.75, 2.0}, {3.5, 2.0}});
  set(K::JpegCompression, {{50}, {30}, {20}, {12}, {7}});
  set(K::Pixelate, {{2.0}, {2.5}, {3.0}, {4.0}, {5.0}});
  return t;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

const std::array<CorruptionKind, kNumCorruptions>& all_corruptions() { return kDeclared; }
const std::array<CorruptionKind, kNumCorruptions>& report_order() { return kReport; }

std::string_view corruption_name(CorruptionKind kind) { return info(kind).name; }
std::string_view corruption_abbrev(CorruptionKind kind) { return info(kind).abbrev; }
CorruptionCategory corruption_category(CorruptionKind kind) { return info(kind).category; }

CorruptionKind parse_corruption(std::string_view name) {
  for (auto k : kDeclared) {
    if (info(k).name == name || info(k).abbrev == name) return k;
  }
  throw ValueError("unknown corruption '" + std::string(name) + "'");
}

std::string_view category_name(CorruptionCategory category) {
  switch (category) {
    case CorruptionCategory::Noise: return "noise";
    case CorruptionCategory::Blur: return "blur";
    case CorruptionCategory::Weather: return "weather";
    case CorruptionCategory::Digital: return "digital";
  }
  return "invalid";
}

void CorruptionSpec::validate() const {
  info(kind);
  check_severity(severity);
}

const SeverityTable& SeverityTable::defaults() {
  static const SeverityTable t = build_defaults();
  return t;
}

const std::vector<double>& SeverityTable::row(CorruptionKind kind, int severity) const {
  info(kind);
  check_severity(severity);
  const auto& r = rows_[static_cast<std::size_t>(kind)][static_cast<std::size_t>(severity - 1)];
  if (r.empty()) {
    throw ValueError("severity table has no row for " + std::string(corruption_name(kind)) + "." +
                     std::to_string(severity));
  }
  return r;
}

void SeverityTable::set_row(CorruptionKind kind, int severity, std::vector<double> values) {
  const auto& ki = info(kind);
  check_severity(severity);
  if (values.size() != ki.arity) {
    throw ValueError(std::string(ki.name) + " expects " + std::to_string(ki.arity) + " parameter(s), got " +
                     std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ValueError(std::string(ki.name) + ": non-finite severity parameter");
  }
  rows_[static_cast<std::size_t>(kind)][static_cast<std::size_t>(severity - 1)] = std::move(values);
}

std::string SeverityTable::to_text() const {
  std::ostringstream os;
  os << "version = 1\n";
  for (auto k : kDeclared) {
    for (int s = 1; s <= kMaxSeverity; ++s) {
      os << corruption_name(k) << '.' << s << " =";
      const auto& r = row(k, s);
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? ", " : " ") << format_double(r[i]);
      os << '\n';
    }
  }
  return os.str();
}

SeverityTable SeverityTable::parse(std::string_view text) {
  SeverityTable t;
  bool versioned = false;
  std::size_t line_no = 0, filled = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("severity table line " + std::to_string(line_no) + ": missing '='");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "version") {
      if (value != "1") throw FormatError("severity table: unsupported version '" + std::string(value) + "'");
      versioned = true;
      continue;
    }
    const auto dot = key.rfind('.');
    if (dot == std::string_view::npos) throw FormatError("severity table line " + std::to_string(line_no) + ": bad key");
    CorruptionKind kind;
    int sev = 0;
    try {
      kind = parse_corruption(key.substr(0, dot));
    } catch (const ValueError& e) {
      throw FormatError("severity table line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto sev_str = key.substr(dot + 1);
    if (std::from_chars(sev_str.data(), sev_str.data() + sev_str.size(), sev).ec != std::errc{} || sev < 1 ||
        sev > kMaxSeverity) {
      throw FormatError("severity table line " + std::to_string(line_no) + ": bad severity");
    }
    std::vector<double> values;
    while (!value.empty()) {
      const auto comma = value.find(',');
      const auto tok = trim(value.substr(0, comma));
      double v = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw FormatError("severity table line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
      }
      values.push_back(v);
      value = comma == std::string_view::npos ? std::string_view{} : trim(value.substr(comma + 1));
    }
    if (!t.rows_[static_cast<std::size_t>(kind)][static_cast<std::size_t>(sev - 1)].empty()) {
      throw FormatError("severity table line " + std::to_string(line_no) + ": duplicate key");
    }
    try {
      t.set_row(kind, sev, std::move(values));
    } catch (const ValueError& e) {
      throw FormatError("severity table line " + std::to_string(line_no) + ": " + e.what());
    }
    ++filled;
  }
  if (!versioned) throw FormatError("severity table: missing version");
  if (filled != kNumCorruptions * kMaxSeverity) {
    throw FormatError("severity table: expected " + std::to_string(kNumCorruptions * kMaxSeverity) + " rows, got " +
                      std::to_string(filled));
  }
  return t;
}

SeverityTable SeverityTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open severity table '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void SeverityTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write severity table '" + path + "'");
  out << to_text();
}

const std::vector<double>& severity_params(CorruptionKind kind, int severity) {
  return SeverityTable::defaults().row(kind, severity);
}

Image apply_corruption(const Image& image, const CorruptionSpec& spec) {
  return apply_corruption(image, spec, SeverityTable::defaults());
}

Image apply_corruption(const Image& image, const CorruptionSpec& spec, const SeverityTable& table) {
  spec.validate();
  validate_image(image, "apply_corruption");
  if (image.dim(1) != image.dim(2)) throw ShapeError("apply_corruption: expected square image, got " + shape_str(image.shape()));
  Rng rng{spec.seed, static_cast<std::uint64_t>(spec.kind), static_cast<std::uint64_t>(spec.severity)};
  return apply_kind(image, spec.kind, table.row(spec.kind, spec.severity), rng);
}

std::vector<ProbeRow> probe_monotonicity(const SeverityTable& table, std::size_t count, std::size_t size) {
  std::vector<Image> probes;
  for (std::size_t i = 0; i < count; ++i) probes.push_back(render_scene(0x9a0be000ULL + i, size));
  std::vector<ProbeRow> rows;
  for (auto k : kDeclared) {
    for (int s = 1; s <= kMaxSeverity; ++s) {
      double total = 0;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        total += mse(apply_corruption(probes[i], {k, s, i}, table), probes[i]);
      }
      rows.push_back({k, s, total / static_cast<double>(probes.size())});
    }
  }
  return rows;
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::ostringstream os;
  os << "kind,severity,mean_mse\n";
  for (const auto& r : rows) os << corruption_name(r.kind) << ',' << r.severity << ',' << format_double(r.mean_mse) << '\n';
  return os.str();
}

}  // namespace vict
