#include "vict/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vict/rng.hpp"

namespace vict {

std::string_view task_name(TaskKind task) {
  switch (task) {
    case TaskKind::Denoise: return "denoise";
    case TaskKind::Derain: return "derain";
    case TaskKind::Lowlight: return "lowlight";
    case TaskKind::Segmentation: return "segmentation";
    case TaskKind::Depth: return "depth";
  }
  return "invalid";
}

TaskKind parse_task(std::string_view name) {
  for (auto t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw ValueError("unknown task '" + std::string(name) + "'");
}

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::PSNR: return "PSNR";
    case MetricKind::MIoU: return "mIoU";
    case MetricKind::ARel: return "A.Rel";
  }
  return "invalid";
}

MetricKind task_metric(TaskKind task) {
  switch (task) {
    case TaskKind::Segmentation: return MetricKind::MIoU;
    case TaskKind::Depth: return MetricKind::ARel;
    default: return MetricKind::PSNR;
  }
}

bool higher_is_better(MetricKind kind) { return kind != MetricKind::ARel; }

const Palette& Palette::standard() {
  static const Palette p{{{0.1f, 0.1f, 0.1f}, {0.9f, 0.2f, 0.2f}, {0.2f, 0.9f, 0.2f}, {0.2f, 0.2f, 0.9f}}};
  return p;
}

std::size_t Palette::decode(float r, float g, float b) const {
  if (colors.empty()) throw ValueError("palette is empty");
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t k = 0; k < colors.size(); ++k) {
    const float dr = r - colors[k][0], dg = g - colors[k][1], db = b - colors[k][2];
    const float d = dr * dr + dg * dg + db * db;
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

namespace {

enum class ShapeType { Disk = 1, Rect = 2, Triangle = 3 };

struct SceneShape {
  ShapeType type;
  std::array<float, 3> color;
  // Disk: cx, cy, radius. Rect: x0, y0, x1, y1. Triangle: three vertices.
  std::array<double, 6> geom;
  float inv_depth;

  bool contains(double x, double y) const {
    switch (type) {
      case ShapeType::Disk: {
        const double dx = x - geom[0], dy = y - geom[1];
        return dx * dx + dy * dy <= geom[2] * geom[2];
      }
      case ShapeType::Rect:
        return x >= geom[0] && x <= geom[2] && y >= geom[1] && y <= geom[3];
      case ShapeType::Triangle: {
        auto edge = [&](int a, int b) {
          return (geom[2 * b] - geom[2 * a]) * (y - geom[2 * a + 1]) -
                 (geom[2 * b + 1] - geom[2 * a + 1]) * (x - geom[2 * a]);
        };
        const double e0 = edge(0, 1), e1 = edge(1, 2), e2 = edge(2, 0);
        return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
      }
    }
    return false;
  }

  double bottom() const {
    switch (type) {
      case ShapeType::Disk: return geom[1] + geom[2];
      case ShapeType::Rect: return geom[3];
      case ShapeType::Triangle: return std::max({geom[1], geom[3], geom[5]});
    }
    return 0;
  }
};

struct Scene {
  std::array<float, 3> bg0, bg1;
  double gx, gy;
  std::vector<SceneShape> shapes;  // far to near
};

Scene make_scene(std::uint64_t seed, std::size_t size) {
  Rng rng{seed, 0x5ce7eULL};
  const double s = static_cast<double>(size);
  Scene sc;
  for (auto& v : sc.bg0) v = static_cast<float>(rng.uniform(0.1, 0.6));
  for (auto& v : sc.bg1) v = static_cast<float>(rng.uniform(0.3, 0.9));
  const double angle = rng.uniform(0.0, 2.0 * 3.141592653589793);
  sc.gx = std::cos(angle);
  sc.gy = std::sin(angle);

  const auto count = rng.uniform_int(2, 5);
  for (std::int64_t i = 0; i < count; ++i) {
    SceneShape sh{};
    sh.type = static_cast<ShapeType>(rng.uniform_int(1, 3));
    for (auto& v : sh.color) v = static_cast<float>(rng.uniform(0.0, 1.0));
    const double cx = rng.uniform(0.15, 0.85) * s, cy = rng.uniform(0.15, 0.85) * s;
    const double r = rng.uniform(0.12, 0.28) * s;
    switch (sh.type) {
      case ShapeType::Disk:
        sh.geom = {cx, cy, r, 0, 0, 0};
        break;
      case ShapeType::Rect: {
        const double hw = r * rng.uniform(0.6, 1.2), hh = r * rng.uniform(0.6, 1.2);
        sh.geom = {cx - hw, cy - hh, cx + hw, cy + hh, 0, 0};
        break;
      }
      case ShapeType::Triangle: {
        const double a0 = rng.uniform(0.0, 2.0 * 3.141592653589793);
        for (int k = 0; k < 3; ++k) {
          const double a = a0 + k * 2.0 * 3.141592653589793 / 3.0 + rng.uniform(-0.3, 0.3);
          const double rr = r * rng.uniform(1.0, 1.4);
          sh.geom[2 * k] = cx + rr * std::cos(a);
          sh.geom[2 * k + 1] = cy + rr * std::sin(a);
        }
        break;
      }
    }
    // Ground-plane cue: shapes reaching lower in the frame are closer.
    const double b = std::clamp(sh.bottom() / s, 0.0, 1.2);
    sh.inv_depth = static_cast<float>(std::clamp(0.2 + 0.7 * b, 0.2, 1.0));
    sc.shapes.push_back(sh);
  }
  std::stable_sort(sc.shapes.begin(), sc.shapes.end(),
                   [](const SceneShape& a, const SceneShape& b) { return a.inv_depth < b.inv_depth; });
  return sc;
}

std::array<float, 3> background_at(const Scene& sc, double x, double y, double s) {
  const double u = std::clamp(0.5 + ((x / s - 0.5) * sc.gx + (y / s - 0.5) * sc.gy) * 0.7, 0.0, 1.0);
  std::array<float, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = static_cast<float>(sc.bg0[k] * (1 - u) + sc.bg1[k] * u);
  return c;
}

constexpr int kSuper = 4;

Image render(const Scene& sc, std::size_t size) {
  const double s = static_cast<double>(size);
  Image img(Shape{3, size, size});
  const std::size_t plane = size * size;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      double acc[3] = {0, 0, 0};
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double x = c + (sx + 0.5) / kSuper, y = r + (sy + 0.5) / kSuper;
          std::array<float, 3> col = background_at(sc, x, y, s);
          for (const auto& sh : sc.shapes) {
            if (sh.contains(x, y)) col = sh.color;
          }
          for (int k = 0; k < 3; ++k) acc[k] += col[k];
        }
      }
      for (int k = 0; k < 3; ++k) img[k * plane + r * size + c] = static_cast<float>(acc[k] / (kSuper * kSuper));
    }
  }
  return img;
}

const SceneShape* top_shape(const Scene& sc, double x, double y) {
  const SceneShape* hit = nullptr;
  for (const auto& sh : sc.shapes) {
    if (sh.contains(x, y)) hit = &sh;
  }
  return hit;
}

}  // namespace

Image render_scene(std::uint64_t seed, std::size_t size) { return render(make_scene(seed, size), size); }

TaskSample generate(TaskKind task, std::uint64_t seed, std::size_t size) {
  if (size == 0) throw ValueError("generate: size must be positive");
  const Scene sc = make_scene(seed, size);
  const Image scene = render(sc, size);
  const std::size_t plane = size * size;
  TaskSample out{scene, scene, task, seed};

  switch (task) {
    case TaskKind::Denoise: {
      Rng rng{seed, 0xde0015eULL};
      for (auto& v : out.input.data()) v = std::clamp(static_cast<float>(v + kDenoiseSigma * rng.normal()), 0.0f, 1.0f);
      break;
    }
    case TaskKind::Derain: {
      Rng rng{seed, 0x4a14ULL};
      std::vector<float> rain(plane, 0.0f);
      const auto streaks = rng.uniform_int(static_cast<std::int64_t>(size / 2), static_cast<std::int64_t>(size));
      for (std::int64_t k = 0; k < streaks; ++k) {
        double x = rng.uniform(-0.25, 1.0) * size, y = rng.uniform(-0.25, 1.0) * size;
        const auto len = rng.uniform_int(4, 9);
        const float strength = static_cast<float>(rng.uniform(0.4, 0.8));
        for (std::int64_t t = 0; t < len; ++t, x += 0.5, y += 1.0) {
          const auto xi = static_cast<std::int64_t>(std::floor(x)), yi = static_cast<std::int64_t>(std::floor(y));
          if (xi < 0 || yi < 0 || xi >= static_cast<std::int64_t>(size) || yi >= static_cast<std::int64_t>(size)) continue;
          auto& cell = rain[static_cast<std::size_t>(yi) * size + static_cast<std::size_t>(xi)];
          cell = std::max(cell, strength);
        }
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t i = 0; i < plane; ++i) {
          float& v = out.input[ch * plane + i];
          v = std::clamp(v + rain[i] * (1.0f - v), 0.0f, 1.0f);
        }
      }
      break;
    }
    case TaskKind::Lowlight:
      for (auto& v : out.input.data()) {
        v = static_cast<float>(std::pow(static_cast<double>(v), kLowlightGamma) * kLowlightScale);
      }
      break;
    case TaskKind::Segmentation:
    case TaskKind::Depth: {
      const auto& pal = Palette::standard().colors;
      for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
          const SceneShape* sh = top_shape(sc, c + 0.5, r + 0.5);
          const std::size_t px = r * size + c;
          if (task == TaskKind::Segmentation) {
            const auto& col = pal[sh ? static_cast<std::size_t>(sh->type) : 0];
            for (std::size_t ch = 0; ch < 3; ++ch) out.target[ch * plane + px] = col[ch];
          } else {
            const float d = sh ? sh->inv_depth : kDepthBackground;
            for (std::size_t ch = 0; ch < 3; ++ch) out.target[ch * plane + px] = d;
          }
        }
      }
      break;
    }
  }
  return out;
}

Metric psnr(const Image& pred, const Image& target) {
  const double m = mse(pred, target);
  if (m < 1e-10) return {MetricKind::PSNR, 99.0};
  return {MetricKind::PSNR, std::min(99.0, 10.0 * std::log10(1.0 / m))};
}

Metric miou(const Image& pred, const Image& target, const Palette& palette) {
  if (palette.colors.empty()) throw ValueError("miou: empty palette");
  if (pred.shape() != target.shape() || pred.rank() != 3 || pred.dim(0) != 3) {
    throw ShapeError("miou: shape mismatch " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  }
  const std::size_t plane = pred.dim(1) * pred.dim(2), k = palette.colors.size();
  std::vector<std::size_t> inter(k, 0), uni(k, 0);
  std::vector<bool> present(k, false);
  for (std::size_t i = 0; i < plane; ++i) {
    const auto p = palette.decode(pred[i], pred[plane + i], pred[2 * plane + i]);
    const auto t = palette.decode(target[i], target[plane + i], target[2 * plane + i]);
    present[t] = true;
    if (p == t) {
      ++inter[t];
      ++uni[t];
    } else {
      ++uni[t];
      ++uni[p];
    }
  }
  double total = 0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (!present[c]) continue;
    total += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    ++classes;
  }
  return {MetricKind::MIoU, total / static_cast<double>(classes)};
}

Metric a_rel(const Image& pred, const Image& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("a_rel: shape mismatch " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  }
  const auto p = luminance(pred), t = luminance(target);
  double total = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= 0.01) continue;
    total += std::abs(p[i] - t[i]) / t[i];
    ++n;
  }
  if (n == 0) throw ValueError("a_rel: no target pixels above 0.01");
  return {MetricKind::ARel, total / static_cast<double>(n)};
}

Metric evaluate(TaskKind task, const Image& pred, const Image& target) {
  switch (task_metric(task)) {
    case MetricKind::MIoU: return miou(pred, target);
    case MetricKind::ARel: return a_rel(pred, target);
    case MetricKind::PSNR: return psnr(pred, target);
  }
  throw ValueError("evaluate: unknown metric");
}

}  // namespace vict
