#include <doctest.h>

#include <cmath>

#include "vict/tasks.hpp"

using namespace vict;

namespace {

Image half_plane(std::size_t size, std::array<float, 3> left, std::array<float, 3> right) {
  Image img({3, size, size});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t k = 0; k < size; ++k) img.at(c, r, k) = k < size / 2 ? left[c] : right[c];
    }
  }
  return img;
}

}  // namespace

TEST_CASE("generators are deterministic and in range") {
  for (auto task : kAllTasks) {
    const auto a = generate(task, 42);
    const auto b = generate(task, 42);
    CHECK(a.input == b.input);
    CHECK(a.target == b.target);
    CHECK(a.input.shape() == Shape{3, kDefaultCellSize, kDefaultCellSize});
    for (float v : a.input.data()) CHECK((v >= 0.0f && v <= 1.0f));
    for (float v : a.target.data()) CHECK((v >= 0.0f && v <= 1.0f));
    CHECK_FALSE(generate(task, 43).input == a.input);
  }
}

TEST_CASE("segmentation targets are palette exact") {
  const auto& pal = Palette::standard();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate(TaskKind::Segmentation, seed);
    const std::size_t n = s.target.dim(1) * s.target.dim(2);
    const auto d = s.target.data();
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = pal.decode(d[i], d[n + i], d[2 * n + i]);
      CHECK(pal.colors[k] == std::array<float, 3>{d[i], d[n + i], d[2 * n + i]});
    }
  }
}

TEST_CASE("palette colors are well separated") {
  const auto& c = Palette::standard().colors;
  CHECK(c.size() == 4);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      double d2 = 0;
      for (int k = 0; k < 3; ++k) d2 += (c[i][k] - c[j][k]) * (c[i][k] - c[j][k]);
      CHECK(std::sqrt(d2) >= 0.5);
    }
  }
}

TEST_CASE("denoise inputs are measurably degraded") {
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = generate(TaskKind::Denoise, seed);
    sum += psnr(s.input, s.target).value;
  }
  CHECK(sum / 100 < 30.0);
}

TEST_CASE("psnr reference values") {
  const Image t = constant_image(4, 0.5f, 0.5f, 0.5f);
  CHECK(psnr(t, t).value == 99.0);
  CHECK(psnr(constant_image(4, 0.6f, 0.6f, 0.6f), t).value == doctest::Approx(20.0).epsilon(1e-6));
  // Oracle: 10 log10(1 / 0.25) evaluated by hand.
  CHECK(psnr(constant_image(4, 1.0f, 1.0f, 1.0f), t).value == doctest::Approx(6.0206).epsilon(1e-5));
  CHECK_THROWS_AS(psnr(constant_image(4, 0, 0, 0), constant_image(8, 0, 0, 0)), ShapeError);
}

TEST_CASE("miou reference values") {
  const auto& c = Palette::standard().colors;
  const Image two = half_plane(8, c[1], c[2]);
  CHECK(miou(two, two).value == 1.0);
  CHECK(miou(half_plane(8, c[3], c[3]), half_plane(8, c[1], c[1])).value == 0.0);
  // Oracle by counting: IoU of class A is 32/64, class B is 0 over present classes.
  CHECK(miou(half_plane(8, c[1], c[1]), two).value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("absolute relative error reference values") {
  const Image t = constant_image(4, 0.5f, 0.5f, 0.5f);
  CHECK(a_rel(t, t).value == 0.0);
  CHECK(a_rel(constant_image(4, 0.6f, 0.6f, 0.6f), t).value == doctest::Approx(0.2).epsilon(1e-6));
  // Oracle: mean of 0 (left half) and |0.3 - 0.2| / 0.2 = 0.5 (right half).
  const Image target = half_plane(4, {0.5f, 0.5f, 0.5f}, {0.2f, 0.2f, 0.2f});
  const Image pred = half_plane(4, {0.5f, 0.5f, 0.5f}, {0.3f, 0.3f, 0.3f});
  CHECK(a_rel(pred, target).value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK_THROWS(a_rel(t, constant_image(4, 0, 0, 0)));
}

TEST_CASE("metrics never reward moving away from the target") {
  for (auto task : kAllTasks) {
    const auto s = generate(task, 7);
    Image worse = s.target;
    for (std::size_t i = 0; i < worse.numel(); i += 3) worse[i] = worse[i] > 0.5f ? 0.0f : 1.0f;
    const double best = evaluate(task, s.target, s.target).value;
    const double bad = evaluate(task, worse, s.target).value;
    if (higher_is_better(task_metric(task))) {
      CHECK(bad <= best);
    } else {
      CHECK(bad >= best);
    }
  }
}

TEST_CASE("task metadata") {
  CHECK(task_metric(TaskKind::Denoise) == MetricKind::PSNR);
  CHECK(task_metric(TaskKind::Segmentation) == MetricKind::MIoU);
  CHECK(task_metric(TaskKind::Depth) == MetricKind::ARel);
  CHECK_FALSE(higher_is_better(MetricKind::ARel));
  for (auto t : kAllTasks) CHECK(parse_task(task_name(t)) == t);
  CHECK_THROWS_AS(parse_task("colorize"), ValueError);
}
