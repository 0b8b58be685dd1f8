#include <doctest.h>

#include <algorithm>

#include "vict/canvas.hpp"

using namespace vict;

TEST_CASE("inference canvas places cells in reading order") {
  const Image a = constant_image(8, 0.1f, 0.1f, 0.1f);
  const Image b = constant_image(8, 0.2f, 0.2f, 0.2f);
  const Image c = constant_image(8, 0.3f, 0.3f, 0.3f);
  const auto [canvas, mask] = assemble_inference(a, b, c);
  CHECK(canvas.empty_cell() == CellPos::BottomRight);
  CHECK(mask.masked == CellPos::BottomRight);
  const Image px = canvas.pixels();
  CHECK(px.shape() == Shape{3, 16, 16});
  CHECK(extract_cell(px, CellPos::TopLeft) == a);
  CHECK(extract_cell(px, CellPos::TopRight) == b);
  CHECK(extract_cell(px, CellPos::BottomLeft) == c);
  CHECK(extract_cell(px, CellPos::BottomRight) == constant_image(8, kEmptyFill, kEmptyFill, kEmptyFill));
}

TEST_CASE("patch mask counts") {
  const auto m = MaskSpec{CellPos::BottomRight}.patch_mask(32, 8);
  CHECK(m.size() == 64);
  CHECK(std::count(m.begin(), m.end(), 1) == 16);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(m[r * 8 + c] == ((r >= 4 && c >= 4) ? 1 : 0));
  }
  CHECK_THROWS(MaskSpec{}.patch_mask(30, 8));
}

TEST_CASE("flipped canvas shares the input column and masks a disjoint cell") {
  const Image x = constant_image(8, 0.1f, 0.2f, 0.3f);
  const Image y = constant_image(8, 0.9f, 0.8f, 0.7f);
  const Image xt = constant_image(8, 0.4f, 0.5f, 0.6f);
  Image yt_hat = constant_image(8, 1.4f, -0.2f, 0.5f);
  const auto [inf, inf_mask] = assemble_inference(x, y, xt);
  const auto [flip, flip_mask] = assemble_flipped(x, xt, yt_hat);
  CHECK(flip.empty_cell() == CellPos::TopRight);
  const Image a = inf.pixels(), b = flip.pixels();
  CHECK(extract_cell(a, CellPos::TopLeft) == extract_cell(b, CellPos::TopLeft));
  CHECK(extract_cell(a, CellPos::BottomLeft) == extract_cell(b, CellPos::BottomLeft));
  CHECK(extract_cell(b, CellPos::BottomRight) == constant_image(8, 1.0f, 0.0f, 0.5f));
  const auto m1 = inf_mask.patch_mask(8, 4), m2 = flip_mask.patch_mask(8, 4);
  for (std::size_t i = 0; i < m1.size(); ++i) CHECK_FALSE((m1[i] && m2[i]));
}

TEST_CASE("canvas rejects malformed cells") {
  const Image a = constant_image(8, 0.1f, 0.1f, 0.1f);
  CHECK_THROWS(Canvas({a, a, a, a}, 8));
  CHECK_THROWS(Canvas({a, std::nullopt, a, std::nullopt}, 8));
  CHECK_THROWS(Canvas({a, a, constant_image(4, 0, 0, 0), std::nullopt}, 8));
  CHECK_THROWS(Canvas({a, a, a, std::nullopt}, 7));
}

TEST_CASE("differentiable assembly matches the pixel array") {
  const Image x = constant_image(8, 0.1f, 0.2f, 0.3f);
  const Image y = constant_image(8, 0.9f, 0.8f, 0.7f);
  const Image xt = constant_image(8, 0.4f, 0.5f, 0.6f);
  Tape<float> tape;
  const auto v = assemble_on_tape<float>(tape, {tape.constant(x), tape.constant(y), tape.constant(xt), std::nullopt}, 8);
  CHECK(v.value() == assemble_inference(x, y, xt).first.pixels());
  CHECK(extract_cell(v, CellPos::TopRight).value() == y);
}
