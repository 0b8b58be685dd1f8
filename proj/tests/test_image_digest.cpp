#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "small_model.hpp"
#include "vict/digest.hpp"
#include "vict/image.hpp"
#include "vict/tasks.hpp"

using namespace vict;

TEST_CASE("ppm round trip at 8-bit precision") {
  const Image img = render_scene(4, 16);
  const auto path = std::filesystem::temp_directory_path() / "vict_test_scene.ppm";
  write_ppm(img, path);
  const Image back = read_ppm(path);
  std::filesystem::remove(path);
  REQUIRE(back.shape() == img.shape());
  for (std::size_t i = 0; i < img.numel(); ++i) CHECK(std::abs(back[i] - img[i]) <= 0.5f / 255.0f + 1e-6f);
}

TEST_CASE("sha256 known answer") {
  const std::string abc = "abc";
  CHECK(sha256_hex(std::as_bytes(std::span(abc.data(), abc.size()))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("parameter digest tracks every byte") {
  const auto m = testing::small_model();
  auto p = init_params<float>(m, 1);
  const std::string d = params_digest(p);
  CHECK(d.size() == 64);
  CHECK(params_digest(init_params<float>(m, 1)) == d);
  p[0].value[0] = std::nextafter(p[0].value[0], 1.0f);
  CHECK(params_digest(p) != d);
}

TEST_CASE("image helpers") {
  CHECK(mse(constant_image(4, 0.0f, 0.0f, 0.0f), constant_image(4, 0.5f, 0.5f, 0.5f)) == doctest::Approx(0.25));
  const auto lum = luminance(constant_image(2, 1.0f, 1.0f, 1.0f));
  for (double v : lum) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS(validate_image(Image({3, 4, 4}, 2.0f), "test"));
}
