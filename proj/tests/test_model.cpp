#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "small_model.hpp"
#include "vict/canvas.hpp"
#include "vict/model.hpp"
#include "vict/tasks.hpp"

using namespace vict;

namespace {

// Parameter count derived from the architecture description, independent of
// the init code's tensor table.
std::size_t expected_param_count(const ModelConfig& m) {
  const std::size_t d = m.embed_dim, h = m.mlp_ratio * d, g = m.grid();
  const std::size_t block = 2 * (2 * d) + (d * 3 * d + 3 * d) + m.num_heads * (2 * g - 1) * (2 * g - 1) +
                            (d * d + d) + (d * h + h) + (h * d + d);
  const std::size_t embed = m.patch_dim() * d + d + m.num_patches() * d + d;
  const std::size_t head = 2 * d + d * m.patch_dim() + m.patch_dim();
  return embed + (m.encoder_depth + m.decoder_depth) * block + head;
}

Image random_canvas(std::size_t cell, std::uint64_t seed) {
  Image img({3, 2 * cell, 2 * cell});
  Rng rng{seed, 0xca};
  for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

Image run(const ModelConfig& m, const Params<float>& p, const Image& pixels, CellPos masked) {
  Tape<float> tape;
  const auto bound = bind_params(tape, p, {});
  return forward(m, bound, tape.constant(pixels), MaskSpec{masked}).value();
}

}  // namespace

TEST_CASE("default config sizes") {
  const ModelConfig m;
  CHECK(m.grid() == 8);
  CHECK(m.num_patches() == 64);
  const auto p = init_params<float>(m, 0);
  CHECK(p.at("pos_embed").dim(0) == 64);
  CHECK(p.scalar_count() == expected_param_count(m));
  CHECK(init_params<float>(testing::small_model(), 0).scalar_count() == expected_param_count(testing::small_model()));
}

TEST_CASE("parameter groups") {
  const auto p = init_params<float>(ModelConfig{}, 0);
  for (const char* name : {"patch_embed.weight", "pos_embed", "mask_token"}) {
    CHECK(p[*p.find(name)].group == ParamGroup::Encoder);
  }
  CHECK(p[*p.find("head.weight")].group == ParamGroup::Decoder);
  const auto enc = param_group(p, Selector::Encoder);
  const auto all = param_group(p, Selector::All);
  CHECK(all.size() == p.size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < p.size(); ++i) names.insert(p[i].name);
  CHECK(names.size() == p.size());
  for (std::size_t i : enc) CHECK(p[i].group == ParamGroup::Encoder);
  std::size_t decoder = 0;
  for (std::size_t i = 0; i < p.size(); ++i) decoder += p[i].group == ParamGroup::Decoder;
  CHECK(enc.size() + decoder == p.size());
}

TEST_CASE("init is deterministic in seed") {
  const auto m = testing::small_model();
  CHECK(init_params<float>(m, 3) == init_params<float>(m, 3));
  CHECK_FALSE(init_params<float>(m, 3) == init_params<float>(m, 4));
}

TEST_CASE("forward output shape and range") {
  const auto m = testing::small_model();
  const auto p = init_params<float>(m, 1);
  const Image out = run(m, p, random_canvas(16, 1), CellPos::BottomRight);
  CHECK(out.shape() == Shape{3, 32, 32});
  for (float v : out.data()) CHECK((v > 0.0f && v < 1.0f));
  CHECK(out == run(m, p, random_canvas(16, 1), CellPos::BottomRight));
}

TEST_CASE("masked cell pixels never reach the network") {
  const auto m = testing::small_model();
  const auto p = init_params<float>(m, 2);
  Image a = random_canvas(16, 2);
  Image b = a;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 16; r < 32; ++r) {
      for (std::size_t k = 16; k < 32; ++k) b.at(c, r, k) = 1.0f - b.at(c, r, k);
    }
  }
  CHECK(run(m, p, a, CellPos::BottomRight) == run(m, p, b, CellPos::BottomRight));
  CHECK_FALSE(run(m, p, a, CellPos::TopLeft) == run(m, p, b, CellPos::TopLeft));
}

TEST_CASE("positions break cell symmetry") {
  const auto m = testing::small_model();
  const auto p = init_params<float>(m, 5);
  const Image a = random_canvas(16, 9);
  Image b = a;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < 16; ++r) {
      for (std::size_t k = 16; k < 32; ++k) std::swap(b.at(c, r, k), b.at(c, r + 16, k));
    }
  }
  CHECK_FALSE(run(m, p, a, CellPos::TopLeft) == run(m, p, b, CellPos::TopLeft));
}

TEST_CASE("inpainting loss gradient matches finite differences") {
  const auto m = ModelConfig::tiny();
  Params<double> p = init_params<float>(m, 4).cast<double>();
  Rng rng{4, 1};
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (auto& v : p[i].value.data()) v += 0.25 * rng.normal();
  }
  const auto q = generate(TaskKind::Derain, 1, 8), pr = generate(TaskKind::Derain, 2, 8);
  const Image pixels = assemble_inference(pr.input, pr.target, q.input).first.pixels();
  auto loss_of = [&](Tape<double>& tape, const BoundParams<double>& b) {
    const auto out = forward(m, b, tape.constant(pixels.cast<double>()), MaskSpec{});
    return ops::smooth_l1(extract_cell(out, CellPos::BottomRight), tape.constant(q.target.cast<double>()), 1.0);
  };
  const auto enc = param_group(p, Selector::Encoder);
  Tape<double> tape;
  const auto bound = bind_params(tape, p, enc);
  tape.backward(loss_of(tape, bound));
  for (std::size_t i : enc) {
    INFO(p[i].name);
    const auto analytic = tape.grad(bound.vars[i]);
    const auto numeric = testing::numeric_grad(
        [&](const Tensor<double>& v) {
          Params<double> q2 = p;
          q2[i].value = v;
          Tape<double> t;
          return loss_of(t, bind_params(t, q2, {})).value()[0];
        },
        p[i].value, 1e-4);
    CHECK(testing::max_rel_diff(analytic, numeric, 1e-6) < 1e-4);
  }
}

TEST_CASE("model config text round trip and validation") {
  const ModelConfig m = testing::small_model();
  CHECK(ModelConfig::from_kv(m.to_kv()) == m);
  ModelConfig bad = m;
  bad.patch_size = 5;
  CHECK_THROWS_AS(bad.validate(), ValueError);
  bad = m;
  bad.num_heads = 3;
  CHECK_THROWS_AS(bad.validate(), ValueError);
  CHECK_THROWS_AS(ModelConfig::from_kv("cell_size=16\n"), FormatError);
  CHECK_THROWS_AS(ModelConfig::from_kv(m.to_kv() + "cell_size=16\n"), FormatError);
  std::string bad_value = m.to_kv();
  bad_value.replace(bad_value.find("=16"), 3, "=16x");
  CHECK_THROWS_AS(ModelConfig::from_kv(bad_value), FormatError);
}

TEST_CASE("reconstruct agrees with forward") {
  const auto m = testing::small_model();
  const auto p = init_params<float>(m, 6);
  const auto s = generate(TaskKind::Depth, 1, 16), t = generate(TaskKind::Depth, 2, 16);
  const auto [canvas, mask] = assemble_inference(s.input, s.target, t.input);
  CHECK(reconstruct(m, p, canvas, mask) == run(m, p, canvas.pixels(), CellPos::BottomRight));
}
