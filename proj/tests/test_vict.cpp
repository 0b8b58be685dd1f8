#include <doctest.h>

#include <memory>

#include "small_model.hpp"
#include "vict/digest.hpp"
#include "vict/ops.hpp"
#include "vict/vict.hpp"

using namespace vict;

namespace {

struct Fixture {
  ModelConfig model = testing::small_model();
  Params<float> theta0 = init_params<float>(model, 7);
  TaskSample test = generate(TaskKind::Denoise, 100, 16);
  PromptPair prompt = select_prompt(TaskKind::Denoise, Setting::ZeroShot, std::nullopt, 200, 16).first();

  VictConfig config(std::size_t steps, Selector selector = Selector::Encoder) const {
    VictConfig c;
    c.steps = steps;
    c.lr = 1e-3;
    c.selector = selector;
    return c;
  }
};

// Copies the input column into the masked output cell: an exact solver for
// tasks whose output equals their input.
Var<double> identity_copier(const Var<double>& pixels, const MaskSpec& mask) {
  const std::size_t side = pixels.shape()[1], half = side / 2;
  const std::size_t row0 = mask.masked == CellPos::TopRight ? 0 : half;
  auto index = std::make_shared<ops::Index>(3 * side * side);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t k = 0; k < side; ++k) {
        const bool masked = r >= row0 && r < row0 + half && k >= half;
        (*index)[(c * side + r) * side + k] = static_cast<std::uint32_t>((c * side + r) * side + (masked ? k - half : k));
      }
    }
  }
  return ops::gather(pixels, std::shared_ptr<const ops::Index>(index), pixels.shape());
}

}  // namespace

TEST_CASE("prompt selection") {
  const auto clean = generate(TaskKind::Derain, 55);
  const auto z = select_prompt(TaskKind::Derain, Setting::ZeroShot, std::nullopt, 55);
  CHECK(z.pairs.size() == 1);
  CHECK(z.first().x == clean.input);
  CHECK(z.first().y == clean.target);
  CHECK_FALSE(z.corruption.has_value());
  const CorruptionSpec spec{CorruptionKind::Fog, 2, 9};
  const auto o = select_prompt(TaskKind::Derain, Setting::OneShot, spec, 55);
  CHECK(mse(o.first().x, clean.input) > 0);
  CHECK(o.first().y == clean.target);
  REQUIRE(o.corruption.has_value());
  CHECK(o.corruption->kind == spec.kind);
  CHECK(o.corruption->severity == spec.severity);
  CHECK(o.corruption->seed != spec.seed);
  CHECK_THROWS_AS(select_prompt(TaskKind::Derain, Setting::OneShot, std::nullopt, 55), ValueError);
  CHECK_FALSE(select_prompt(TaskKind::Derain, Setting::ZeroShot, std::nullopt, 56).first().x == clean.input);
}

TEST_CASE("setting names") {
  CHECK(parse_setting("zero") == Setting::ZeroShot);
  CHECK(parse_setting("one_shot") == Setting::OneShot);
  CHECK(parse_setting(setting_name(Setting::OneShot)) == Setting::OneShot);
  CHECK_THROWS_AS(parse_setting("two"), ValueError);
}

TEST_CASE("cycle loss is zero for an exact identity solver") {
  const Image x = render_scene(1, 8), xt = render_scene(2, 8);
  Tape<double> tape;
  const auto out = cycle_objective<double>(tape, identity_copier, 8, x, x, xt, 1.0);
  CHECK(out.loss.value()[0] == 0.0);
  CHECK(out.y_t_hat.value() == xt.cast<double>());
}

TEST_CASE("cycle loss is nonnegative and gradient reaches both passes") {
  Fixture f;
  CHECK(cycle_loss(f.model, f.theta0, f.prompt, f.test.input) >= 0);
  const auto enc = param_group(f.theta0, Selector::Encoder);
  for (bool detach : {false, true}) {
    Tape<float> tape;
    const auto bound = bind_params(tape, f.theta0, enc);
    const auto out = cycle_loss_on_tape<float>(f.model, bound, f.prompt.x, f.prompt.y, f.test.input, 1.0f, detach);
    CHECK(out.loss.value()[0] >= 0);
    tape.backward(out.loss);
    const auto g = tape.grad(bound.vars[enc.front()]);
    double norm = 0;
    for (float v : g.data()) norm += std::abs(v);
    CHECK(norm > 0);
  }
}

TEST_CASE("detaching the first pass changes the gradient") {
  Fixture f;
  const auto enc = param_group(f.theta0, Selector::Encoder);
  auto grad_of = [&](bool detach) {
    Tape<float> tape;
    const auto bound = bind_params(tape, f.theta0, enc);
    const auto out = cycle_loss_on_tape<float>(f.model, bound, f.prompt.x, f.prompt.y, f.test.input, 1.0f, detach);
    tape.backward(out.loss);
    return tape.grad(bound.vars[enc.front()]);
  };
  CHECK_FALSE(grad_of(false) == grad_of(true));
}

TEST_CASE("zero steps reproduce frozen inference bit for bit") {
  Fixture f;
  const auto r = adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, f.config(0));
  CHECK(r.y_t_hat == frozen_predict(f.model, f.theta0, f.prompt, f.test.input));
  CHECK(r.loss_trace.empty());
  CHECK(r.adapted_params_digest == params_digest(f.theta0));
}

TEST_CASE("adaptation resets to the initial weights per sample") {
  Fixture f;
  const std::string before = params_digest(f.theta0);
  const auto other = generate(TaskKind::Denoise, 300, 16);
  const auto b_alone = adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, f.config(3));
  (void)adapt_and_predict(f.model, f.theta0, f.prompt, other.input, f.config(3));
  const auto b_after = adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, f.config(3));
  CHECK(b_after.y_t_hat == b_alone.y_t_hat);
  CHECK(b_after.loss_trace == b_alone.loss_trace);
  CHECK(b_after.adapted_params_digest == b_alone.adapted_params_digest);
  CHECK(params_digest(f.theta0) == before);
  CHECK(b_alone.loss_trace.size() == 3);
  CHECK(b_alone.adapted_params_digest != before);
  for (float v : b_alone.y_t_hat.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("selector limits which tensors move") {
  Fixture f;
  for (auto selector : {Selector::Encoder, Selector::All}) {
    Params<float> adapted;
    (void)adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, f.config(2, selector), &adapted);
    bool decoder_changed = false, encoder_changed = false;
    for (std::size_t i = 0; i < adapted.size(); ++i) {
      const bool changed = !(adapted[i].value == f.theta0[i].value);
      (f.theta0[i].group == ParamGroup::Decoder ? decoder_changed : encoder_changed) |= changed;
    }
    CHECK(encoder_changed);
    CHECK(decoder_changed == (selector == Selector::All));
  }
}

TEST_CASE("hooks see the canvas at the first and last step") {
  Fixture f;
  std::vector<std::size_t> steps;
  AdaptationHooks hooks;
  hooks.on_canvas = [&](std::size_t step, const Image& canvas, const Image& recon) {
    steps.push_back(step);
    CHECK(canvas.shape() == Shape{3, 32, 32});
    CHECK(recon.shape() == Shape{3, 32, 32});
  };
  (void)adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, f.config(2), hooks);
  CHECK(steps == std::vector<std::size_t>{0, 2});
}

TEST_CASE("adaptation validates its inputs") {
  Fixture f;
  VictConfig bad = f.config(1);
  bad.lr = -1;
  CHECK_THROWS_AS(adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, bad), ValueError);
  CHECK_THROWS_AS(adapt_and_predict(f.model, f.theta0, f.prompt, generate(TaskKind::Denoise, 1, 8).input, f.config(1)),
                  ShapeError);
  VictConfig huge = f.config(5);
  huge.lr = 1e30;
  CHECK_THROWS_AS(adapt_and_predict(f.model, f.theta0, f.prompt, f.test.input, huge), NumericError);
}
