#include "vict/vict.hpp"

#include <cmath>
#include <string>

#include "vict/digest.hpp"
#include "vict/ops.hpp"
#include "vict/optim.hpp"
#include "vict/rng.hpp"

namespace vict {

std::string_view setting_name(Setting s) { return s == Setting::ZeroShot ? "zero_shot" : "one_shot"; }

Setting parse_setting(std::string_view s) {
  if (s == "zero_shot" || s == "zero") return Setting::ZeroShot;
  if (s == "one_shot" || s == "one") return Setting::OneShot;
  throw ValueError("unknown setting '" + std::string(s) + "' (expected zero|one)");
}

const PromptPair& PromptSet::first() const {
  if (pairs.empty()) throw ValueError("prompt set is empty");
  return pairs.front();
}

PromptSet select_prompt(TaskKind task, Setting setting, const std::optional<CorruptionSpec>& corruption,
                        std::uint64_t seed, std::size_t size) {
  if (setting == Setting::OneShot && !corruption) throw ValueError("select_prompt: one-shot requires a corruption spec");
  TaskSample s = generate(task, seed, size);
  PromptSet out;
  if (setting == Setting::ZeroShot) {
    out.pairs.push_back({std::move(s.input), std::move(s.target)});
    return out;
  }
  CorruptionSpec spec = *corruption;
  spec.seed = hash_key({corruption->seed, seed, 0x9207e7ULL});
  out.pairs.push_back({apply_corruption(s.input, spec), std::move(s.target)});
  out.corruption = spec;
  return out;
}

void VictConfig::validate() const {
  if (!std::isfinite(lr) || lr < 0) throw ValueError("vict: lr must be finite and nonnegative");
  if (!std::isfinite(beta) || beta <= 0) throw ValueError("vict: beta must be positive");
  if (selector != Selector::Encoder && selector != Selector::All) throw ValueError("vict: invalid selector");
}

namespace {

void check_cells(const ModelConfig& config, const Image& x, const Image& y, const Image& x_t) {
  for (const Image* img : {&x, &y, &x_t}) {
    validate_image(*img, "vict");
    if (img->dim(1) != config.cell_size || img->dim(2) != config.cell_size) {
      throw ShapeError("vict: cell shape " + shape_str(img->shape()) + " does not match cell size " +
                       std::to_string(config.cell_size));
    }
  }
}

}  // namespace

template <class T>
CycleOutputs<T> cycle_objective(Tape<T>& tape, const CanvasPredictor<T>& predict, std::size_t cell_size,
                                const Image& x, const Image& y, const Image& x_t, T beta, bool detach) {
  const std::size_t c = cell_size;
  const Var<T> vx = tape.constant(x.template cast<T>());
  const Var<T> vy = tape.constant(y.template cast<T>());
  const Var<T> vxt = tape.constant(x_t.template cast<T>());

  const Var<T> first =
      predict(assemble_on_tape<T>(tape, {vx, vy, vxt, std::nullopt}, c), MaskSpec{CellPos::BottomRight});
  const Var<T> y_t_hat = ops::clamp_straight_through(extract_cell(first, CellPos::BottomRight), T(0), T(1));
  const Var<T> reinserted = detach ? tape.constant(y_t_hat.value()) : y_t_hat;

  const Var<T> second =
      predict(assemble_on_tape<T>(tape, {vx, std::nullopt, vxt, reinserted}, c), MaskSpec{CellPos::TopRight});
  const Var<T> y_hat = extract_cell(second, CellPos::TopRight);
  return {ops::smooth_l1(y_hat, vy, beta), y_t_hat, y_hat};
}

template <class T>
CycleOutputs<T> cycle_loss_on_tape(const ModelConfig& config, const BoundParams<T>& params, const Image& x,
                                   const Image& y, const Image& x_t, T beta, bool detach) {
  if (params.vars.empty()) throw ValueError("cycle_loss: no parameters bound");
  check_cells(config, x, y, x_t);
  const CanvasPredictor<T> predict = [&](const Var<T>& canvas, const MaskSpec& mask) {
    return forward(config, params, canvas, mask);
  };
  return cycle_objective<T>(*params.vars.front().tape(), predict, config.cell_size, x, y, x_t, beta, detach);
}

double cycle_loss(const ModelConfig& config, const Params<float>& params, const PromptPair& prompt, const Image& x_t,
                  double beta) {
  Tape<float> tape;
  const auto bound = bind_params(tape, params, {});
  return cycle_loss_on_tape<float>(config, bound, prompt.x, prompt.y, x_t, static_cast<float>(beta)).loss.value()[0];
}

Image frozen_predict(const ModelConfig& config, const Params<float>& params, const PromptPair& prompt,
                     const Image& x_t) {
  const auto [canvas, mask] = assemble_inference(prompt.x, prompt.y, x_t);
  return extract_cell(reconstruct(config, params, canvas, mask), CellPos::BottomRight);
}

AdaptationResult adapt_and_predict(const ModelConfig& model, const Params<float>& theta0, const PromptPair& prompt,
                                   const Image& x_t, const VictConfig& config, const AdaptationHooks& hooks) {
  return adapt_and_predict(model, theta0, prompt, x_t, config, nullptr, hooks);
}

AdaptationResult adapt_and_predict(const ModelConfig& model, const Params<float>& theta0, const PromptPair& prompt,
                                   const Image& x_t, const VictConfig& config, Params<float>* adapted,
                                   const AdaptationHooks& hooks) {
  model.validate();
  config.validate();
  check_cells(model, prompt.x, prompt.y, x_t);

  Params<float> work = theta0;
  const auto selected = param_group(work, config.selector);
  AdamWState<float> state;
  state.hyper.lr = config.lr;

  auto emit = [&](std::size_t step) {
    if (!hooks.on_canvas) return;
    const auto [canvas, mask] = assemble_inference(prompt.x, prompt.y, x_t);
    hooks.on_canvas(step, canvas.pixels(), reconstruct(model, work, canvas, mask));
  };
  emit(0);

  AdaptationResult result;
  result.loss_trace.reserve(config.steps);
  std::vector<Tensor<float>*> targets;
  std::vector<Tensor<float>> grads;
  for (std::size_t step = 0; step < config.steps; ++step) {
    Tape<float> tape;
    const auto bound = bind_params(tape, work, selected);
    CycleOutputs<float> out;
    try {
      out = cycle_loss_on_tape<float>(model, bound, prompt.x, prompt.y, x_t, static_cast<float>(config.beta),
                                      config.detach);
    } catch (const NumericError& e) {
      throw NumericError("vict: step " + std::to_string(step) + ": " + e.what() + " (params " + params_digest(work) +
                         ")");
    }
    const double loss = out.loss.value()[0];
    if (!std::isfinite(loss)) {
      throw NumericError("vict: non-finite loss at step " + std::to_string(step) + " (params " + params_digest(work) +
                         ")");
    }
    result.loss_trace.push_back(loss);
    tape.backward(out.loss);

    targets.clear();
    grads.clear();
    for (std::size_t i : selected) {
      targets.push_back(&work[i].value);
      grads.push_back(tape.grad(bound.vars[i]));
    }
    try {
      adamw_step<float>(targets, grads, state);
    } catch (const NumericError& e) {
      throw NumericError("vict: step " + std::to_string(step) + ": " + e.what());
    }
  }

  if (config.steps > 0) emit(config.steps);
  result.y_t_hat = frozen_predict(model, work, prompt, x_t);
  result.adapted_params_digest = params_digest(work);
  if (adapted) *adapted = std::move(work);
  return result;
}

template CycleOutputs<float> cycle_objective<float>(Tape<float>&, const CanvasPredictor<float>&, std::size_t,
                                                    const Image&, const Image&, const Image&, float, bool);
template CycleOutputs<double> cycle_objective<double>(Tape<double>&, const CanvasPredictor<double>&, std::size_t,
                                                      const Image&, const Image&, const Image&, double, bool);
template CycleOutputs<float> cycle_loss_on_tape<float>(const ModelConfig&, const BoundParams<float>&, const Image&,
                                                       const Image&, const Image&, float, bool);
template CycleOutputs<double> cycle_loss_on_tape<double>(const ModelConfig&, const BoundParams<double>&, const Image&,
                                                         const Image&, const Image&, double, bool);

}  // namespace vict
