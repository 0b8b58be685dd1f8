#include "vict/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vict/ops.hpp"
#include "vict/optim.hpp"
#include "vict/rng.hpp"

namespace vict {

void PretrainConfig::validate() const {
  if (task_mix.empty()) throw ValueError("pretrain: task mix is empty");
  if (batch_size == 0) throw ValueError("pretrain: batch size must be positive");
  if (!std::isfinite(lr) || lr < 0) throw ValueError("pretrain: lr must be finite and nonnegative");
  if (!std::isfinite(beta) || beta <= 0) throw ValueError("pretrain: beta must be positive");
  if (!(flip_fraction >= 0 && flip_fraction <= 1)) throw ValueError("pretrain: flip_fraction must be in [0,1]");
  if (held_out && std::find(task_mix.begin(), task_mix.end(), *held_out) != task_mix.end()) {
    throw ValueError("pretrain: held-out task '" + std::string(task_name(*held_out)) + "' is in the task mix");
  }
}

namespace {

struct Pair {
  const Image* x;
  const Image* y;
};

// One masked-cell inpainting loss on a fresh tape; accumulates gradients of
// the selected tensors into `grads` scaled by `weight`. Returns the loss.
// The inference layout is (x, y, x_q, empty); the flipped one is
// (x_q, empty, x, y).
double inpaint_step(const ModelConfig& model, const Params<float>& params, const std::vector<std::size_t>& all,
                    Pair prompt, Pair query, bool flipped, double beta, float weight,
                    std::vector<Tensor<float>>& grads) {
  Tape<float> tape;
  const auto bound = bind_params(tape, params, all);
  const std::size_t c = model.cell_size;
  const CellPos target = flipped ? CellPos::TopRight : CellPos::BottomRight;
  const Var<float> canvas =
      flipped ? assemble_on_tape<float>(
                    tape, {tape.constant(*query.x), std::nullopt, tape.constant(*prompt.x), tape.constant(*prompt.y)}, c)
              : assemble_on_tape<float>(
                    tape, {tape.constant(*prompt.x), tape.constant(*prompt.y), tape.constant(*query.x), std::nullopt}, c);
  const Var<float> out = forward(model, bound, canvas, MaskSpec{target});
  const Var<float> loss =
      ops::smooth_l1(extract_cell(out, target), tape.constant(*query.y), static_cast<float>(beta));
  tape.backward(loss);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Tensor<float> g = tape.grad(bound.vars[all[k]]);
    auto dst = grads[k].data();
    const auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weight * src[i];
  }
  return loss.value()[0];
}

std::vector<Tensor<float>> zero_like(const Params<float>& params, const std::vector<std::size_t>& idx) {
  std::vector<Tensor<float>> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.emplace_back(params[i].value.shape(), 0.0f);
  return out;
}

void apply_update(Params<float>& params, const std::vector<std::size_t>& idx, const std::vector<Tensor<float>>& grads,
                  AdamWState<float>& state) {
  std::vector<Tensor<float>*> targets;
  targets.reserve(idx.size());
  for (std::size_t i : idx) targets.push_back(&params[i].value);
  adamw_step<float>(targets, grads, state);
}

}  // namespace

PretrainResult pretrain(const ModelConfig& model, const PretrainConfig& config, const ProgressFn& progress) {
  model.validate();
  return pretrain_from(model, init_params<float>(model, config.seed), config, progress);
}

PretrainResult pretrain_from(const ModelConfig& model, Params<float> init, const PretrainConfig& config,
                             const ProgressFn& progress) {
  model.validate();
  config.validate();
  PretrainResult result;
  result.params = std::move(init);
  result.loss_trace.reserve(config.steps);
  const auto all = param_group(result.params, Selector::All);
  AdamWState<float> state;
  state.hyper.lr = config.lr;
  const float weight = 1.0f / static_cast<float>(config.batch_size);

  for (std::size_t step = 0; step < config.steps; ++step) {
    auto grads = zero_like(result.params, all);
    double loss = 0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      Rng rng{config.seed, 0x7a1e0ULL, step, b};
      const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(config.task_mix.size()) - 1));
      const TaskKind task = config.task_mix[t];
      if (config.held_out && task == *config.held_out) throw Error("pretrain: drew the held-out task");
      const TaskSample prompt = generate(task, rng.next_u64(), model.cell_size);
      const TaskSample query = generate(task, rng.next_u64(), model.cell_size);
      const bool flipped = rng.bernoulli(config.flip_fraction);
      ++result.task_draws[static_cast<std::size_t>(task)];
      try {
        loss += weight * inpaint_step(model, result.params, all, {&prompt.input, &prompt.target},
                                      {&query.input, &query.target}, flipped, config.beta, weight, grads);
      } catch (const NumericError& e) {
        throw NumericError("pretrain diverged at step " + std::to_string(step) + ": " + e.what());
      }
    }
    if (!std::isfinite(loss)) throw NumericError("pretrain diverged at step " + std::to_string(step));
    try {
      apply_update(result.params, all, grads, state);
    } catch (const NumericError& e) {
      throw NumericError("pretrain diverged at step " + std::to_string(step) + ": " + e.what());
    }
    result.loss_trace.push_back(loss);
    if (progress) progress(step, loss);
  }
  return result;
}

double window_mean(const std::vector<double>& trace, std::size_t begin, std::size_t count) {
  if (count == 0 || begin + count > trace.size()) throw ValueError("window_mean: window out of range");
  double s = 0;
  for (std::size_t i = begin; i < begin + count; ++i) s += trace[i];
  return s / static_cast<double>(count);
}

void FewShotConfig::validate() const {
  if (std::find(kShots.begin(), kShots.end(), shots) == kShots.end()) {
    throw ValueError("fewshot: shots must be one of 1,2,4,8,16,32,64, got " + std::to_string(shots));
  }
  CorruptionSpec{corruption, severity, 0}.validate();
  if (!std::isfinite(lr) || lr < 0) throw ValueError("fewshot: lr must be finite and nonnegative");
  if (!std::isfinite(beta) || beta <= 0) throw ValueError("fewshot: beta must be positive");
  if (!(flip_fraction >= 0 && flip_fraction <= 1)) throw ValueError("fewshot: flip_fraction must be in [0,1]");
}

std::vector<TaskSample> fewshot_pairs(const FewShotConfig& config, std::size_t cell_size) {
  config.validate();
  std::vector<TaskSample> pairs;
  pairs.reserve(config.shots);
  for (std::size_t i = 0; i < config.shots; ++i) {
    TaskSample s = generate(config.task, hash_key({config.seed, 0xf5e0ULL, i}), cell_size);
    s.input = apply_corruption(s.input, {config.corruption, config.severity, hash_key({config.seed, 0xf5e1ULL, i})});
    pairs.push_back(std::move(s));
  }
  return pairs;
}

Params<float> fewshot_finetune(const ModelConfig& model, const Params<float>& theta0, const FewShotConfig& config) {
  model.validate();
  const auto pairs = fewshot_pairs(config, model.cell_size);
  Params<float> params = theta0;
  const auto all = param_group(params, Selector::All);
  AdamWState<float> state;
  state.hyper.lr = config.lr;
  const std::size_t m = pairs.size();
  for (std::size_t step = 0; step < config.steps; ++step) {
    const TaskSample& query = pairs[step % m];
    const TaskSample& prompt = pairs[(step + 1) % m];
    Rng rng{config.seed, 0xf5e2ULL, step};
    const bool flipped = rng.bernoulli(config.flip_fraction);
    auto grads = zero_like(params, all);
    try {
      inpaint_step(model, params, all, {&prompt.input, &prompt.target}, {&query.input, &query.target}, flipped,
                   config.beta, 1.0f, grads);
      apply_update(params, all, grads, state);
    } catch (const NumericError& e) {
      throw NumericError("fewshot fine-tune diverged at step " + std::to_string(step) + ": " + e.what());
    }
  }
  return params;
}

}  // namespace vict
