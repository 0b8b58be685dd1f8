#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vict/corruptions.hpp"
#include "vict/model.hpp"
#include "vict/tasks.hpp"

namespace vict {

enum class Setting : std::uint8_t { ZeroShot = 0, OneShot = 1 };

std::string_view setting_name(Setting s);
/// Accepts "zero_shot"/"zero" and "one_shot"/"one".
Setting parse_setting(std::string_view s);

struct PromptPair {
  Image x;
  Image y;
};

/// Task prompts. `corruption` is empty for clean prompts and holds the spec
/// applied to the prompt inputs otherwise. Only the first pair is consumed.
struct PromptSet {
  std::vector<PromptPair> pairs;
  std::optional<CorruptionSpec> corruption;

  const PromptPair& first() const;
};

/// Query image plus its ground truth. Adaptation entry points accept only
/// `x_t`, so the label cannot reach them.
struct TestSample {
  Image x_t;
  Image y_t;
};

/// Fresh clean pair for `task`. One-shot corrupts the prompt input with the
/// test corruption's kind and severity under an independent seed; targets
/// are never corrupted.
PromptSet select_prompt(TaskKind task, Setting setting, const std::optional<CorruptionSpec>& corruption,
                        std::uint64_t seed, std::size_t size = kDefaultCellSize);

struct VictConfig {
  static constexpr std::size_t kPaperSteps = 60;
  static constexpr std::size_t kSweepSteps = 20;
  static constexpr double kPaperLr = 1e-6;
  static constexpr double kToyLr = 5e-6;

  std::size_t steps = kPaperSteps;
  double lr = kToyLr;
  Selector selector = Selector::Encoder;
  double beta = 1.0;
  /// Stop gradients at the first-pass prediction (ablation only).
  bool detach = false;

  void validate() const;
};

struct AdaptationResult {
  Image y_t_hat;
  std::vector<double> loss_trace;
  std::string adapted_params_digest;
};

template <class T>
struct CycleOutputs {
  Var<T> loss;
  Var<T> y_t_hat;  // first-pass prediction of the query output, clamped
  Var<T> y_hat;    // second-pass reconstruction of the prompt output
};

/// Any differentiable canvas inpainter: [3, 2C, 2C] pixels in, same out.
template <class T>
using CanvasPredictor = std::function<Var<T>(const Var<T>& canvas_pixels, const MaskSpec& mask)>;

/// Cycle objective for an arbitrary predictor on `tape`.
template <class T>
CycleOutputs<T> cycle_objective(Tape<T>& tape, const CanvasPredictor<T>& predict, std::size_t cell_size,
                                const Image& x, const Image& y, const Image& x_t, T beta, bool detach = false);

/// Two-pass cycle objective on an existing tape: predict the query output,
/// re-insert it as the prompt output of a flipped canvas, reconstruct the
/// original prompt output, and score it against `y` with smooth-L1.
template <class T>
CycleOutputs<T> cycle_loss_on_tape(const ModelConfig& config, const BoundParams<T>& params, const Image& x,
                                   const Image& y, const Image& x_t, T beta, bool detach = false);

/// Cycle loss value with frozen parameters.
double cycle_loss(const ModelConfig& config, const Params<float>& params, const PromptPair& prompt, const Image& x_t,
                  double beta = 1.0);

/// Frozen in-context prediction of the query output cell.
Image frozen_predict(const ModelConfig& config, const Params<float>& params, const PromptPair& prompt,
                     const Image& x_t);

/// Observer invoked before the first update (step 0) and after the last
/// (step K) with the inference canvas and the model's full reconstruction.
struct AdaptationHooks {
  std::function<void(std::size_t step, const Image& inference_canvas, const Image& reconstruction)> on_canvas;
};

/// Test-time tuning of a private copy of `theta0` on the cycle objective
/// for `config.steps` steps, then a final prediction with the adapted
/// weights. `theta0` is never modified.
AdaptationResult adapt_and_predict(const ModelConfig& model, const Params<float>& theta0, const PromptPair& prompt,
                                   const Image& x_t, const VictConfig& config, const AdaptationHooks& hooks = {});

/// Same as adapt_and_predict but also returns the adapted weights.
AdaptationResult adapt_and_predict(const ModelConfig& model, const Params<float>& theta0, const PromptPair& prompt,
                                   const Image& x_t, const VictConfig& config, Params<float>* adapted,
                                   const AdaptationHooks& hooks = {});

}  // namespace vict
