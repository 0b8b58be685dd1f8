#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vict/corruptions.hpp"
#include "vict/model.hpp"
#include "vict/tasks.hpp"

namespace vict {

struct PretrainConfig {
  std::size_t steps = 5000;
  double lr = 3e-4;
  std::size_t batch_size = 1;
  std::vector<TaskKind> task_mix{kAllTasks.begin(), kAllTasks.end()};
  std::optional<TaskKind> held_out;
  double beta = 1.0;
  /// Probability that a draw uses the flipped layout (query output masked in
  /// the top-right cell, prompt pair on the bottom row) instead of the
  /// inference layout. Nonzero values put the cell that the second tuning
  /// pass inpaints in distribution.
  double flip_fraction = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValueError for an empty mix, zero batch, a held-out task inside
  /// the mix, or a non-finite/negative lr.
  void validate() const;
};

struct PretrainResult {
  Params<float> params;
  std::vector<double> loss_trace;
  /// Number of pairs drawn per task (prompt and query counted once per step).
  std::array<std::size_t, kAllTasks.size()> task_draws{};
};

using ProgressFn = std::function<void(std::size_t step, double loss)>;

/// Masked-cell inpainting pre-training on clean task pairs: every step draws
/// a task, an independent prompt pair, and a query pair, predicts the query
/// output cell, and takes one AdamW step on all parameters.
PretrainResult pretrain(const ModelConfig& model, const PretrainConfig& config, const ProgressFn& progress = {});

/// Same loop starting from existing parameters.
PretrainResult pretrain_from(const ModelConfig& model, Params<float> init, const PretrainConfig& config,
                             const ProgressFn& progress = {});

/// Mean of a trace window [begin, begin + count).
double window_mean(const std::vector<double>& trace, std::size_t begin, std::size_t count);

struct FewShotConfig {
  static constexpr std::array<std::size_t, 7> kShots = {1, 2, 4, 8, 16, 32, 64};

  std::size_t shots = 1;
  TaskKind task = TaskKind::Denoise;
  CorruptionKind corruption = CorruptionKind::GaussianNoise;
  int severity = 5;
  std::size_t steps = 200;
  double lr = 1e-4;
  double beta = 1.0;
  double flip_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The m labeled corrupted pairs (inputs corrupted, targets clean).
std::vector<TaskSample> fewshot_pairs(const FewShotConfig& config, std::size_t cell_size = kDefaultCellSize);

/// Fine-tunes all parameters of a copy of `theta0` on the pre-training
/// objective over the m corrupted pairs, cycling through them for a fixed
/// step budget. Step s uses pair s mod m as the query and pair (s+1) mod m
/// as the prompt.
Params<float> fewshot_finetune(const ModelConfig& model, const Params<float>& theta0, const FewShotConfig& config);

}  // namespace vict
