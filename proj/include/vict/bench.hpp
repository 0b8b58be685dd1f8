#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vict/checkpoint.hpp"
#include "vict/corruptions.hpp"
#include "vict/tasks.hpp"
#include "vict/vict.hpp"

namespace vict {

enum class Method : std::uint8_t { Frozen = 0, Vict = 1 };

std::string_view method_name(Method m);
Method parse_method(std::string_view s);

struct BenchConfig {
  TaskKind task = TaskKind::Denoise;
  std::vector<CorruptionKind> corruptions{all_corruptions().begin(), all_corruptions().end()};
  std::vector<int> severities{5};
  std::vector<Setting> settings{Setting::ZeroShot, Setting::OneShot};
  std::vector<Method> methods{Method::Frozen, Method::Vict};
  std::size_t num_samples = 50;
  VictConfig vict;
  std::filesystem::path checkpoint;
  std::uint64_t seed = 0;
  /// Worker count; 0 means VICT_THREADS if set, else the hardware count.
  std::size_t threads = 0;
  /// PPM dumps of the first sample of every cell (steps 0 and K).
  std::optional<std::filesystem::path> dump_canvases;
  /// CSV of per-sample adaptation loss traces.
  std::optional<std::filesystem::path> trace_loss;

  void validate() const;
};

/// Worker count after applying the VICT_THREADS override.
std::size_t resolve_threads(std::size_t requested);

inline constexpr std::string_view kCleanKey = "clean";
inline constexpr std::string_view kAvgKey = "avg";
inline constexpr double kCleanGapTolerance = 0.05;

struct ReportRow {
  Method method;
  Setting setting;
  std::string corruption;  // kind name, "clean", or "avg"
  int severity;            // 0 for clean rows
  double mean;
  double std;  // sample standard deviation (0 when n < 2)
  std::size_t n;
  std::size_t failures;
  std::vector<std::optional<double>> samples;  // per sample index; empty on avg rows
};

struct CleanGap {
  Setting setting;
  double frozen;
  double vict;
  double relative_gap;  // |vict - frozen| / |frozen|
  bool flagged;         // relative_gap > kCleanGapTolerance
};

struct MetricReport {
  TaskKind task = TaskKind::Denoise;
  MetricKind metric = MetricKind::PSNR;
  std::uint64_t seed = 0;
  std::size_t num_samples = 0;
  VictConfig vict;
  std::string checkpoint_digest;
  std::vector<ReportRow> rows;  // per-corruption rows followed by avg rows
  std::vector<CleanGap> clean_gaps;

  const ReportRow* find(Method method, Setting setting, std::string_view corruption, int severity) const;
  std::size_t total_failures() const;

  std::string to_json() const;
  /// Aligned table, one block per severity, corruption columns in report order.
  std::string to_text() const;
  std::string to_csv() const;
};

/// Every (corruption, severity, setting, method) cell over `num_samples`
/// seeded test samples. Sample i uses the same clean test pair and prompt
/// seed in every cell, so methods and settings are paired.
MetricReport run_bench(const BenchConfig& config, const Checkpoint& checkpoint);
/// Loads config.checkpoint first.
MetricReport run_bench(const BenchConfig& config);

/// Uncorrupted test inputs under a single pseudo-corruption "clean" with
/// zero-shot prompts; fills clean_gaps when both methods ran.
MetricReport run_clean_eval(const BenchConfig& config, const Checkpoint& checkpoint);

struct FewShotSweepConfig {
  BenchConfig bench;
  std::vector<std::size_t> shots{1, 2, 4, 8, 16, 32, 64};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t steps = 200;
  double lr = 1e-4;
};

struct FewShotPoint {
  std::size_t shots;
  std::uint64_t seed;
  CorruptionKind corruption;
  int severity;
  Setting setting;
  double mean;
  std::size_t n;
};

struct FewShotReport {
  TaskKind task = TaskKind::Denoise;
  MetricKind metric = MetricKind::PSNR;
  std::size_t steps = 0;
  double lr = 0;
  std::vector<FewShotPoint> points;

  /// Mean over seeds, corruptions, severities, and settings for one shot count.
  double mean_for(std::size_t shots) const;
  std::string to_json() const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Fine-tunes one model per (seed, shots, corruption, severity) on corrupted
/// labeled pairs and evaluates it frozen on the bench's test stream.
FewShotReport run_fewshot(const FewShotSweepConfig& config, const Checkpoint& checkpoint);

}  // namespace vict
