#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "vict/image.hpp"

namespace vict {

enum class TaskKind : std::uint8_t { Denoise = 0, Derain = 1, Lowlight = 2, Segmentation = 3, Depth = 4 };

inline constexpr std::array<TaskKind, 5> kAllTasks = {TaskKind::Denoise, TaskKind::Derain, TaskKind::Lowlight,
                                                      TaskKind::Segmentation, TaskKind::Depth};

std::string_view task_name(TaskKind task);
TaskKind parse_task(std::string_view name);

enum class MetricKind : std::uint8_t { PSNR, MIoU, ARel };

std::string_view metric_name(MetricKind kind);
MetricKind task_metric(TaskKind task);
bool higher_is_better(MetricKind kind);

struct Metric {
  MetricKind kind;
  double value;
};

/// Procedurally generated input/target pair for one task.
struct TaskSample {
  Image input;
  Image target;
  TaskKind task;
  std::uint64_t seed;
};

/// Class colors for segmentation targets. Index 0 is background; shape
/// classes are disk=1, rectangle=2, triangle=3.
struct Palette {
  std::vector<std::array<float, 3>> colors;

  static const Palette& standard();
  /// Index of the nearest color (squared L2); ties go to the lower index.
  std::size_t decode(float r, float g, float b) const;
};

inline constexpr std::size_t kDefaultCellSize = 32;
inline constexpr double kDenoiseSigma = 0.1;
inline constexpr double kLowlightGamma = 2.2;
inline constexpr double kLowlightScale = 0.4;
inline constexpr float kDepthBackground = 0.05f;

/// Clean scene shared by all task kinds: 2-5 anti-aliased disks, rectangles,
/// and triangles over a smooth gradient. Deterministic in seed.
Image render_scene(std::uint64_t seed, std::size_t size = kDefaultCellSize);

TaskSample generate(TaskKind task, std::uint64_t seed, std::size_t size = kDefaultCellSize);

/// 10 log10(1/MSE), capped at 99 dB (MSE below 1e-10 reads as the cap).
Metric psnr(const Image& pred, const Image& target);
/// Nearest-palette decoding, IoU per class present in the target, averaged.
Metric miou(const Image& pred, const Image& target, const Palette& palette = Palette::standard());
/// mean(|pred - target| / target) over luminance pixels with target > 0.01.
Metric a_rel(const Image& pred, const Image& target);

/// The task's own metric.
Metric evaluate(TaskKind task, const Image& pred, const Image& target);

}  // namespace vict
