#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vict/image.hpp"

namespace vict {

enum class CorruptionKind : std::uint8_t {
  GaussianNoise,
  ShotNoise,
  ImpulseNoise,
  DefocusBlur,
  GlassBlur,
  MotionBlur,
  ZoomBlur,
  Fog,
  Frost,
  Snow,
  Brightness,
  Contrast,
  ElasticTransform,
  JpegCompression,
  Pixelate,
};

inline constexpr std::size_t kNumCorruptions = 15;
inline constexpr int kMaxSeverity = 5;

enum class CorruptionCategory : std::uint8_t { Noise, Blur, Weather, Digital };

/// All kinds in declaration order (grouped by category).
const std::array<CorruptionKind, kNumCorruptions>& all_corruptions();
/// All kinds in the alphabetical column order of the report table.
const std::array<CorruptionKind, kNumCorruptions>& report_order();

std::string_view corruption_name(CorruptionKind kind);
/// Short column header, e.g. "gauss", "motn".
std::string_view corruption_abbrev(CorruptionKind kind);
CorruptionKind parse_corruption(std::string_view name);
CorruptionCategory corruption_category(CorruptionKind kind);
std::string_view category_name(CorruptionCategory category);

struct CorruptionSpec {
  CorruptionKind kind;
  int severity;
  std::uint64_t seed;

  /// Throws ValueError when severity is outside [1, 5] or kind is unknown.
  void validate() const;
};

/// Per-kind, per-severity parameter tuples. Row layout per kind:
///   gaussian_noise   sigma
///   shot_noise       photons per unit intensity c
///   impulse_noise    replacement probability p
///   defocus_blur     disk radius (px)
///   glass_blur       gaussian sigma, swap radius, iterations
///   motion_blur      line length (px)
///   zoom_blur        max zoom, zoom step
///   fog              blend strength t, fractal decay
///   frost            opacity o, threshold
///   snow             point density, streak length, brightness lift w
///   brightness       offset b
///   contrast         factor c
///   elastic          displacement alpha (px), smoothing sigma
///   jpeg             quality (1-100)
///   pixelate         downscale factor f
class SeverityTable {
 public:
  static const SeverityTable& defaults();

  const std::vector<double>& row(CorruptionKind kind, int severity) const;
  void set_row(CorruptionKind kind, int severity, std::vector<double> values);

  /// "key = v1, v2" lines keyed by "<kind>.<severity>", preceded by "version = 1".
  std::string to_text() const;
  static SeverityTable parse(std::string_view text);
  static SeverityTable load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const SeverityTable&) const = default;

 private:
  std::array<std::array<std::vector<double>, kMaxSeverity>, kNumCorruptions> rows_{};
};

/// Row from the built-in table.
const std::vector<double>& severity_params(CorruptionKind kind, int severity);

/// Corrupt a [3,C,C] image in [0,1]. Pure in (image, spec, table); random
/// draws come from a generator keyed by (seed, kind, severity).
Image apply_corruption(const Image& image, const CorruptionSpec& spec);
Image apply_corruption(const Image& image, const CorruptionSpec& spec, const SeverityTable& table);

struct ProbeRow {
  CorruptionKind kind;
  int severity;
  double mean_mse;
};

/// Mean MSE-to-clean over `count` procedural probe scenes for every
/// (kind, severity).
std::vector<ProbeRow> probe_monotonicity(const SeverityTable& table = SeverityTable::defaults(),
                                         std::size_t count = 16, std::size_t size = 32);
std::string probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace vict
