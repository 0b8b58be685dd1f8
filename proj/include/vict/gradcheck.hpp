#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vict/model.hpp"

namespace vict {

inline constexpr double kGradcheckTolerance = 1e-4;

struct GradcheckConfig {
  std::uint64_t seed = 0;
  /// Finite-difference step of the five-point central stencil.
  double step = 1e-3;
  /// Std of the Gaussian jitter added to the initial weights, so no tensor
  /// sits at an init-time symmetry (unit LayerNorm gains, zero biases).
  double jitter = 0.25;
  /// Denominator floor of the relative error. Gradients that vanish
  /// analytically (key biases under the softmax shift) compare on this scale.
  double floor = 1e-9;
  Selector selector = Selector::Encoder;
};

struct GradcheckEntry {
  std::string name;
  std::size_t numel;
  double max_rel_error;
  double max_abs_grad;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;

  double max_rel_error() const;
  bool passed() const { return max_rel_error() < kGradcheckTolerance; }
  std::string to_text() const;
};

/// Double-precision check of the cycle loss gradient on the tiny config:
/// every element of every selected tensor against finite differences.
GradcheckReport gradcheck_cycle_loss(const GradcheckConfig& config = {});

}  // namespace vict
