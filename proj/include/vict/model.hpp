#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vict/autodiff.hpp"
#include "vict/canvas.hpp"

namespace vict {

struct ModelConfig {
  std::size_t cell_size = 32;
  std::size_t patch_size = 8;
  std::size_t embed_dim = 64;
  std::size_t encoder_depth = 4;
  std::size_t decoder_depth = 2;
  std::size_t num_heads = 4;
  std::size_t mlp_ratio = 4;

  /// Throws ValueError when a field is zero, the patch size does not divide
  /// the cell size, or the heads do not divide the embedding width.
  void validate() const;

  /// Patches per side of the 2C x 2C canvas.
  std::size_t grid() const { return 2 * cell_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }
  std::size_t patch_dim() const { return 3 * patch_size * patch_size; }

  /// "key=value" lines, one field per line, in declaration order.
  std::string to_kv() const;
  static ModelConfig from_kv(std::string_view text);

  /// C=8, P=4, D=8, depths 1/1; the configuration used for gradient checks.
  static ModelConfig tiny();

  bool operator==(const ModelConfig&) const = default;
};

enum class ParamGroup : std::uint8_t { Encoder = 0, Decoder = 1 };
enum class Selector : std::uint8_t { Encoder = 0, All = 1 };

std::string_view group_name(ParamGroup g);
std::string_view selector_name(Selector s);
Selector parse_selector(std::string_view s);

template <class T>
struct NamedTensor {
  std::string name;
  ParamGroup group;
  Tensor<T> value;

  bool operator==(const NamedTensor&) const = default;
};

/// Ordered named-tensor collection. The order is fixed by init() and is the
/// order used for binding, checkpointing, and digests.
template <class T>
class Params {
 public:
  Params() = default;
  explicit Params(std::vector<NamedTensor<T>> entries);

  std::size_t size() const { return entries_.size(); }
  const NamedTensor<T>& operator[](std::size_t i) const { return entries_[i]; }
  NamedTensor<T>& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<NamedTensor<T>>& entries() const { return entries_; }

  std::optional<std::size_t> find(std::string_view name) const;
  const Tensor<T>& at(std::string_view name) const;
  std::size_t scalar_count() const;

  template <class U>
  Params<U> cast() const {
    std::vector<NamedTensor<U>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back({e.name, e.group, e.value.template cast<U>()});
    return Params<U>(std::move(out));
  }

  bool operator==(const Params& other) const { return entries_ == other.entries_; }

 private:
  std::vector<NamedTensor<T>> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

/// Matrices: truncated normal (cut at two std) with std 1/sqrt(fan_in).
/// Mask token: std 0.02. Positions (learned): start from sinusoids of cell-local and
/// canvas coordinates. Relative attention bias: a prior toward patches at the
/// same cell-local offset in other cells. Zero biases, unit layer-norm
/// gains. Deterministic in seed.
template <class T>
Params<T> init_params(const ModelConfig& config, std::uint64_t seed);

/// Indices of the tensors selected for optimization.
template <class T>
std::vector<std::size_t> param_group(const Params<T>& params, Selector selector);

/// Params placed on a tape: selected tensors become grad-requiring leaves,
/// the rest constants.
template <class T>
struct BoundParams {
  std::vector<Var<T>> vars;
  std::vector<std::size_t> trainable;
  std::shared_ptr<const std::map<std::string, std::size_t, std::less<>>> names;
};

template <class T>
BoundParams<T> bind_params(Tape<T>& tape, const Params<T>& params, const std::vector<std::size_t>& trainable);

/// Inpainting network f_theta: patchify, embed, substitute the mask token
/// for the masked cell's patches, add positions, encoder blocks, decoder
/// blocks, per-patch pixel head, logistic output. Returns [3, 2C, 2C].
template <class T>
Var<T> forward(const ModelConfig& config, const BoundParams<T>& params, const Var<T>& canvas_pixels,
               const MaskSpec& mask);

/// Frozen reconstruction of an assembled canvas.
Image reconstruct(const ModelConfig& config, const Params<float>& params, const Canvas& canvas,
                  const MaskSpec& mask);

}  // namespace vict
