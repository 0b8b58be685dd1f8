#include "vict/model.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "vict/ops.hpp"
#include "vict/rng.hpp"

namespace vict {

void ModelConfig::validate() const {
  if (!cell_size || !patch_size || !embed_dim || !encoder_depth || !decoder_depth || !num_heads || !mlp_ratio) {
    throw ValueError("model config: all fields must be positive");
  }
  if (cell_size % 2 != 0) throw ValueError("model config: cell_size must be even");
  if (cell_size % patch_size != 0) throw ValueError("model config: patch_size must divide cell_size");
  if (embed_dim % num_heads != 0) throw ValueError("model config: num_heads must divide embed_dim");
}

std::string ModelConfig::to_kv() const {
  std::ostringstream os;
  os << "cell_size=" << cell_size << '\n'
     << "patch_size=" << patch_size << '\n'
     << "embed_dim=" << embed_dim << '\n'
     << "encoder_depth=" << encoder_depth << '\n'
     << "decoder_depth=" << decoder_depth << '\n'
     << "num_heads=" << num_heads << '\n'
     << "mlp_ratio=" << mlp_ratio << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_kv(std::string_view text) {
  ModelConfig cfg;
  const std::map<std::string, std::size_t ModelConfig::*, std::less<>> fields = {
      {"cell_size", &ModelConfig::cell_size},         {"patch_size", &ModelConfig::patch_size},
      {"embed_dim", &ModelConfig::embed_dim},         {"encoder_depth", &ModelConfig::encoder_depth},
      {"decoder_depth", &ModelConfig::decoder_depth}, {"num_heads", &ModelConfig::num_heads},
      {"mlp_ratio", &ModelConfig::mlp_ratio}};
  std::istringstream in{std::string(text)};
  std::string line;
  std::set<std::string, std::less<>> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("model config: malformed line '" + line + "'");
    const auto key = line.substr(0, eq);
    const auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("model config: unknown key '" + key + "'");
    if (!seen.insert(key).second) throw FormatError("model config: duplicate key '" + key + "'");
    const std::string_view value = std::string_view(line).substr(eq + 1);
    std::size_t parsed = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || end != value.data() + value.size()) {
      throw FormatError("model config: bad value in '" + line + "'");
    }
    cfg.*(it->second) = parsed;
  }
  if (seen.size() != fields.size()) throw FormatError("model config: missing keys");
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig cfg;
  cfg.cell_size = 8;
  cfg.patch_size = 4;
  cfg.embed_dim = 8;
  cfg.encoder_depth = 1;
  cfg.decoder_depth = 1;
  cfg.num_heads = 2;
  cfg.mlp_ratio = 4;
  return cfg;
}

std::string_view group_name(ParamGroup g) { return g == ParamGroup::Encoder ? "encoder" : "decoder"; }
std::string_view selector_name(Selector s) { return s == Selector::Encoder ? "encoder" : "all"; }

Selector parse_selector(std::string_view s) {
  if (s == "encoder") return Selector::Encoder;
  if (s == "all") return Selector::All;
  throw ValueError("unknown parameter selector '" + std::string(s) + "' (expected encoder|all)");
}

template <class T>
Params<T>::Params(std::vector<NamedTensor<T>> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!by_name_.emplace(entries_[i].name, i).second) throw ValueError("params: duplicate name " + entries_[i].name);
  }
}

template <class T>
std::optional<std::size_t> Params<T>::find(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

template <class T>
const Tensor<T>& Params<T>::at(std::string_view name) const {
  const auto i = find(name);
  if (!i) throw ValueError("params: no tensor named " + std::string(name));
  return entries_[*i].value;
}

template <class T>
std::size_t Params<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

namespace {

enum class Init { Weight, Zero, One, SinCos, CellPrior };

struct Spec {
  std::string name;
  ParamGroup group;
  Shape shape;
  Init init;
};

void block_specs(std::vector<Spec>& out, const std::string& prefix, ParamGroup g, const ModelConfig& cfg) {
  const std::size_t d = cfg.embed_dim, h = cfg.embed_dim * cfg.mlp_ratio;
  out.push_back({prefix + ".norm1.gain", g, {d}, Init::One});
  out.push_back({prefix + ".norm1.bias", g, {d}, Init::Zero});
  out.push_back({prefix + ".attn.qkv.weight", g, {d, 3 * d}, Init::Weight});
  out.push_back({prefix + ".attn.qkv.bias", g, {3 * d}, Init::Zero});
  out.push_back({prefix + ".attn.rel_bias", g, {cfg.num_heads, (2 * cfg.grid() - 1) * (2 * cfg.grid() - 1)}, Init::CellPrior});
  out.push_back({prefix + ".attn.proj.weight", g, {d, d}, Init::Weight});
  out.push_back({prefix + ".attn.proj.bias", g, {d}, Init::Zero});
  out.push_back({prefix + ".norm2.gain", g, {d}, Init::One});
  out.push_back({prefix + ".norm2.bias", g, {d}, Init::Zero});
  out.push_back({prefix + ".mlp.fc1.weight", g, {d, h}, Init::Weight});
  out.push_back({prefix + ".mlp.fc1.bias", g, {h}, Init::Zero});
  out.push_back({prefix + ".mlp.fc2.weight", g, {h, d}, Init::Weight});
  out.push_back({prefix + ".mlp.fc2.bias", g, {d}, Init::Zero});
}

std::vector<Spec> param_specs(const ModelConfig& cfg) {
  const std::size_t d = cfg.embed_dim;
  std::vector<Spec> out;
  out.push_back({"patch_embed.weight", ParamGroup::Encoder, {cfg.patch_dim(), d}, Init::Weight});
  out.push_back({"patch_embed.bias", ParamGroup::Encoder, {d}, Init::Zero});
  out.push_back({"pos_embed", ParamGroup::Encoder, {cfg.num_patches(), d}, Init::SinCos});
  out.push_back({"mask_token", ParamGroup::Encoder, {d}, Init::Weight});
  for (std::size_t i = 0; i < cfg.encoder_depth; ++i) {
    block_specs(out, "encoder." + std::to_string(i), ParamGroup::Encoder, cfg);
  }
  for (std::size_t i = 0; i < cfg.decoder_depth; ++i) {
    block_specs(out, "decoder." + std::to_string(i), ParamGroup::Decoder, cfg);
  }
  out.push_back({"decoder.norm.gain", ParamGroup::Decoder, {d}, Init::One});
  out.push_back({"decoder.norm.bias", ParamGroup::Decoder, {d}, Init::Zero});
  out.push_back({"head.weight", ParamGroup::Decoder, {d, cfg.patch_dim()}, Init::Weight});
  out.push_back({"head.bias", ParamGroup::Decoder, {cfg.patch_dim()}, Init::Zero});
  return out;
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

// Fixed-frequency code over four coordinates per patch: cell-local row,
// cell-local column, canvas row, canvas column, a quarter of the channels
// each. Patches at the same spot of different cells share the first half.
template <class T>
void fill_sincos(Tensor<T>& t, const ModelConfig& cfg) {
  const std::size_t g = cfg.grid(), half = g / 2, d = cfg.embed_dim, q = d / 4;
  for (std::size_t n = 0; n < cfg.num_patches(); ++n) {
    const std::size_t gr = n / g, gc = n % g;
    const std::array<double, 4> coord = {static_cast<double>(gr % half), static_cast<double>(gc % half),
                                         static_cast<double>(gr), static_cast<double>(gc)};
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t k = 0; 2 * k + 1 < q; ++k) {
        const double omega = std::pow(100.0, -static_cast<double>(2 * k) / static_cast<double>(q));
        t.at(n, b * q + 2 * k) = static_cast<T>(std::sin(coord[b] * omega));
        t.at(n, b * q + 2 * k + 1) = static_cast<T>(std::cos(coord[b] * omega));
      }
    }
  }
}

// Relative-bias tables start favoring offsets that are whole-cell
// translations (including zero), so each patch initially attends to the same
// spot in all four cells.
template <class T>
void fill_cell_prior(Tensor<T>& t, const ModelConfig& cfg) {
  constexpr double kPrior = 4.0;
  const auto g = static_cast<std::ptrdiff_t>(cfg.grid()), half = g / 2, span = 2 * g - 1;
  for (std::size_t h = 0; h < t.dim(0); ++h) {
    for (std::ptrdiff_t dr = -(g - 1); dr < g; ++dr) {
      for (std::ptrdiff_t dc = -(g - 1); dc < g; ++dc) {
        if (dr % half == 0 && dc % half == 0) {
          t.at(h, static_cast<std::size_t>((dr + g - 1) * span + dc + g - 1)) = static_cast<T>(kPrior);
        }
      }
    }
  }
}

}  // namespace

template <class T>
Params<T> init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  constexpr double kStd = 0.02;
  std::vector<NamedTensor<T>> entries;
  for (const auto& spec : param_specs(config)) {
    Tensor<T> t(spec.shape, T{0});
    if (spec.init == Init::One) t.fill(T{1});
    if (spec.init == Init::SinCos) fill_sincos(t, config);
    if (spec.init == Init::CellPrior) fill_cell_prior(t, config);
    if (spec.init == Init::Weight) {
      Rng rng{seed, name_hash(spec.name)};
      const double std = spec.shape.size() == 2 ? 1.0 / std::sqrt(static_cast<double>(spec.shape[0])) : kStd;
      for (auto& v : t.data()) {
        double z = rng.normal();
        while (std::abs(z) > 2.0) z = rng.normal();
        v = static_cast<T>(std * z);
      }
    }
    entries.push_back({spec.name, spec.group, std::move(t)});
  }
  return Params<T>(std::move(entries));
}

template <class T>
std::vector<std::size_t> param_group(const Params<T>& params, Selector selector) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (selector == Selector::All || params[i].group == ParamGroup::Encoder) out.push_back(i);
  }
  return out;
}

template <class T>
BoundParams<T> bind_params(Tape<T>& tape, const Params<T>& params, const std::vector<std::size_t>& trainable) {
  std::vector<std::uint8_t> is_trainable(params.size(), 0);
  for (auto i : trainable) is_trainable.at(i) = 1;
  BoundParams<T> bound;
  bound.trainable = trainable;
  auto names = std::make_shared<std::map<std::string, std::size_t, std::less<>>>();
  for (std::size_t i = 0; i < params.size(); ++i) names->emplace(params[i].name, i);
  bound.names = std::move(names);
  bound.vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    bound.vars.push_back(is_trainable[i] ? tape.leaf(params[i].value) : tape.constant(params[i].value));
  }
  return bound;
}

namespace {

std::shared_ptr<const ops::Index> patchify_index(const ModelConfig& cfg) {
  const std::size_t p = cfg.patch_size, g = cfg.grid(), w = 2 * cfg.cell_size;
  auto index = std::make_shared<ops::Index>(cfg.num_patches() * cfg.patch_dim());
  std::size_t k = 0;
  for (std::size_t pr = 0; pr < g; ++pr) {
    for (std::size_t pc = 0; pc < g; ++pc) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            (*index)[k++] = static_cast<std::uint32_t>((ch * w + pr * p + i) * w + pc * p + j);
          }
        }
      }
    }
  }
  return index;
}

std::shared_ptr<const ops::Index> unpatchify_index(const ModelConfig& cfg) {
  const std::size_t p = cfg.patch_size, g = cfg.grid(), w = 2 * cfg.cell_size, pd = cfg.patch_dim();
  auto index = std::make_shared<ops::Index>(3 * w * w);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t r = 0; r < w; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t patch = (r / p) * g + c / p;
        (*index)[(ch * w + r) * w + c] =
            static_cast<std::uint32_t>(patch * pd + ch * p * p + (r % p) * p + c % p);
      }
    }
  }
  return index;
}

// Per-head [N, N] lookup into the relative-bias table, keyed by the
// (row, column) offset between query and key patches.
std::vector<std::shared_ptr<const ops::Index>> rel_bias_index(const ModelConfig& cfg) {
  const std::size_t g = cfg.grid(), n = cfg.num_patches(), span = 2 * g - 1;
  std::vector<std::shared_ptr<const ops::Index>> out;
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    auto index = std::make_shared<ops::Index>(n * n);
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t dr = q / g + g - 1 - k / g, dc = q % g + g - 1 - k % g;
        (*index)[q * n + k] = static_cast<std::uint32_t>(h * span * span + dr * span + dc);
      }
    }
    out.push_back(std::move(index));
  }
  return out;
}

template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  return ops::add_bias(ops::matmul(x, w), b);
}

template <class T>
Var<T> block(const ModelConfig& cfg, const Var<T>& x, const std::function<const Var<T>&(const std::string&)>& p,
             const std::string& prefix, const std::vector<std::shared_ptr<const ops::Index>>& rel_index) {
  const std::size_t n = cfg.num_patches();
  const std::size_t d = cfg.embed_dim, heads = cfg.num_heads, dh = d / heads;
  const T inv_sqrt_dh = T{1} / std::sqrt(static_cast<T>(dh));

  Var<T> h = ops::layer_norm(x, p(prefix + ".norm1.gain"), p(prefix + ".norm1.bias"));
  Var<T> qkv = linear(h, p(prefix + ".attn.qkv.weight"), p(prefix + ".attn.qkv.bias"));
  std::vector<Var<T>> head_out;
  head_out.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    Var<T> q = ops::slice(qkv, 1, k * dh, dh);
    Var<T> kk = ops::slice(qkv, 1, d + k * dh, dh);
    Var<T> v = ops::slice(qkv, 1, 2 * d + k * dh, dh);
    Var<T> logits = ops::scale(ops::matmul(q, ops::transpose(kk)), inv_sqrt_dh);
    logits = ops::add(logits, ops::gather(p(prefix + ".attn.rel_bias"), rel_index[k], Shape{n, n}));
    Var<T> att = ops::softmax_rows(logits);
    head_out.push_back(ops::matmul(att, v));
  }
  Var<T> attn = heads == 1 ? head_out[0] : ops::concat<T>(head_out, 1);
  attn = linear(attn, p(prefix + ".attn.proj.weight"), p(prefix + ".attn.proj.bias"));
  Var<T> x1 = ops::add(x, attn);

  Var<T> h2 = ops::layer_norm(x1, p(prefix + ".norm2.gain"), p(prefix + ".norm2.bias"));
  Var<T> m = ops::gelu(linear(h2, p(prefix + ".mlp.fc1.weight"), p(prefix + ".mlp.fc1.bias")));
  m = linear(m, p(prefix + ".mlp.fc2.weight"), p(prefix + ".mlp.fc2.bias"));
  return ops::add(x1, m);
}

}  // namespace

template <class T>
Var<T> forward(const ModelConfig& config, const BoundParams<T>& params, const Var<T>& canvas_pixels,
               const MaskSpec& mask) {
  config.validate();
  const Shape expected{3, 2 * config.cell_size, 2 * config.cell_size};
  if (canvas_pixels.shape() != expected) {
    throw ShapeError("forward: canvas " + shape_str(canvas_pixels.shape()) + " does not match config " +
                     shape_str(expected));
  }
  if (!params.names || params.vars.size() != params.names->size()) {
    throw ShapeError("forward: parameters are not bound");
  }
  const auto& vars = params.vars;
  const auto& names = *params.names;
  const std::function<const Var<T>&(const std::string&)> p = [&](const std::string& name) -> const Var<T>& {
    const auto it = names.find(name);
    if (it == names.end()) throw ValueError("forward: missing parameter " + name);
    return vars[it->second];
  };

  const std::size_t n = config.num_patches();
  Var<T> patches = ops::gather(canvas_pixels, patchify_index(config), Shape{n, config.patch_dim()});
  Var<T> x = linear(patches, p("patch_embed.weight"), p("patch_embed.bias"));
  x = ops::replace_rows(x, mask.patch_mask(config.cell_size, config.patch_size), p("mask_token"));
  x = ops::add(x, p("pos_embed"));
  const auto rel_index = rel_bias_index(config);
  for (std::size_t i = 0; i < config.encoder_depth; ++i) {
    x = block(config, x, p, "encoder." + std::to_string(i), rel_index);
  }
  for (std::size_t i = 0; i < config.decoder_depth; ++i) {
    x = block(config, x, p, "decoder." + std::to_string(i), rel_index);
  }
  x = ops::layer_norm(x, p("decoder.norm.gain"), p("decoder.norm.bias"));
  Var<T> pix = ops::sigmoid(linear(x, p("head.weight"), p("head.bias")));
  return ops::gather(pix, unpatchify_index(config), expected);
}

Image reconstruct(const ModelConfig& config, const Params<float>& params, const Canvas& canvas,
                  const MaskSpec& mask) {
  if (canvas.cell_size() != config.cell_size) {
    throw ShapeError("reconstruct: canvas cell size " + std::to_string(canvas.cell_size()) + " vs config " +
                     std::to_string(config.cell_size));
  }
  if (canvas.empty_cell() != mask.masked) throw ValueError("reconstruct: mask does not match the canvas's empty cell");
  Tape<float> tape;
  const auto bound = bind_params(tape, params, {});
  Var<float> pixels = tape.constant(canvas.pixels());
  return forward(config, bound, pixels, mask).value();
}

template class Params<float>;
template class Params<double>;
template Params<float> init_params<float>(const ModelConfig&, std::uint64_t);
template Params<double> init_params<double>(const ModelConfig&, std::uint64_t);
template std::vector<std::size_t> param_group<float>(const Params<float>&, Selector);
template std::vector<std::size_t> param_group<double>(const Params<double>&, Selector);
template BoundParams<float> bind_params<float>(Tape<float>&, const Params<float>&, const std::vector<std::size_t>&);
template BoundParams<double> bind_params<double>(Tape<double>&, const Params<double>&, const std::vector<std::size_t>&);
template Var<float> forward<float>(const ModelConfig&, const BoundParams<float>&, const Var<float>&, const MaskSpec&);
template Var<double> forward<double>(const ModelConfig&, const BoundParams<double>&, const Var<double>&,
                                     const MaskSpec&);

}  // namespace vict
