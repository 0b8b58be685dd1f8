#include "vict/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace vict {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ValueError(std::string("checkpoint: ") + what + " too large");
  return static_cast<std::uint32_t>(v);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (n > bytes_.size() - pos_) throw FormatError(std::string("checkpoint truncated while reading ") + what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const char* what) {
    const auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(take(1, what)[0]); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Params<float>& params, const ModelConfig& config) {
  config.validate();
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  const std::string kv = config.to_kv();
  put_u32(out, checked_u32(kv.size(), "config block"));
  out += kv;
  put_u32(out, checked_u32(params.size(), "tensor count"));
  for (const auto& e : params.entries()) {
    put_u32(out, checked_u32(e.name.size(), "tensor name"));
    out += e.name;
    out.push_back(static_cast<char>(e.group));
    put_u32(out, checked_u32(e.value.rank(), "rank"));
    for (auto d : e.value.shape()) put_u32(out, checked_u32(d, "dimension"));
    const auto data = e.value.data();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof kCheckpointMagic, "magic") != std::string_view(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto kv_len = r.u32("config length");
  Checkpoint ck;
  ck.config = ModelConfig::from_kv(r.take(kv_len, "config block"));
  const auto count = r.u32("tensor count");
  std::vector<NamedTensor<float>> entries;
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.u32("name length");
    std::string name(r.take(name_len, "tensor name"));
    const auto group = r.u8("group");
    if (group > static_cast<std::uint8_t>(ParamGroup::Decoder)) {
      throw FormatError("checkpoint: bad group label for " + name);
    }
    const auto rank = r.u32("rank");
    if (rank == 0 || rank > 8) throw FormatError("checkpoint: bad rank " + std::to_string(rank) + " for " + name);
    Shape shape;
    std::size_t numel = 1;
    const std::size_t limit = r.remaining() / sizeof(float);
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = r.u32("dimension");
      if (d == 0) throw FormatError("checkpoint: zero dimension in " + name);
      if (numel > limit / d) throw FormatError("checkpoint: dimensions of " + name + " overflow the payload");
      numel *= d;
      shape.push_back(d);
    }
    const auto raw = r.take(numel * sizeof(float), "tensor values");
    std::vector<float> values(numel);
    std::memcpy(values.data(), raw.data(), raw.size());
    entries.push_back({std::move(name), static_cast<ParamGroup>(group), Tensor<float>(std::move(shape), std::move(values))});
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");
  ck.params = Params<float>(std::move(entries));
  return ck;
}

void save_checkpoint(const Params<float>& params, const ModelConfig& config, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(params, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace vict
