#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "vict/model.hpp"

namespace vict {

inline constexpr char kCheckpointMagic[8] = {'V', 'I', 'C', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  Params<float> params;
};

/// Layout (all integers little-endian):
///   magic "VICTCKPT" | u32 version | u32 config length | config key=value text
///   | u32 tensor count | per tensor: u32 name length, name bytes, u8 group,
///   u32 rank, u32 dims..., f32 values...
std::string serialize_checkpoint(const Params<float>& params, const ModelConfig& config);
/// Throws FormatError on bad magic, unsupported version, truncation, trailing
/// bytes, or dimensions whose product overflows the remaining payload.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Params<float>& params, const ModelConfig& config, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vict
