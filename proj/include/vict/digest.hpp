#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "vict/model.hpp"

namespace vict {

/// Lowercase hex SHA-256 of a byte range.
std::string sha256_hex(std::span<const std::byte> bytes);

/// SHA-256 over every tensor's name, group, shape, and raw value bytes, in
/// collection order. Equal digests mean bit-identical parameters.
std::string params_digest(const Params<float>& params);

}  // namespace vict
