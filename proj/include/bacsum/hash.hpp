#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace bacsum {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> data);
Sha256Digest sha256(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);
inline std::string sha256_hex(std::string_view text) { return to_hex(sha256(text)); }

}  // namespace bacsum
