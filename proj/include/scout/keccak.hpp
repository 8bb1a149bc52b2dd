#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace scout {

using Digest256 = std::array<std::uint8_t, 32>;

// Original Keccak-256 (pad byte 0x01), as used for chain address checksums.
Digest256 keccak256(std::span<const std::uint8_t> data);
Digest256 keccak256(std::string_view data);

// FIPS 202 SHA3-256 (pad byte 0x06); same permutation, different domain padding.
Digest256 sha3_256(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace scout
