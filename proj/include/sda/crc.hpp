#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sda::modem {

using Bits = std::vector<std::uint8_t>;

/// CRC-8, generator x^8 + x^2 + x + 1 (0x07), init 0, no reflection, no final XOR.
/// Bits are consumed in order (MSB-first within bytes when built from text).
std::uint8_t crc8(std::span<const std::uint8_t> bits);
/// The CRC as 8 bits, MSB first.
Bits crc8_bits(std::span<const std::uint8_t> bits);
/// True when `bits` ends in the CRC of its prefix.
bool crc8_check(std::span<const std::uint8_t> bits_with_crc);

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);
Bits uint_to_bits(std::uint64_t value, int width);
std::uint64_t bits_to_uint(std::span<const std::uint8_t> bits);

}  // namespace sda::modem
