#include "sda/crc.hpp"

#include "sda/common.hpp"

namespace sda::modem {

std::uint8_t crc8(std::span<const std::uint8_t> bits) {
  std::uint8_t reg = 0;
  for (std::uint8_t b : bits) {
    const bool feedback = ((reg >> 7) & 1U) ^ (b & 1U);
    reg = static_cast<std::uint8_t>(reg << 1);
    if (feedback) reg ^= 0x07;
  }
  return reg;
}

Bits crc8_bits(std::span<const std::uint8_t> bits) { return uint_to_bits(crc8(bits), 8); }

bool crc8_check(std::span<const std::uint8_t> bits_with_crc) {
  if (bits_with_crc.size() < 8) return false;
  return crc8(bits_with_crc) == 0;
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (std::uint8_t byte : bytes)
    for (int k = 7; k >= 0; --k) out.push_back((byte >> k) & 1U);
  return out;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) throw Error(Errc::invalid_argument, "bit count is not a whole number of bytes");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | ((bits[i] & 1U) << (7 - i % 8)));
  return out;
}

Bits uint_to_bits(std::uint64_t value, int width) {
  Bits out(width);
  for (int k = 0; k < width; ++k) out[k] = (value >> (width - 1 - k)) & 1U;
  return out;
}

std::uint64_t bits_to_uint(std::span<const std::uint8_t> bits) {
  std::uint64_t v = 0;
  for (std::uint8_t b : bits) v = (v << 1) | (b & 1U);
  return v;
}

}  // namespace sda::modem
