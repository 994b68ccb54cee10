#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sda/common.hpp"

namespace sda {

enum class Origin : std::uint8_t { tx = 0, rx = 1, channel = 2 };

const char* to_string(Origin origin);

/// Complex baseband samples at a declared rate.
struct IqBuffer {
  CVector samples;
  double sample_rate_hz = 1.536e9;
  Origin origin = Origin::tx;

  Eigen::Index size() const { return samples.size(); }
  void validate() const;
};

namespace iqfile {

inline constexpr char kMagic[6] = {'S', 'D', 'A', 'I', 'Q', '\0'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;

/// 16-byte header (magic, version u8, flags u8, sample rate u64 LE) followed by
/// interleaved little-endian float32 I/Q. Flags bits 0-1 carry the origin tag.
std::string encode(const IqBuffer& buffer);
IqBuffer decode(std::string_view bytes);

void write(const std::filesystem::path& path, const IqBuffer& buffer);
IqBuffer read(const std::filesystem::path& path);

}  // namespace iqfile
}  // namespace sda
