#pragma once

#include <optional>
#include <vector>

#include "sda/crc.hpp"
#include "sda/iq.hpp"
#include "sda/ofdm.hpp"
#include "sda/qam.hpp"

namespace sda::modem {

inline constexpr std::size_t kMaxPayloadBits = std::size_t{1} << 20;
inline constexpr int kHeaderInfoBits = 56;  // 3 + 24 + 16 + 13, CRC-8 appended by the codeword

struct HeaderRecord {
  Modulation modulation = Modulation::bpsk;
  std::uint32_t payload_bits = 0;
  std::uint32_t pre_pad = 0;
  std::uint32_t post_pad = 0;

  bool operator==(const HeaderRecord&) const = default;
};

Bits header_to_bits(const HeaderRecord& header);
HeaderRecord header_from_bits(std::span<const std::uint8_t> bits);

struct PadResult {
  Bits info_bits;  // pre-pad zeros followed by the payload; multiple of 56
  int pre_pad = 0;
  int post_pad = 0;  // zero coded bits appended after the last codeword
  int n_codewords = 0;
  int n_payload_symbols = 0;
};

PadResult pad_payload(std::span<const std::uint8_t> payload, Modulation m, const PpduConfig& config);
/// Inverse of pad_payload on the recovered info bits.
Bits unpad(std::span<const std::uint8_t> info_bits, const HeaderRecord& header);

/// Codewords and payload symbols implied by a header; throws protocol on inconsistent fields.
std::pair<int, int> frame_dimensions(const HeaderRecord& header, const PpduConfig& config);

struct Frame {
  PpduConfig config;
  HeaderRecord header;
  int n_codewords = 0;
  int n_payload_symbols = 0;
  /// Payload symbol indices preceded by a chest symbol.
  std::vector<int> chest_positions;
  /// Subcarrier numbers of the pilot/tracking tones.
  std::vector<int> pilot_subcarriers;
  Eigen::Index preamble_samples = 0;
  Eigen::Index total_samples = 0;

  /// Sample offset (frame-relative, start of CP) of payload symbol `i`.
  Eigen::Index payload_symbol_offset(int i) const;
  Eigen::Index chest_symbol_offset(int i) const;
  Eigen::Index header_offset() const { return preamble_samples; }
};

/// Layout of a frame carrying `header`.
Frame frame_layout(const HeaderRecord& header, const PpduConfig& config);

/// Time-domain sync + channel-training preamble (two symbols with CP).
const CVector& preamble_waveform(const PpduConfig& config);

struct Ppdu {
  IqBuffer iq;
  Frame frame;
};

Ppdu build_ppdu(std::span<const std::uint8_t> payload, const PpduConfig& config);

}  // namespace sda::modem
