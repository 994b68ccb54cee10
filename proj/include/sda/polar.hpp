#pragma once

#include <array>
#include <span>
#include <vector>

#include "sda/crc.hpp"

namespace sda::modem {

inline constexpr int kPolarLog2N = 7;
inline constexpr int kPolarN = 1 << kPolarLog2N;   // coded bits per codeword
inline constexpr int kPolarK = kPolarN / 2;        // message bits incl. CRC
inline constexpr int kCrcLen = 8;
inline constexpr int kInfoBitsPerCodeword = kPolarK - kCrcLen;
inline constexpr double kPolarDesignEbN0Db = 2.0;

/// Information positions (natural u-index order) of the rate-1/2 N=128 code,
/// ranked by Bhattacharyya parameter at the design Eb/N0.
extern const std::array<int, kPolarK> kPolarInfoSet;

/// Bhattacharyya ranking for a BI-AWGN channel; returns the k most reliable
/// u-indices, sorted ascending.
std::vector<int> bhattacharyya_info_set(int log2_n, int k, double design_ebn0_db, double rate);

/// 1 where the u-index is frozen.
const std::array<std::uint8_t, kPolarN>& polar_frozen_mask();

/// x = u B_N F^{(x)n}, message bits placed on the information set in ascending order.
Bits polar_encode(std::span<const std::uint8_t> message);

struct PolarDecodeResult {
  Bits message;
  bool crc_ok = false;
};

/// Successive-cancellation (min-sum) decoding of channel LLRs (positive favors 0).
PolarDecodeResult polar_decode(std::span<const double> llrs);

/// Appends CRC-8 to 56 info bits and encodes.
Bits encode_codeword(std::span<const std::uint8_t> info_bits);

int bit_reverse(int value, int bits);

}  // namespace sda::modem
