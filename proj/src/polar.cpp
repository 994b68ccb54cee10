#include "sda/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sda/common.hpp"

namespace sda::modem {

// Generated by bhattacharyya_info_set(7, 64, 2.0, 0.5); pinned by a unit test.
const std::array<int, kPolarK> kPolarInfoSet = {
    31,  45,  46,  47,  51,  53,  54,  55,  57,  58,  59,  60,  61,  62,  63,  71,
    75,  77,  78,  79,  83,  84,  85,  86,  87,  88,  89,  90,  91,  92,  93,  94,
    95,  97,  98,  99,  100, 101, 102, 103, 104, 105, 106, 107, 108, 109, 110, 111,
    112, 113, 114, 115, 116, 117, 118, 119, 120, 121, 122, 123, 124, 125, 126, 127};

std::vector<int> bhattacharyya_info_set(int log2_n, int k, double design_ebn0_db, double rate) {
  const int n = 1 << log2_n;
  if (k < 0 || k > n) throw Error(Errc::invalid_argument, "information length exceeds block length");
  std::vector<double> z{std::exp(-rate * db2pow(design_ebn0_db))};
  for (int level = 0; level < log2_n; ++level) {
    std::vector<double> next;
    next.reserve(z.size() * 2);
    for (double v : z) {
      next.push_back(2.0 * v - v * v);  // check-node (degraded) channel
      next.push_back(v * v);            // variable-node (upgraded) channel
    }
    z = std::move(next);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (z[a] != z[b]) return z[a] < z[b];
    return a > b;
  });
  std::vector<int> info(order.begin(), order.begin() + k);
  std::sort(info.begin(), info.end());
  return info;
}

const std::array<std::uint8_t, kPolarN>& polar_frozen_mask() {
  static const auto mask = [] {
    std::array<std::uint8_t, kPolarN> m{};
    m.fill(1);
    for (int i : kPolarInfoSet) m[i] = 0;
    return m;
  }();
  return mask;
}

int bit_reverse(int value, int bits) {
  int r = 0;
  for (int k = 0; k < bits; ++k) r |= ((value >> k) & 1) << (bits - 1 - k);
  return r;
}

Bits polar_encode(std::span<const std::uint8_t> message) {
  if (message.size() != static_cast<std::size_t>(kPolarK))
    throw Error(Errc::size_mismatch, "polar message must be 64 bits");
  Bits y(kPolarN, 0);
  for (int j = 0; j < kPolarK; ++j) y[kPolarInfoSet[j]] = message[j] & 1U;
  for (int step = 1; step < kPolarN; step <<= 1)
    for (int block = 0; block < kPolarN; block += 2 * step)
      for (int j = block; j < block + step; ++j) y[j] ^= y[j + step];
  Bits x(kPolarN);
  for (int j = 0; j < kPolarN; ++j) x[j] = y[bit_reverse(j, kPolarLog2N)];
  return x;
}

namespace {

inline double check_node(double a, double b) {
  const double m = std::min(std::abs(a), std::abs(b));
  return ((a < 0) != (b < 0)) ? -m : m;
}

// Decodes the subtree whose channel LLRs are `llr`; writes u decisions and the
// re-encoded partial sums of the subtree.
void sc_decode(std::span<const double> llr, std::span<const std::uint8_t> frozen, std::span<std::uint8_t> u,
               std::span<std::uint8_t> x) {
  const std::size_t n = llr.size();
  if (n == 1) {
    const std::uint8_t bit = frozen[0] ? 0 : (llr[0] < 0.0 ? 1 : 0);
    u[0] = bit;
    x[0] = bit;
    return;
  }
  const std::size_t h = n / 2;
  std::vector<double> child(h);
  std::vector<std::uint8_t> xa(h), xb(h);
  for (std::size_t i = 0; i < h; ++i) child[i] = check_node(llr[i], llr[i + h]);
  sc_decode(child, frozen.first(h), u.first(h), xa);
  for (std::size_t i = 0; i < h; ++i) child[i] = llr[i + h] + (xa[i] ? -llr[i] : llr[i]);
  sc_decode(child, frozen.subspan(h), u.subspan(h), xb);
  for (std::size_t i = 0; i < h; ++i) {
    x[i] = xa[i] ^ xb[i];
    x[i + h] = xb[i];
  }
}

}  // namespace

PolarDecodeResult polar_decode(std::span<const double> llrs) {
  if (llrs.size() != static_cast<std::size_t>(kPolarN))
    throw Error(Errc::size_mismatch, "polar decoder expects 128 LLRs");
  std::vector<double> natural(kPolarN);
  for (int i = 0; i < kPolarN; ++i) natural[i] = llrs[bit_reverse(i, kPolarLog2N)];
  Bits u(kPolarN), x(kPolarN);
  sc_decode(natural, polar_frozen_mask(), u, x);
  PolarDecodeResult r;
  r.message.reserve(kPolarK);
  for (int i : kPolarInfoSet) r.message.push_back(u[i]);
  r.crc_ok = crc8_check(r.message);
  return r;
}

Bits encode_codeword(std::span<const std::uint8_t> info_bits) {
  if (info_bits.size() != static_cast<std::size_t>(kInfoBitsPerCodeword))
    throw Error(Errc::size_mismatch, "codeword carries 56 info bits");
  Bits message(info_bits.begin(), info_bits.end());
  const Bits crc = crc8_bits(info_bits);
  message.insert(message.end(), crc.begin(), crc.end());
  return polar_encode(message);
}

}  // namespace sda::modem
