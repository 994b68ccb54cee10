#pragma once

#include <cstdint>
#include <random>

#include "sda/common.hpp"
#include "sda/crc.hpp"

namespace sda::test {

// Hand-rolled generators for the property suites.
inline modem::Bits random_bits(std::mt19937_64& rng, std::size_t n) {
  modem::Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1U);
  return b;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline CVector random_gains(std::mt19937_64& rng, int n, double min_mag = 0.2, double max_mag = 2.0) {
  CVector z(n);
  for (int i = 0; i < n; ++i) z(i) = std::polar(uniform(rng, min_mag, max_mag), uniform(rng, -kPi, kPi));
  return z;
}

inline CVector awgn(std::mt19937_64& rng, Eigen::Index n, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
  CVector v(n);
  for (auto& x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

}  // namespace sda::test
