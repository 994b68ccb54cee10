#include "sda/common.hpp"

#include <cmath>
#include <cstdio>

namespace sda {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::out_of_range: return "out_of_range";
    case Errc::size_mismatch: return "size_mismatch";
    case Errc::infeasible: return "infeasible";
    case Errc::not_found: return "not_found";
    case Errc::io: return "io";
    case Errc::protocol: return "protocol";
  }
  return "unknown";
}

double pow2db(double power, double floor_db) {
  if (!(power > 0.0)) return floor_db;
  return std::max(10.0 * std::log10(power), floor_db);
}

double wrap_2pi(double rad) {
  double r = std::fmod(rad, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_pi(double rad) {
  double r = wrap_2pi(rad);
  return r > kPi ? r - kTwoPi : r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ (b * 0x100000001b3ULL));
  s = splitmix64(s ^ (c * 0xff51afd7ed558ccdULL));
  return s;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace sda
