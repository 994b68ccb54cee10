#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sda {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Errc {
  invalid_argument,
  out_of_range,
  size_mismatch,
  infeasible,
  not_found,
  io,
  protocol,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }
inline double wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

/// Power ratio to dB, clamped to `floor_db` for zero or negative input.
double pow2db(double power, double floor_db = -300.0);
inline double db2pow(double db) { return std::pow(10.0, db / 10.0); }
inline double db2mag(double db) { return std::pow(10.0, db / 20.0); }

/// Wraps to [0, 2pi).
double wrap_2pi(double rad);
/// Wraps to (-pi, pi].
double wrap_pi(double rad);

// Seed mixing for reproducible per-task streams independent of scheduling.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace sda
