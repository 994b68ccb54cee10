#include "sda/qam.hpp"

#include <array>
#include <limits>

namespace sda::modem {

int modulation_order(Modulation m) { return 1 << bits_per_symbol(m); }

int bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::bpsk: return 1;
    case Modulation::qam4: return 2;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 6;
  }
  return 1;
}

Modulation modulation_from_order(int order) {
  switch (order) {
    case 2: return Modulation::bpsk;
    case 4: return Modulation::qam4;
    case 16: return Modulation::qam16;
    case 64: return Modulation::qam64;
    default: throw Error(Errc::invalid_argument, "unsupported modulation order " + std::to_string(order));
  }
}

Modulation modulation_from_id(int id) {
  if (id < 0 || id > 3) throw Error(Errc::invalid_argument, "unknown modulation id " + std::to_string(id));
  return static_cast<Modulation>(id);
}

Modulation parse_modulation(const std::string& name) {
  if (name == "bpsk") return Modulation::bpsk;
  if (name == "4qam" || name == "qpsk" || name == "qam4") return Modulation::qam4;
  if (name == "16qam" || name == "qam16") return Modulation::qam16;
  if (name == "64qam" || name == "qam64") return Modulation::qam64;
  throw Error(Errc::invalid_argument, "unknown modulation '" + name + "'");
}

const char* to_string(Modulation m) {
  switch (m) {
    case Modulation::bpsk: return "bpsk";
    case Modulation::qam4: return "4qam";
    case Modulation::qam16: return "16qam";
    case Modulation::qam64: return "64qam";
  }
  return "?";
}

namespace {

// Gray-labelled PAM level; label 0 sits at the positive extreme.
double pam_level(unsigned label, int bits) {
  unsigned binary = label;
  for (unsigned shift = label >> 1; shift; shift >>= 1) binary ^= shift;
  const int levels = 1 << bits;
  return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(binary);
}

CVector build_constellation(Modulation m) {
  const int b = bits_per_symbol(m);
  const int order = 1 << b;
  CVector points(order);
  if (m == Modulation::bpsk) {
    points << cplx(1.0, 0.0), cplx(-1.0, 0.0);
    return points;
  }
  const int per_axis = b / 2;
  const double levels = static_cast<double>(1 << per_axis);
  const double scale = 1.0 / std::sqrt(2.0 * (levels * levels - 1.0) / 3.0);
  for (int label = 0; label < order; ++label) {
    const unsigned i_label = static_cast<unsigned>(label) >> per_axis;
    const unsigned q_label = static_cast<unsigned>(label) & ((1U << per_axis) - 1U);
    points(label) = cplx(pam_level(i_label, per_axis), pam_level(q_label, per_axis)) * scale;
  }
  return points;
}

}  // namespace

const CVector& constellation(Modulation m) {
  static const std::array<CVector, 4> tables = {build_constellation(Modulation::bpsk),
                                                build_constellation(Modulation::qam4),
                                                build_constellation(Modulation::qam16),
                                                build_constellation(Modulation::qam64)};
  return tables[static_cast<int>(m)];
}

CVector map_symbols(std::span<const std::uint8_t> bits, Modulation m) {
  const int b = bits_per_symbol(m);
  if (bits.size() % b != 0) throw Error(Errc::invalid_argument, "bit count not divisible by bits per symbol");
  const CVector& points = constellation(m);
  CVector out(static_cast<Eigen::Index>(bits.size() / b));
  for (Eigen::Index s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (int k = 0; k < b; ++k) label = (label << 1) | (bits[s * b + k] & 1U);
    out(s) = points(label);
  }
  return out;
}

std::vector<double> demap_llr(const CVector& symbols, Modulation m, const RVector& noise_var) {
  if (noise_var.size() != symbols.size()) throw Error(Errc::size_mismatch, "noise variance per symbol required");
  const int b = bits_per_symbol(m);
  const CVector& points = constellation(m);
  std::vector<double> llr(static_cast<std::size_t>(symbols.size()) * b);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < symbols.size(); ++s) {
    std::array<double, 6> d0, d1;
    d0.fill(inf);
    d1.fill(inf);
    for (Eigen::Index p = 0; p < points.size(); ++p) {
      const double d = std::norm(symbols(s) - points(p));
      for (int k = 0; k < b; ++k) {
        const bool one = (p >> (b - 1 - k)) & 1;
        auto& slot = one ? d1[k] : d0[k];
        if (d < slot) slot = d;
      }
    }
    const double nv = std::max(noise_var(s), 1e-30);
    for (int k = 0; k < b; ++k) llr[s * b + k] = (d1[k] - d0[k]) / nv;
  }
  return llr;
}

std::vector<double> demap_llr(const CVector& symbols, Modulation m, double noise_var) {
  return demap_llr(symbols, m, RVector::Constant(symbols.size(), noise_var));
}

Bits hard_demap(const CVector& symbols, Modulation m) {
  const auto llr = demap_llr(symbols, m, 1.0);
  Bits bits(llr.size());
  for (std::size_t i = 0; i < llr.size(); ++i) bits[i] = llr[i] < 0.0 ? 1 : 0;
  return bits;
}

cplx slice(cplx symbol, Modulation m) {
  const CVector& points = constellation(m);
  Eigen::Index best = 0;
  (points.array() - symbol).abs2().minCoeff(&best);
  return points(best);
}

}  // namespace sda::modem
