#include "sda/comet.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <set>

#include "sda/beamforming.hpp"

namespace sda::comet {

int walsh(int index, int chip) { return (std::popcount(static_cast<unsigned>(index & chip)) & 1) ? -1 : 1; }

std::vector<int> sidon_indices(int count, int log2_length) {
  const int size = 1 << log2_length;
  std::vector<int> set{0};
  std::set<int> sums;
  for (int v = 1; v < size && static_cast<int>(set.size()) < count; ++v) {
    bool ok = true;
    for (int s : set) {
      if (sums.count(s ^ v)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int s : set) sums.insert(s ^ v);
    set.push_back(v);
  }
  if (static_cast<int>(set.size()) < count) return {};
  return set;
}

namespace {

int pair_count(int n) { return n * (n - 1) / 2; }

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& codes) {
  const int n = static_cast<int>(codes.rows());
  const int len = static_cast<int>(codes.cols());
  Eigen::MatrixXd a(len, n + pair_count(n));
  for (int i = 0; i < n; ++i) a.col(i) = codes.row(i).transpose();
  int col = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a.col(col++) = 2.0 * codes.row(i).cwiseProduct(codes.row(j)).transpose();
  return a;
}

}  // namespace

CodeSet gen_codes(int n_elements, std::optional<int> log2_length) {
  if (n_elements < 1) throw Error(Errc::invalid_argument, "need at least one element");
  int k_lo = 1, k_hi = kMaxLog2Length;
  if (log2_length) {
    if (*log2_length < 1 || *log2_length > kMaxLog2Length)
      throw Error(Errc::out_of_range, "code length exponent outside 1..12");
    k_lo = k_hi = *log2_length;
  }
  for (int k = k_lo; k <= k_hi; ++k) {
    const std::vector<int> idx = sidon_indices(n_elements + 1, k);
    if (idx.empty()) continue;
    CodeSet cs;
    cs.log2_length = k;
    cs.walsh_indices.assign(idx.begin() + 1, idx.end());
    const int len = 1 << k;
    cs.codes.resize(n_elements, len);
    for (int n = 0; n < n_elements; ++n)
      for (int t = 0; t < len; ++t) cs.codes(n, t) = (1 + walsh(cs.walsh_indices[n], t)) / 2;
    const Eigen::MatrixXd a = design_matrix(cs.codes);
    auto qr = std::make_shared<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>(a);
    if (qr->rank() != a.cols()) throw Error(Errc::infeasible, "code products are not separable");
    cs.solver = std::move(qr);
    return cs;
  }
  throw Error(Errc::out_of_range, "element count exceeds the code-basis capacity");
}

RVector simulate_detector(const CVector& gains, const CodeSet& codes, double noise_sigma, std::uint64_t seed) {
  if (gains.size() != codes.n_elements()) throw Error(Errc::size_mismatch, "gain vector does not match code set");
  if (!gains.allFinite()) throw Error(Errc::invalid_argument, "element gains must be finite");
  if (!(noise_sigma >= 0.0)) throw Error(Errc::invalid_argument, "noise sigma must be non-negative");
  const CVector field = codes.codes.cast<cplx>().transpose() * gains;
  RVector p = field.cwiseAbs2();
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, noise_sigma);
    for (auto& v : p) v = std::max(0.0, v + nd(rng));
  }
  return p;
}

int imag_trace_count(int n_elements) {
  int bits = 0;
  while ((1 << bits) < n_elements) ++bits;
  return bits;
}

CVector rotate_group(const CVector& gains, int bit) {
  CVector out = gains;
  for (Eigen::Index n = 0; n < out.size(); ++n)
    if ((n >> bit) & 1) out(n) *= cplx(0.0, 1.0);
  return out;
}

std::vector<RVector> measure(const CVector& gains, const CodeSet& codes, double noise_sigma, std::uint64_t seed) {
  std::vector<RVector> traces;
  traces.push_back(simulate_detector(gains, codes, noise_sigma, derive_seed(seed, 0)));
  for (int b = 0; b < imag_trace_count(codes.n_elements()); ++b)
    traces.push_back(simulate_detector(rotate_group(gains, b), codes, noise_sigma, derive_seed(seed, b + 1)));
  return traces;
}

Eigen::MatrixXcd extract_correlations(const std::vector<RVector>& traces, const CodeSet& codes) {
  const int n = codes.n_elements();
  const int bits = imag_trace_count(n);
  if (static_cast<int>(traces.size()) != 1 + bits)
    throw Error(Errc::size_mismatch, "expected one plain and " + std::to_string(bits) + " rotated traces");
  if (!codes.solver) throw Error(Errc::invalid_argument, "code set has no solver");
  for (const auto& t : traces)
    if (t.size() != codes.length()) throw Error(Errc::size_mismatch, "trace length does not match code length");

  std::vector<RVector> sol;
  for (const auto& t : traces) sol.push_back(codes.solver->solve(t));

  Eigen::MatrixXcd r(n, n);
  for (int i = 0; i < n; ++i) r(i, i) = std::max(0.0, sol[0](i));
  int col = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++col) {
      const double re = sol[0](col);
      // Re{(j^a z_i)(j^b z_j)*} = +Im when only j is rotated, -Im when only i is.
      double im = 0.0;
      int splits = 0;
      for (int b = 0; b < bits; ++b) {
        const bool bi = (i >> b) & 1, bj = (j >> b) & 1;
        if (bi == bj) continue;
        im += bj ? sol[b + 1](col) : -sol[b + 1](col);
        ++splits;
      }
      r(i, j) = cplx(re, im / splits);
      r(j, i) = std::conj(r(i, j));
    }
  }
  return r;
}

ElementSolution solve_elements(const Eigen::MatrixXcd& c) {
  const auto n = c.rows();
  if (n == 0 || c.cols() != n) throw Error(Errc::size_mismatch, "correlation matrix must be square and non-empty");
  ElementSolution out;
  const RVector power = c.diagonal().real().cwiseMax(0.0);
  const double pmax = power.maxCoeff();
  out.gains = CVector::Zero(n);
  if (!(pmax > 0.0)) {
    out.notes.push_back("all elements dead");
    for (Eigen::Index i = 0; i < n; ++i) out.dead_elements.push_back(static_cast<int>(i));
    return out;
  }
  const double dead_level = 1e-12 * pmax;
  std::vector<int> live;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (power(i) <= dead_level)
      out.dead_elements.push_back(static_cast<int>(i));
    else
      live.push_back(static_cast<int>(i));
  }
  Eigen::Index ref = 0;
  if (power(0) <= dead_level) {
    power.maxCoeff(&ref);
    out.notes.push_back("element 0 dead; reference moved to element " + std::to_string(ref));
  }
  out.reference = static_cast<int>(ref);

  RVector theta = RVector::Zero(n);
  for (int i : live) theta(i) = i == ref ? 0.0 : std::arg(c(i, ref));

  // Weighted LS on phase corrections d: d_i - d_j = wrap(arg C_ij - (theta_i - theta_j)), d_ref = 0.
  std::vector<int> unknowns;
  for (int i : live)
    if (i != ref) unknowns.push_back(i);
  if (!unknowns.empty()) {
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < unknowns.size(); ++k) slot[unknowns[k]] = static_cast<int>(k);
    const auto m = static_cast<Eigen::Index>(unknowns.size());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
    RVector rhs = RVector::Zero(m);
    for (std::size_t a = 0; a < live.size(); ++a) {
      for (std::size_t b = a + 1; b < live.size(); ++b) {
        const int i = live[a], j = live[b];
        const double w = std::abs(c(i, j));
        if (w == 0.0) continue;
        const double r = wrap_pi(std::arg(c(i, j)) - (theta(i) - theta(j)));
        const int si = slot[i], sj = slot[j];
        if (si >= 0) {
          lap(si, si) += w;
          rhs(si) += w * r;
        }
        if (sj >= 0) {
          lap(sj, sj) += w;
          rhs(sj) -= w * r;
        }
        if (si >= 0 && sj >= 0) {
          lap(si, sj) -= w;
          lap(sj, si) -= w;
        }
      }
    }
    const RVector d = lap.ldlt().solve(rhs);
    for (Eigen::Index k = 0; k < m; ++k) theta(unknowns[k]) += d(k);
  }
  for (int i : live) out.gains(i) = std::polar(std::sqrt(power(i)), theta(i));
  for (int i : out.dead_elements) out.notes.push_back("element " + std::to_string(i) + " dead");
  return out;
}

cplx InterpolatorModel::response(double amplitude, double phase_rad) const {
  auto [i, q] = beam::weight_to_iq(amplitude, phase_rad);
  if (dac_bits > 0) {
    const beam::IqCode code = beam::quantize_iq(i, q, dac_bits);
    i = beam::dequantize(code.i_code, dac_bits);
    q = beam::dequantize(code.q_code, dac_bits);
  }
  cplx z(i_gain * i, q_gain * q);
  const double mag = std::hypot(i, q);
  if (current_steering != 0.0 && mag > 0.0) z *= std::pow((std::abs(i) + std::abs(q)) / mag, -current_steering);
  return z;
}

std::vector<ElementResponse> sweep_phase_settings(const ArrayModel& model, const std::vector<double>& phases_deg,
                                                  const CodeSet& codes) {
  const auto n = model.element_gains.size();
  if (n < 2) throw Error(Errc::invalid_argument, "phase sweep needs at least two elements");
  if (n != codes.n_elements()) throw Error(Errc::size_mismatch, "array model does not match code set");

  auto run = [&](const std::vector<double>& commanded_rad, std::uint64_t seed) {
    CVector z(n);
    for (Eigen::Index e = 0; e < n; ++e)
      z(e) = model.element_gains(e) * model.interpolator.response(model.amplitude, commanded_rad[e]);
    return solve_elements(extract_correlations(measure(z, codes, model.detector_noise_sigma, seed), codes)).gains;
  };

  // Element 1 relative to element 0, both at the zero setting.
  const CVector base = run(std::vector<double>(static_cast<std::size_t>(n), 0.0), derive_seed(model.seed, 0, 0));
  const double offset_10 = std::arg(base(1)) - std::arg(base(0));

  std::vector<ElementResponse> out;
  for (std::size_t p = 0; p < phases_deg.size(); ++p) {
    const double phi = deg2rad(phases_deg[p]);
    std::vector<double> cmd(static_cast<std::size_t>(n), phi);
    cmd[0] = 0.0;
    const CVector a = run(cmd, derive_seed(model.seed, p + 1, 1));
    cmd[0] = phi;
    cmd[1] = 0.0;
    const CVector b = run(cmd, derive_seed(model.seed, p + 1, 2));
    for (Eigen::Index e = 0; e < n; ++e) {
      ElementResponse r;
      r.element_id = static_cast<int>(e);
      r.commanded_phase_deg = phases_deg[p];
      const cplx z = e == 0 ? b(0) : a(e);
      r.gain_db = pow2db(std::norm(z));
      const double ph = e == 0 ? std::arg(b(0)) - std::arg(b(1)) + offset_10 : std::arg(a(e)) - std::arg(a(0));
      r.phase_deg = rad2deg(wrap_2pi(ph));
      if (r.phase_deg >= 360.0) r.phase_deg = 0.0;
      out.push_back(r);
    }
  }
  return out;
}

double gain_spread_db(const std::vector<ElementResponse>& responses, double commanded_phase_deg) {
  double lo = 1e300, hi = -1e300;
  for (const auto& r : responses) {
    if (r.commanded_phase_deg != commanded_phase_deg) continue;
    lo = std::min(lo, r.gain_db);
    hi = std::max(hi, r.gain_db);
  }
  if (lo > hi) throw Error(Errc::not_found, "no responses at that phase setting");
  return hi - lo;
}

}  // namespace sda::comet
