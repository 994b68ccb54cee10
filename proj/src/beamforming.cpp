#include "sda/beamforming.hpp"

#include <algorithm>
#include <cmath>

#include "sda/array_factor.hpp"

namespace sda::beam {

void ArrayGeometry::validate() const {
  if (n_azimuth < 1 || n_elevation < 1)
    throw Error(Errc::invalid_argument, "array geometry needs at least one element per axis");
  if (!(element_spacing > 0.0)) throw Error(Errc::invalid_argument, "element spacing must be positive");
  if (!(carrier_frequency_hz >= kMinCarrierHz && carrier_frequency_hz <= kMaxCarrierHz))
    throw Error(Errc::out_of_range, "carrier frequency outside 24-29.5 GHz");
}

CVector Awv::ideal_weights() const {
  CVector w(size());
  for (int n = 0; n < size(); ++n) w(n) = weights[n].ideal();
  return w;
}

CVector Awv::quantized_weights() const {
  CVector w(size());
  for (int n = 0; n < size(); ++n)
    w(n) = cplx(dequantize(weights[n].i_code, dac_bits), dequantize(weights[n].q_code, dac_bits));
  return w;
}

int Awv::active_elements() const {
  return static_cast<int>(
      std::count_if(weights.begin(), weights.end(), [](const ElementWeight& w) { return w.amplitude > 0.0; }));
}

Taper parse_taper(const std::string& name) {
  if (name == "uniform") return Taper::uniform;
  if (name == "hamming") return Taper::hamming;
  throw Error(Errc::invalid_argument, "unknown taper '" + name + "'");
}

const char* to_string(Taper taper) { return taper == Taper::hamming ? "hamming" : "uniform"; }

std::pair<double, double> weight_to_iq(double amplitude, double phase) {
  return {amplitude * std::cos(phase), amplitude * std::sin(phase)};
}

std::pair<double, double> iq_to_weight(double i, double q) { return {std::hypot(i, q), wrap_2pi(std::atan2(q, i))}; }

namespace {

int quantize_axis(double x, int bits, bool& saturated) {
  const int max_code = (1 << (bits - 1)) - 1;
  const int min_code = -(1 << (bits - 1));
  if (std::abs(x) > 1.0) saturated = true;
  const double scaled = x / lsb(bits);
  // Decision boundaries sit on integer multiples of the LSB; ties go away from zero.
  const double k = scaled >= 0.0 ? std::floor(scaled) : -std::floor(-scaled) - 1.0;
  return static_cast<int>(std::clamp(k, static_cast<double>(min_code), static_cast<double>(max_code)));
}

}  // namespace

IqCode quantize_iq(double i, double q, int bits) {
  if (bits < 2 || bits > 12) throw Error(Errc::out_of_range, "DAC bit width must be within 2..12");
  IqCode code;
  code.i_code = quantize_axis(i, bits, code.saturated);
  code.q_code = quantize_axis(q, bits, code.saturated);
  return code;
}

double dequantize(int code, int bits) { return (code + 0.5) * lsb(bits); }

Awv make_awv(const std::vector<std::pair<double, double>>& amplitude_phase, const ArrayGeometry& geometry,
             int dac_bits) {
  geometry.validate();
  if (static_cast<int>(amplitude_phase.size()) != geometry.size())
    throw Error(Errc::size_mismatch, "AWV length does not match array size");
  Awv awv;
  awv.dac_bits = dac_bits;
  awv.weights.reserve(amplitude_phase.size());
  bool any_active = false;
  for (auto [amplitude, phase] : amplitude_phase) {
    if (!(amplitude >= 0.0)) throw Error(Errc::invalid_argument, "element amplitude must be non-negative");
    ElementWeight w;
    w.amplitude = amplitude;
    w.phase = wrap_2pi(phase);
    auto [i, q] = weight_to_iq(w.amplitude, w.phase);
    auto code = quantize_iq(i, q, dac_bits);
    w.i_code = code.i_code;
    w.q_code = code.q_code;
    any_active = any_active || amplitude > 0.0;
    awv.weights.push_back(w);
  }
  if (!any_active) throw Error(Errc::invalid_argument, "AWV needs at least one nonzero amplitude");
  return awv;
}

Awv make_steering_awv(double angle_deg, const ArrayGeometry& geometry, Taper taper, int dac_bits) {
  geometry.validate();
  if (!(std::abs(angle_deg) <= kMaxSynthesisAngleDeg))
    throw Error(Errc::out_of_range, "steering angle outside +-60 degrees");
  const double step = kTwoPi * geometry.element_spacing * std::sin(deg2rad(angle_deg));
  const int n_az = geometry.n_azimuth;
  std::vector<std::pair<double, double>> ap;
  ap.reserve(geometry.size());
  for (int row = 0; row < geometry.n_elevation; ++row) {
    for (int col = 0; col < n_az; ++col) {
      double amplitude = 1.0;
      if (taper == Taper::hamming && n_az > 1)
        amplitude = 0.54 - 0.46 * std::cos(kTwoPi * col / static_cast<double>(n_az - 1));
      ap.emplace_back(amplitude, step * col);
    }
  }
  return make_awv(ap, geometry, dac_bits);
}

cplx array_factor(const Awv& awv, const ArrayGeometry& geometry, double angle_deg) {
  if (awv.size() != geometry.size()) throw Error(Errc::size_mismatch, "AWV length does not match array size");
  return sda::beam::array_factor(awv.ideal_weights(), geometry.n_azimuth, geometry.element_spacing,
                                 deg2rad(angle_deg));
}

ElementModel parse_element_model(const std::string& name) {
  if (name == "isotropic") return ElementModel::isotropic;
  if (name == "cosine") return ElementModel::cosine;
  throw Error(Errc::invalid_argument, "unknown element model '" + name + "'");
}

const char* to_string(ElementModel model) { return model == ElementModel::cosine ? "cosine" : "isotropic"; }

double element_field(ElementModel model, double angle_deg) {
  if (model == ElementModel::isotropic) return 1.0;
  return std::max(0.0, std::cos(deg2rad(angle_deg)));
}

double anchored_element_gain_dbi(const ArrayGeometry& geometry) {
  return kAnchorPeakGainDbi - 20.0 * std::log10(static_cast<double>(geometry.size()));
}

cplx field_pattern(const Awv& awv, const ArrayGeometry& geometry, double angle_deg, const PatternOptions& options) {
  if (awv.size() != geometry.size()) throw Error(Errc::size_mismatch, "AWV length does not match array size");
  const CVector w = options.use_dac_codes ? awv.quantized_weights() : awv.ideal_weights();
  const double g_el = options.element_gain_dbi.value_or(anchored_element_gain_dbi(geometry));
  const cplx af = sda::beam::array_factor(w, geometry.n_azimuth, geometry.element_spacing, deg2rad(angle_deg));
  return af * element_field(options.element, angle_deg) * db2mag(g_el);
}

Pattern compute_pattern(const Awv& awv, const ArrayGeometry& geometry, const RVector& grid_deg,
                        const PatternOptions& options) {
  geometry.validate();
  if (grid_deg.size() == 0) throw Error(Errc::invalid_argument, "pattern grid is empty");
  for (Eigen::Index i = 0; i < grid_deg.size(); ++i) {
    if (!(grid_deg(i) >= -90.0 && grid_deg(i) <= 90.0))
      throw Error(Errc::out_of_range, "pattern grid must lie within [-90, 90] degrees");
    if (i > 0 && !(grid_deg(i) > grid_deg(i - 1)))
      throw Error(Errc::invalid_argument, "pattern grid must be strictly increasing");
  }
  Pattern p;
  p.angles_deg = grid_deg;
  p.reference = options.reference;
  p.gains_db.resize(grid_deg.size());
  for (Eigen::Index i = 0; i < grid_deg.size(); ++i)
    p.gains_db(i) = pow2db(std::norm(field_pattern(awv, geometry, grid_deg(i), options)), -1000.0);
  if (options.reference == PatternReference::normalized) p.gains_db.array() -= p.gains_db.maxCoeff();
  p.gains_db = p.gains_db.cwiseMax(kPatternFloorDb);
  return p;
}

RVector uniform_grid(double start_deg, double stop_deg, double step_deg) {
  if (!(step_deg > 0.0) || stop_deg < start_deg) throw Error(Errc::invalid_argument, "bad grid specification");
  const auto n = static_cast<Eigen::Index>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  RVector g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = start_deg + step_deg * static_cast<double>(i);
  return g;
}

PatternMetrics pattern_metrics(const Pattern& pattern) {
  const RVector& g = pattern.gains_db;
  const RVector& a = pattern.angles_deg;
  const Eigen::Index n = g.size();
  if (n < 2) throw Error(Errc::invalid_argument, "pattern needs at least two samples");

  Eigen::Index peak = 0;
  const double peak_db = g.maxCoeff(&peak);
  // Samples tying the peak must be contiguous with it.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(g(i) - peak_db) > 1e-9) continue;
    const Eigen::Index lo = std::min(i, peak), hi = std::max(i, peak);
    if ((g.segment(lo, hi - lo + 1).array() < peak_db - 1e-9).any())
      throw Error(Errc::invalid_argument, "pattern has no unique global peak");
  }

  const double half = peak_db - 3.0103;
  auto crossing = [&](int dir) -> double {
    for (Eigen::Index i = peak + dir; i >= 0 && i < n; i += dir) {
      if (g(i) < half) {
        const Eigen::Index j = i - dir;  // last sample above the half-power level
        const double t = (g(j) - half) / (g(j) - g(i));
        return a(j) + t * (a(i) - a(j));
      }
    }
    throw Error(Errc::not_found, "no -3 dB crossing inside the pattern grid");
  };
  PatternMetrics m;
  m.peak_angle_deg = a(peak);
  m.peak_gain_db = peak_db;
  m.hpbw_deg = crossing(+1) - crossing(-1);

  // Main lobe extends down to the first local minimum on each side.
  Eigen::Index left = peak, right = peak;
  while (left > 0 && g(left - 1) <= g(left)) --left;
  while (right < n - 1 && g(right + 1) <= g(right)) ++right;

  std::optional<Eigen::Index> sidelobe;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (i >= left && i <= right) continue;
    if (g(i) >= g(i - 1) && g(i) >= g(i + 1) && (!sidelobe || g(i) > g(*sidelobe))) sidelobe = i;
  }
  if (sidelobe) {
    m.first_sidelobe_db = g(*sidelobe) - peak_db;
    const Eigen::Index null_index = *sidelobe < peak ? left : right;
    m.peak_to_null_db = peak_db - g(null_index);
  }
  return m;
}

const CodebookEntry& Codebook::at(int beam_index) const {
  if (beam_index < 1 || beam_index > size())
    throw Error(Errc::out_of_range, "index out of range 1.." + std::to_string(size()));
  return entries[beam_index - 1];
}

Codebook build_codebook(const ArrayGeometry& geometry, Taper taper, int dac_bits) {
  Codebook cb;
  cb.taper = taper;
  cb.entries.reserve(kCodebookSize);
  for (int k = 1; k <= kCodebookSize; ++k) {
    CodebookEntry e;
    e.beam_index = k;
    e.steering_angle_deg = beam_angle_deg(k);
    e.awv = make_steering_awv(e.steering_angle_deg, geometry, taper, dac_bits);
    e.awv.label = k;
    cb.entries.push_back(std::move(e));
  }
  return cb;
}

}  // namespace sda::beam
