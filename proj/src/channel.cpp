#include "sda/channel.hpp"

#include <algorithm>
#include <random>

#include <unsupported/Eigen/FFT>

namespace sda::channel {

namespace {

constexpr int kRippleHalfTaps = 16;

double bearing_deg(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  const Eigen::Vector2d d = to - from;
  return rad2deg(std::atan2(d.y(), d.x()));
}

double relative_deg(double bearing, double heading) { return rad2deg(wrap_pi(deg2rad(bearing - heading))); }

}  // namespace

void ChannelConfig::validate() const {
  geometry.validate();
  numerology.validate();
  if (paths.empty()) throw Error(Errc::invalid_argument, "channel needs at least one path");
  if (!tx_pose.position.allFinite() || !rx_pose.position.allFinite() || !std::isfinite(tx_pose.heading_deg) ||
      !std::isfinite(rx_pose.heading_deg))
    throw Error(Errc::invalid_argument, "node poses must be finite");
  if ((tx_pose.position - rx_pose.position).norm() == 0.0)
    throw Error(Errc::invalid_argument, "zero-length path: TX and RX coincide");
  for (const auto& p : paths) {
    if (p.kind != PathKind::reflector) continue;
    if (!(p.reflection_loss_db >= 0.0)) throw Error(Errc::invalid_argument, "reflection loss must be non-negative");
    if (!p.reflector.allFinite()) throw Error(Errc::invalid_argument, "reflector position must be finite");
    const double a = (p.reflector - tx_pose.position).norm();
    const double b = (rx_pose.position - p.reflector).norm();
    const double los = (rx_pose.position - tx_pose.position).norm();
    if (a == 0.0 || b == 0.0 || a + b - los < 1e-9 * los)
      throw Error(Errc::invalid_argument, "reflector is collinear with the link endpoints");
  }
  if (!(ripple_depth_db >= 0.0)) throw Error(Errc::invalid_argument, "ripple depth must be non-negative");
  if (!std::isfinite(cfo_hz)) throw Error(Errc::invalid_argument, "CFO must be finite");
}

PathGeometry resolve_path(const PathSpec& path, const ChannelConfig& config) {
  const Eigen::Vector2d& tx = config.tx_pose.position;
  const Eigen::Vector2d& rx = config.rx_pose.position;
  const Eigen::Vector2d via = path.kind == PathKind::los ? rx : path.reflector;
  const Eigen::Vector2d from = path.kind == PathKind::los ? tx : path.reflector;
  PathGeometry g;
  g.length_m = path.kind == PathKind::los ? (rx - tx).norm() : (via - tx).norm() + (rx - via).norm();
  if (!(g.length_m > 0.0)) throw Error(Errc::invalid_argument, "zero-length path");
  g.departure_deg = relative_deg(bearing_deg(tx, via), config.tx_pose.heading_deg);
  g.arrival_deg = relative_deg(bearing_deg(rx, from), config.rx_pose.heading_deg);
  g.delay_samples = static_cast<int>(std::lround(g.length_m / kSpeedOfLight * config.numerology.sample_rate_hz));
  return g;
}

cplx path_gain(const PathSpec& path, const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config) {
  const PathGeometry g = resolve_path(path, config);
  beam::PatternOptions opt;
  opt.element = config.element;
  const cplx ftx = beam::field_pattern(tx_awv, config.geometry, g.departure_deg, opt);
  const cplx frx = beam::field_pattern(rx_awv, config.geometry, g.arrival_deg, opt);
  const double lambda = wavelength(config.carrier_frequency_hz());
  cplx gain = ftx * frx * (lambda / (4.0 * kPi * g.length_m)) * std::polar(1.0, -kTwoPi * g.length_m / lambda);
  if (path.kind == PathKind::reflector) gain *= db2mag(-path.reflection_loss_db) * (path.invert_phase ? -1.0 : 1.0);
  return gain;
}

CVector ripple_taps(const ChannelConfig& config) {
  if (config.ripple_depth_db == 0.0) return CVector::Constant(1, cplx(1.0, 0.0));
  const int n = config.numerology.idft_size;
  const modem::ToneMap map = modem::make_tone_map(config.numerology);
  std::mt19937_64 rng(derive_seed(config.ripple_seed, 0x7269706c65ULL));
  std::uniform_real_distribution<double> amp(0.5, 1.0), phase(0.0, kTwoPi);
  double a[3], ph[3];
  for (int c = 0; c < 3; ++c) {
    a[c] = amp(rng);
    ph[c] = phase(rng);
  }
  auto shape = [&](int k) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += a[c] * std::cos(kTwoPi * (c + 1) * k / n + ph[c]);
    return s;
  };
  double lo = 1e300, hi = -1e300;
  for (int k : map.active) {
    lo = std::min(lo, shape(k));
    hi = std::max(hi, shape(k));
  }
  const double scale = hi > lo ? config.ripple_depth_db / (hi - lo) : 0.0;
  std::vector<cplx> mag(n), taps(n);
  double active_power = 0.0;
  for (int b = 0; b < n; ++b) {
    const int k = b < n / 2 ? b : b - n;
    mag[b] = db2mag(scale * (shape(k) - 0.5 * (hi + lo)));
  }
  for (int k : map.active) active_power += std::norm(mag[map.bin(k)]);
  const double norm = 1.0 / std::sqrt(active_power / static_cast<double>(map.active.size()));
  for (auto& m : mag) m *= norm;
  Eigen::FFT<double> fft;
  fft.inv(taps, mag);
  CVector out(2 * kRippleHalfTaps + 1);
  for (int m = 0; m < out.size(); ++m) out(m) = taps[(m - kRippleHalfTaps + n) % n];
  return out;
}

namespace {

// Combined impulse response: paths at their integer delays convolved with the ripple FIR.
CVector impulse_response(const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config,
                         int* first_delay = nullptr) {
  const CVector rip = ripple_taps(config);
  std::vector<std::pair<int, cplx>> taps;
  int max_delay = 0, min_delay = 1 << 30;
  for (const auto& p : config.paths) {
    const PathGeometry g = resolve_path(p, config);
    taps.emplace_back(g.delay_samples, path_gain(p, tx_awv, rx_awv, config));
    max_delay = std::max(max_delay, g.delay_samples);
    min_delay = std::min(min_delay, g.delay_samples);
  }
  if (first_delay) *first_delay = min_delay;
  CVector h = CVector::Zero(max_delay + rip.size());
  for (auto [d, g] : taps) h.segment(d, rip.size()) += g * rip;
  return h;
}

}  // namespace

CVector tone_response(const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config) {
  config.validate();
  int first = 0;
  const CVector h = impulse_response(tx_awv, rx_awv, config, &first);
  const modem::ToneMap map = modem::make_tone_map(config.numerology);
  const int n = config.numerology.idft_size;
  CVector out = CVector::Zero(static_cast<Eigen::Index>(map.active.size()));
  for (std::size_t t = 0; t < map.active.size(); ++t)
    for (Eigen::Index l = first; l < h.size(); ++l)
      if (h(l) != cplx(0.0, 0.0))
        out(static_cast<Eigen::Index>(t)) +=
            h(l) * std::polar(1.0, -kTwoPi * map.active[t] * static_cast<double>(l - first) / n);
  return out;
}

double mean_tone_gain(const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config) {
  const CVector h = tone_response(tx_awv, rx_awv, config);
  return h.squaredNorm() / static_cast<double>(h.size());
}

double noise_variance(const ChannelConfig& config) {
  const NoiseSpec& n = config.noise;
  switch (n.mode) {
    case NoiseMode::none: return 0.0;
    case NoiseMode::absolute: return db2pow(n.noise_power_db);
    case NoiseMode::floor: {
      const modem::PpduConfig& c = config.numerology;
      const double tone_power_dbm = n.tx_power_dbm - 10.0 * std::log10(c.n_active_tones);
      return db2pow(n.noise_floor_dbm_hz + 10.0 * std::log10(c.subcarrier_spacing_hz()) - tone_power_dbm);
    }
    case NoiseMode::target_snr:
      throw Error(Errc::invalid_argument, "target-SNR noise must be calibrated before propagation");
  }
  return 0.0;
}

IqBuffer propagate(const IqBuffer& iq, const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config) {
  config.validate();
  iq.validate();
  if (iq.size() == 0) throw Error(Errc::invalid_argument, "IQ buffer is empty");
  const double sigma2 = noise_variance(config);
  const CVector h = impulse_response(tx_awv, rx_awv, config);
  const CVector& x = iq.samples;
  IqBuffer out;
  out.sample_rate_hz = iq.sample_rate_hz;
  out.origin = Origin::channel;
  out.samples = CVector::Zero(x.size() + h.size() - 1);
  for (Eigen::Index l = 0; l < h.size(); ++l)
    if (h(l) != cplx(0.0, 0.0)) out.samples.segment(l, x.size()) += h(l) * x;
  if (config.cfo_hz != 0.0) {
    const double w = kTwoPi * config.cfo_hz / iq.sample_rate_hz;
    for (Eigen::Index n = 0; n < out.samples.size(); ++n)
      out.samples(n) *= std::polar(1.0, w * static_cast<double>(n));
  }
  if (sigma2 > 0.0) {
    std::mt19937_64 rng(config.rng_seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(sigma2 / 2.0));
    for (auto& s : out.samples) s += cplx(nd(rng), nd(rng));
  }
  return out;
}

ChannelConfig calibrate_to_snr(const ChannelConfig& config, const beam::Codebook& tx_codebook,
                               const beam::Codebook& rx_codebook, double target_snr_db) {
  config.validate();
  double best = 0.0;
  for (const auto& t : tx_codebook.entries)
    for (const auto& r : rx_codebook.entries) best = std::max(best, mean_tone_gain(t.awv, r.awv, config));
  if (!(best > 0.0)) throw Error(Errc::infeasible, "scenario has zero gain for every beam pair");
  ChannelConfig out = config;
  out.noise.mode = NoiseMode::absolute;
  out.noise.target_snr_db = target_snr_db;
  out.noise.noise_power_db = pow2db(best) - target_snr_db;
  return out;
}

std::pair<int, int> aligned_indices(const ChannelConfig& config, const beam::Codebook& codebook) {
  const PathGeometry g = resolve_path(PathSpec{}, config);
  auto nearest = [&](double angle) {
    int best = 1;
    for (const auto& e : codebook.entries)
      if (std::abs(e.steering_angle_deg - angle) < std::abs(codebook.at(best).steering_angle_deg - angle))
        best = e.beam_index;
    return best;
  };
  return {nearest(g.departure_deg), nearest(g.arrival_deg)};
}

}  // namespace sda::channel
