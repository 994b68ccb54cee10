#include "sda/receiver.hpp"

#include <algorithm>
#include <vector>

#include "sda/polar.hpp"

namespace sda::modem {

namespace {

struct Autocorr {
  cplx p;
  double e1, e2;
};

Autocorr autocorr_at(const CVector& r, Eigen::Index d, int lag) {
  const auto a = r.segment(d, lag);
  const auto b = r.segment(d + lag, lag);
  return {a.dot(b), a.squaredNorm(), b.squaredNorm()};
}

}  // namespace

void correct_cfo(CVector& samples, double cfo_hz, double sample_rate_hz) {
  if (cfo_hz == 0.0) return;
  const double w = -kTwoPi * cfo_hz / sample_rate_hz;
  for (Eigen::Index n = 0; n < samples.size(); ++n) samples(n) *= std::polar(1.0, w * static_cast<double>(n));
}

SyncResult synchronize(const IqBuffer& iq, const PpduConfig& config, const SyncOptions& options) {
  config.validate();
  const CVector& r = iq.samples;
  const int lag = config.idft_size / 2;
  const Eigen::Index preamble_len = 2 * config.symbol_len();
  if (r.size() < preamble_len) throw Error(Errc::not_found, "buffer shorter than the preamble");
  if (!r.allFinite()) throw Error(Errc::invalid_argument, "IQ buffer contains non-finite samples");

  // Sliding autocorrelation, recomputed exactly every 1024 steps to bound drift.
  const Eigen::Index n_pos = r.size() - 2 * lag + 1;
  std::vector<double> rho(static_cast<std::size_t>(n_pos));
  std::vector<cplx> pval(static_cast<std::size_t>(n_pos));
  std::vector<double> e1v(static_cast<std::size_t>(n_pos)), e2v(static_cast<std::size_t>(n_pos));
  Autocorr acc{};
  for (Eigen::Index d = 0; d < n_pos; ++d) {
    if (d % 1024 == 0) {
      acc = autocorr_at(r, d, lag);
    } else {
      const cplx x0 = r(d - 1), x1 = r(d - 1 + lag), x2 = r(d - 1 + 2 * lag);
      acc.p += std::conj(x1) * x2 - std::conj(x0) * x1;
      acc.e1 += std::norm(x1) - std::norm(x0);
      acc.e2 += std::norm(x2) - std::norm(x1);
    }
    pval[d] = acc.p;
    e1v[d] = std::max(acc.e1, 0.0);
    e2v[d] = std::max(acc.e2, 0.0);
  }
  const double e_max = *std::max_element(e1v.begin(), e1v.end());
  const double gate = 1e-9 * e_max;
  for (Eigen::Index d = 0; d < n_pos; ++d) {
    const double e1 = e1v[d], e2 = e2v[d];
    rho[d] = (e1 > gate && e2 > gate) ? std::min(1.0, std::abs(pval[d]) / std::sqrt(e1 * e2)) : 0.0;
  }

  Eigen::Index first = -1;
  for (Eigen::Index d = 0; d < n_pos; ++d) {
    if (rho[d] >= options.threshold) {
      first = d;
      break;
    }
  }
  if (first < 0) throw Error(Errc::not_found, "no synchronization plateau above threshold");
  Eigen::Index coarse = first;
  for (Eigen::Index d = first; d < std::min(n_pos, first + config.symbol_len()); ++d)
    if (rho[d] > rho[coarse]) coarse = d;

  SyncResult out;
  out.metric = rho[coarse];
  out.cfo_hz = std::arg(pval[coarse]) * iq.sample_rate_hz / (kTwoPi * lag);
  out.timing_offset = coarse;

  if (options.fine_timing) {
    const CVector& pre = preamble_waveform(config);
    const Eigen::Index lo = std::max<Eigen::Index>(0, coarse - 96);
    const Eigen::Index hi = std::min<Eigen::Index>(r.size() - preamble_len, coarse + 96);
    if (hi >= lo) {
      CVector seg = r.segment(lo, hi - lo + preamble_len);
      correct_cfo(seg, out.cfo_hz, iq.sample_rate_hz);
      double best = -1.0;
      for (Eigen::Index t = lo; t <= hi; ++t) {
        const double c = std::abs(pre.dot(seg.segment(t - lo, preamble_len)));
        if (c > best) {
          best = c;
          out.timing_offset = t;
        }
      }
    }
    // Re-estimate CFO from the interior of the repeated part, clear of the frame edge.
    const Eigen::Index d = out.timing_offset + config.cp_len / 2;
    if (d + 2 * lag <= r.size()) {
      const cplx p = autocorr_at(r, d, lag).p;
      if (std::abs(p) > 0.0) out.cfo_hz = std::arg(p) * iq.sample_rate_hz / (kTwoPi * lag);
    }
  }
  return out;
}

CVector estimate_channel(const CVector& received_active, const CVector& known_active) {
  if (received_active.size() != known_active.size())
    throw Error(Errc::size_mismatch, "received and known symbols differ in length");
  if ((known_active.array().abs() == 0.0).any()) throw Error(Errc::invalid_argument, "known symbol has empty tones");
  return received_active.cwiseQuotient(known_active);
}

CVector refine_channel(const CVector& h_ls, const ToneMap& map, int max_delay_taps, double noise_var) {
  const auto k = static_cast<Eigen::Index>(map.active.size());
  if (h_ls.size() != k) throw Error(Errc::size_mismatch, "channel estimate length mismatch");
  constexpr int kMaxAtoms = 32;
  constexpr double kStopFactor = 12.0;
  Eigen::MatrixXcd dict(k, max_delay_taps);
  const double norm = 1.0 / std::sqrt(static_cast<double>(k));
  for (Eigen::Index t = 0; t < k; ++t)
    for (int l = 0; l < max_delay_taps; ++l)
      dict(t, l) = std::polar(norm, -kTwoPi * map.active[t] * l / static_cast<double>(map.idft_size));

  std::vector<int> chosen;
  CVector residual = h_ls;
  CVector fit = CVector::Zero(k);
  while (true) {
    const CVector corr = dict.adjoint() * residual;
    Eigen::Index best = 0;
    const double peak = corr.cwiseAbs2().maxCoeff(&best);
    if (peak < kStopFactor * noise_var || peak == 0.0) break;
    if (static_cast<int>(chosen.size()) == kMaxAtoms) return h_ls;
    chosen.push_back(static_cast<int>(best));
    Eigen::MatrixXcd sub(k, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t i = 0; i < chosen.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = dict.col(chosen[i]);
    const CVector coef = sub.colPivHouseholderQr().solve(h_ls);
    fit = sub * coef;
    residual = h_ls - fit;
  }
  return chosen.empty() ? h_ls : fit;
}

double track_cpe(const CVector& received_active, const CVector& channel, const ToneMap& map, const Sequences& seq) {
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < map.pilot.size(); ++i) {
    const int t = map.pilot[i];
    acc += received_active(t) * std::conj(channel(t) * seq.pilot_values(static_cast<Eigen::Index>(i)));
  }
  return std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;
}

const char* to_string(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::ok: return "ok";
    case DecodeStatus::sync_not_found: return "sync_not_found";
    case DecodeStatus::header_crc_fail: return "header_crc_fail";
    case DecodeStatus::truncated: return "truncated";
  }
  return "unknown";
}

namespace {

struct Equalized {
  CVector z;
  RVector noise_var;
  double cpe = 0.0;
};

Equalized equalize(const CVector& y, const CVector& h, const ToneMap& map, const Sequences& seq, double noise_var) {
  Equalized e;
  e.cpe = track_cpe(y, h, map, seq);
  const cplx rot = std::polar(1.0, -e.cpe);
  const auto n = static_cast<Eigen::Index>(map.data.size());
  e.z.resize(n);
  e.noise_var.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = map.data[i];
    const double g = std::max(std::norm(h(t)), 1e-300);
    e.z(i) = y(t) / h(t) * rot;
    e.noise_var(i) = noise_var / g;
  }
  return e;
}

}  // namespace

DecodeReport demod_decode(const IqBuffer& iq, const PpduConfig& config, const RxOptions& options) {
  config.validate();
  if (options.fft_backoff < 0 || options.fft_backoff > config.cp_len)
    throw Error(Errc::invalid_argument, "FFT backoff must lie within the cyclic prefix");
  iq.validate();
  DecodeReport rep;
  SyncResult sync;
  try {
    sync = synchronize(iq, config, options.sync);
  } catch (const Error& e) {
    if (e.code() != Errc::not_found) throw;
    rep.status = DecodeStatus::sync_not_found;
    rep.warnings.push_back(e.what());
    return rep;
  }
  rep.timing_offset_samples = sync.timing_offset;
  rep.cfo_hz_estimate = sync.cfo_hz;
  rep.sync_metric = sync.metric;

  const ToneMap map = make_tone_map(config);
  const Sequences& seq = sequences(config);
  const int sym = config.symbol_len();
  const int lag = config.idft_size / 2;
  const Eigen::Index t0 = sync.timing_offset;
  CVector r = iq.samples;
  correct_cfo(r, sync.cfo_hz, iq.sample_rate_hz);

  auto fft_at = [&](Eigen::Index frame_offset) -> std::optional<CVector> {
    const Eigen::Index start = t0 + frame_offset + config.cp_len - options.fft_backoff;
    if (start + config.idft_size > r.size()) return std::nullopt;
    return ofdm_demodulate(r.segment(start, config.idft_size), map);
  };

  const auto y_ltf = fft_at(sym);
  const auto y_hdr = fft_at(2 * sym);
  if (!y_ltf || !y_hdr) {
    rep.status = DecodeStatus::truncated;
    return rep;
  }
  const CVector h_ls = estimate_channel(*y_ltf, seq.ltf_active);
  const double ltf_power = y_ltf->squaredNorm();

  // Noise: phase-aligned difference of the two sync halves, pooled with the
  // training symbol against the first chest symbol (identical transmissions).
  double noise_sum = 0.0;
  double noise_count = 0.0;
  {
    const Eigen::Index d = t0 + config.cp_len / 2;
    if (d + 2 * lag <= r.size()) {
      const CVector a = r.segment(d, lag), b = r.segment(d + lag, lag);
      const cplx rot = std::polar(1.0, std::arg(b.dot(a)));
      noise_sum += (a - rot * b).squaredNorm() / 2.0;
      noise_count += lag;
    }
  }
  const auto y_chest0 = fft_at(3 * sym);
  const bool chest0_present = y_chest0 && y_chest0->squaredNorm() > 1e-3 * ltf_power;
  if (chest0_present) {
    const cplx rot = std::polar(1.0, std::arg(y_chest0->dot(*y_ltf)));
    noise_sum += (*y_ltf - rot * *y_chest0).squaredNorm() / 2.0;
    noise_count += static_cast<double>(y_ltf->size());
  }
  const double mean_h2 = h_ls.squaredNorm() / static_cast<double>(h_ls.size());
  double noise_var = noise_count > 0.0 ? noise_sum / noise_count : 0.0;
  noise_var = std::max(noise_var, 1e-12 * mean_h2);
  rep.noise_var = noise_var;
  rep.snr_db = pow2db(std::max(mean_h2 - noise_var, 1e-3 * noise_var) / noise_var);

  auto refine = [&](const CVector& h) {
    return options.refine_channel ? refine_channel(h, map, config.cp_len, noise_var) : h;
  };
  CVector h = refine(h_ls);
  rep.channel_estimate = h;

  const Equalized hdr = equalize(*y_hdr, h, map, seq, noise_var);
  const auto hdr_llr = demap_llr(hdr.z, Modulation::bpsk, hdr.noise_var);
  const PolarDecodeResult hdr_dec = polar_decode(hdr_llr);
  if (!hdr_dec.crc_ok) {
    rep.status = DecodeStatus::header_crc_fail;
    return rep;
  }
  Frame frame;
  try {
    rep.header = header_from_bits(std::span(hdr_dec.message).first(kHeaderInfoBits));
    frame = frame_layout(*rep.header, config);
  } catch (const Error& e) {
    rep.header.reset();
    rep.status = DecodeStatus::header_crc_fail;
    rep.warnings.push_back(std::string("inconsistent header: ") + e.what());
    return rep;
  }
  const Modulation mod = rep.header->modulation;
  rep.codewords_total = frame.n_codewords;
  if (t0 + frame.total_samples - (config.cp_len - options.fft_backoff) > r.size()) {
    rep.status = DecodeStatus::truncated;
    return rep;
  }

  const auto n_data = static_cast<Eigen::Index>(map.data.size());
  rep.equalized.resize(n_data * frame.n_payload_symbols);
  RVector sym_noise(rep.equalized.size());
  rep.cpe_rad.reserve(static_cast<std::size_t>(frame.n_payload_symbols));
  for (int i = 0; i < frame.n_payload_symbols; ++i) {
    if (i % config.chest_interval_symbols == 0) {
      const auto yc = i == 0 ? y_chest0 : fft_at(frame.chest_symbol_offset(i));
      if (yc && yc->squaredNorm() > 1e-3 * ltf_power) {
        h = refine(estimate_channel(*yc, seq.ltf_active));
      } else {
        rep.warnings.push_back("stale channel estimate: chest symbol before payload symbol " + std::to_string(i) +
                               " missing");
      }
    }
    const Equalized e = equalize(*fft_at(frame.payload_symbol_offset(i)), h, map, seq, noise_var);
    rep.equalized.segment(i * n_data, n_data) = e.z;
    sym_noise.segment(i * n_data, n_data) = e.noise_var;
    rep.cpe_rad.push_back(e.cpe);
  }
  rep.channel_estimate = h;

  double err = 0.0;
  for (Eigen::Index i = 0; i < rep.equalized.size(); ++i) err += std::norm(rep.equalized(i) - slice(rep.equalized(i), mod));
  if (rep.equalized.size() > 0) rep.evm_db = pow2db(err / static_cast<double>(rep.equalized.size()));

  const auto llr = demap_llr(rep.equalized, mod, sym_noise);
  Bits info;
  info.reserve(static_cast<std::size_t>(frame.n_codewords) * kInfoBitsPerCodeword);
  for (int c = 0; c < frame.n_codewords; ++c) {
    const auto dec = polar_decode(std::span(llr).subspan(static_cast<std::size_t>(c) * kPolarN, kPolarN));
    if (dec.crc_ok) ++rep.codewords_crc_ok;
    info.insert(info.end(), dec.message.begin(), dec.message.begin() + kInfoBitsPerCodeword);
  }
  rep.payload = unpad(info, *rep.header);
  rep.status = DecodeStatus::ok;
  return rep;
}

}  // namespace sda::modem
