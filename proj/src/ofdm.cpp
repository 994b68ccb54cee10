#include "sda/ofdm.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include <unsupported/Eigen/FFT>

namespace sda::modem {

void PpduConfig::validate() const {
  if (idft_size <= 0 || (idft_size & (idft_size - 1)) != 0)
    throw Error(Errc::invalid_argument, "IDFT size must be a power of two");
  if (cp_len < 0 || cp_len > idft_size) throw Error(Errc::invalid_argument, "bad cyclic prefix length");
  if (n_active_tones + n_dc_null > idft_size)
    throw Error(Errc::invalid_argument, "active plus DC tones exceed the IDFT size");
  if (n_data_tones + n_pilot_tones != n_active_tones)
    throw Error(Errc::invalid_argument, "data plus pilot tones must equal active tones");
  if (n_active_tones != 3 * n_pilot_tones || n_active_tones % 2 != 0 || n_dc_null % 2 != 0)
    throw Error(Errc::invalid_argument, "tone plan needs pilots on every third of an even number of active tones");
  if (chest_interval_symbols < 1) throw Error(Errc::invalid_argument, "chest interval must be at least 1");
  if (codeword_len != 128 || crc_len != 8 || code_rate != 0.5)
    throw Error(Errc::invalid_argument, "only the rate-1/2 N=128 polar code with CRC-8 is supported");
  if (n_data_tones != codeword_len)
    throw Error(Errc::invalid_argument, "header symbol requires one codeword per data-tone set");
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::invalid_argument, "sample rate must be positive");
}

ToneMap make_tone_map(const PpduConfig& c) {
  c.validate();
  ToneMap m;
  m.idft_size = c.idft_size;
  const int half = c.n_active_tones / 2;
  const int dc_half = c.n_dc_null / 2;
  for (int k = -dc_half - half; k < -dc_half; ++k) m.active.push_back(k);
  for (int k = dc_half; k < dc_half + half; ++k) m.active.push_back(k);
  for (int i = 0; i < c.n_active_tones; ++i) (i % 3 == 1 ? m.pilot : m.data).push_back(i);
  return m;
}

namespace {

std::vector<double> pn_sequence(std::size_t length, unsigned state) {
  // x^7 + x^4 + 1
  std::vector<double> out(length);
  for (auto& v : out) {
    const unsigned bit = ((state >> 6) ^ (state >> 3)) & 1U;
    state = ((state << 1) | bit) & 0x7fU;
    v = bit ? -1.0 : 1.0;
  }
  return out;
}

Sequences build_sequences(const PpduConfig& c) {
  const ToneMap m = make_tone_map(c);
  Sequences s;
  const int n = c.n_active_tones;
  const auto pn_sync = pn_sequence(n, 0x5d);
  const auto pn_ltf = pn_sequence(n, 0x7f);
  const auto pn_pilot = pn_sequence(c.n_pilot_tones, 0x2b);
  s.sync_active = CVector::Zero(n);
  s.ltf_active.resize(n);
  for (int i = 0; i < n; ++i) {
    if (m.active[i] % 2 == 0) s.sync_active(i) = std::sqrt(2.0) * pn_sync[i];
    s.ltf_active(i) = pn_ltf[i];
  }
  s.pilot_values.resize(c.n_pilot_tones);
  for (int i = 0; i < c.n_pilot_tones; ++i) s.pilot_values(i) = pn_pilot[i];
  return s;
}

}  // namespace

const Sequences& sequences(const PpduConfig& config) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, Sequences> cache;
  const auto key = std::make_tuple(config.idft_size, config.n_active_tones, config.n_dc_null);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_sequences(config)).first;
  return it->second;
}

CVector ofdm_modulate(const CVector& active_values, const ToneMap& map, int cp_len) {
  const int n = map.idft_size;
  if (active_values.size() != static_cast<Eigen::Index>(map.active.size()))
    throw Error(Errc::size_mismatch, "active-tone vector length mismatch");
  std::vector<cplx> bins(n, cplx(0.0, 0.0)), time(n);
  for (std::size_t i = 0; i < map.active.size(); ++i) bins[map.bin(map.active[i])] = active_values(i);
  Eigen::FFT<double> fft;
  fft.inv(time, bins);  // includes 1/N
  const double scale = std::sqrt(static_cast<double>(n));
  CVector out(n + cp_len);
  for (int k = 0; k < cp_len; ++k) out(k) = time[n - cp_len + k] * scale;
  for (int k = 0; k < n; ++k) out(cp_len + k) = time[k] * scale;
  return out;
}

CVector ofdm_demodulate(const CVector& window, const ToneMap& map) {
  const int n = map.idft_size;
  if (window.size() != n) throw Error(Errc::size_mismatch, "FFT window length mismatch");
  std::vector<cplx> time(window.data(), window.data() + n), bins(n);
  Eigen::FFT<double> fft;
  fft.fwd(bins, time);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CVector out(static_cast<Eigen::Index>(map.active.size()));
  for (std::size_t i = 0; i < map.active.size(); ++i) out(i) = bins[map.bin(map.active[i])] * scale;
  return out;
}

CVector assemble_symbol(const CVector& data_values, const ToneMap& map, const Sequences& seq) {
  if (data_values.size() != static_cast<Eigen::Index>(map.data.size()))
    throw Error(Errc::size_mismatch, "data-tone vector length mismatch");
  CVector active = CVector::Zero(static_cast<Eigen::Index>(map.active.size()));
  for (std::size_t i = 0; i < map.data.size(); ++i) active(map.data[i]) = data_values(i);
  for (std::size_t i = 0; i < map.pilot.size(); ++i) active(map.pilot[i]) = seq.pilot_values(i);
  return active;
}

}  // namespace sda::modem
