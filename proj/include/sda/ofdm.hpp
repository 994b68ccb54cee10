#pragma once

#include <vector>

#include "sda/common.hpp"
#include "sda/qam.hpp"

namespace sda::modem {

struct PpduConfig {
  int idft_size = 256;
  int cp_len = 64;
  int n_active_tones = 192;
  int n_dc_null = 8;
  int n_data_tones = 128;
  int n_pilot_tones = 64;
  double sample_rate_hz = 1.536e9;
  int chest_interval_symbols = 16;
  Modulation modulation = Modulation::bpsk;
  int codeword_len = 128;
  double code_rate = 0.5;
  int crc_len = 8;

  void validate() const;
  int symbol_len() const { return idft_size + cp_len; }
  double symbol_duration_s() const { return symbol_len() / sample_rate_hz; }
  double subcarrier_spacing_hz() const { return sample_rate_hz / idft_size; }
};

/// Subcarrier allocation. Indices are signed subcarrier numbers; DC nulls
/// occupy -n_dc/2 .. n_dc/2-1, active tones extend symmetrically outwards and
/// every third active tone (position % 3 == 1) is a pilot.
struct ToneMap {
  std::vector<int> active;  // ascending
  std::vector<int> data;    // positions into `active`
  std::vector<int> pilot;   // positions into `active`
  int idft_size = 256;

  int bin(int subcarrier) const { return (subcarrier % idft_size + idft_size) % idft_size; }
};

ToneMap make_tone_map(const PpduConfig& config);

/// Known sequences (+-1 PN from a 7-bit LFSR).
struct Sequences {
  CVector sync_active;   // per active tone; nonzero only on even subcarriers
  CVector ltf_active;    // full-band channel-estimation symbol
  CVector pilot_values;  // per pilot tone, same on every header/payload symbol
};

const Sequences& sequences(const PpduConfig& config);

/// Unitary IDFT of an active-tone vector plus cyclic prefix.
CVector ofdm_modulate(const CVector& active_values, const ToneMap& map, int cp_len);
/// Unitary DFT of `idft_size` samples, returning the active-tone values.
CVector ofdm_demodulate(const CVector& window, const ToneMap& map);

/// Assembles a header/payload symbol from data-tone values and the pilot sequence.
CVector assemble_symbol(const CVector& data_values, const ToneMap& map, const Sequences& seq);

}  // namespace sda::modem
