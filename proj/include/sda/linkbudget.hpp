#pragma once

#include <string>

#include "sda/common.hpp"

namespace sda::link {

inline constexpr double kThermalNoiseDbmPerHz = -174.0;

/// Required SNR back-solved so that the headline budget (32 dBm EIRP, 14 dBi,
/// NF 6 dB, 1.2 GHz, 20 dB margin, 28 GHz) closes at 128 m.
inline constexpr double kDefaultRequiredSnrDb = -0.33;

struct LinkBudgetParams {
  double eirp_dbm = 32.0;
  double rx_gain_dbi = 14.0;
  double noise_figure_db = 6.0;
  double bandwidth_hz = 1.2e9;
  double required_snr_db = kDefaultRequiredSnrDb;
  double link_margin_db = 20.0;
  double atmospheric_loss_db = 0.0;
  double carrier_frequency_hz = 28e9;

  void validate() const;
};

struct LinkBudgetResult {
  double range_m = 0.0;
  double fspl_db = 0.0;
  double noise_floor_dbm = 0.0;
  double sensitivity_dbm = 0.0;
};

struct RateParams {
  int n_data_subcarriers = 128;
  int modulation_order = 2;
  double symbol_duration_s = 320.0 / 1.536e9;
  double code_rate = 0.5;
  int crc_len_bits = 8;
  int codeword_len_bits = 128;
};

double fspl_db(double range_m, double wavelength_m);
double noise_floor_dbm(double noise_figure_db, double bandwidth_hz);
double sensitivity_dbm(double noise_figure_db, double bandwidth_hz, double required_snr_db);
LinkBudgetResult solve_range(const LinkBudgetParams& params);
/// Remaining dB after the budget at `range_m` (zero at the solved range).
double budget_excess_db(const LinkBudgetParams& params, double range_m);
double data_rate(const RateParams& params);

/// Symbol duration including cyclic prefix.
inline double symbol_duration(int idft_size, int cp_len, double sample_rate_hz) {
  return (idft_size + cp_len) / sample_rate_hz;
}
inline double occupied_bandwidth(double sample_rate_hz, int active_tones, int dc_tones, int idft_size) {
  return sample_rate_hz * (active_tones + dc_tones) / idft_size;
}

std::string render_text(const LinkBudgetParams& params, const LinkBudgetResult& result);
std::string render_json(const LinkBudgetParams& params, const LinkBudgetResult& result);

}  // namespace sda::link
