#include "sda/linkbudget.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace sda::link {

void LinkBudgetParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw Error(Errc::invalid_argument, "bandwidth must be positive");
  if (!(link_margin_db >= 0.0)) throw Error(Errc::invalid_argument, "link margin must be non-negative");
  if (!(atmospheric_loss_db >= 0.0)) throw Error(Errc::invalid_argument, "atmospheric loss must be non-negative");
  if (!(carrier_frequency_hz > 0.0)) throw Error(Errc::invalid_argument, "carrier frequency must be positive");
}

double fspl_db(double range_m, double wavelength_m) {
  if (!(range_m > 0.0) || !(wavelength_m > 0.0))
    throw Error(Errc::invalid_argument, "range and wavelength must be positive");
  return 20.0 * std::log10(4.0 * kPi * range_m / wavelength_m);
}

double noise_floor_dbm(double noise_figure_db, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw Error(Errc::invalid_argument, "bandwidth must be positive");
  return kThermalNoiseDbmPerHz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double sensitivity_dbm(double noise_figure_db, double bandwidth_hz, double required_snr_db) {
  return noise_floor_dbm(noise_figure_db, bandwidth_hz) + required_snr_db;
}

double budget_excess_db(const LinkBudgetParams& p, double range_m) {
  const double sens = sensitivity_dbm(p.noise_figure_db, p.bandwidth_hz, p.required_snr_db);
  return p.eirp_dbm + p.rx_gain_dbi - fspl_db(range_m, wavelength(p.carrier_frequency_hz)) -
         p.atmospheric_loss_db - (sens + p.link_margin_db);
}

LinkBudgetResult solve_range(const LinkBudgetParams& p) {
  p.validate();
  if (budget_excess_db(p, 1.0) < 0.0)
    throw Error(Errc::infeasible, "link budget infeasible: negative excess at 1 m");
  LinkBudgetResult r;
  r.noise_floor_dbm = noise_floor_dbm(p.noise_figure_db, p.bandwidth_hz);
  r.sensitivity_dbm = r.noise_floor_dbm + p.required_snr_db;
  // EIRP + Gr - FSPL(R) - La = Psens + margin, solved for R in the dB domain.
  r.fspl_db = p.eirp_dbm + p.rx_gain_dbi - p.atmospheric_loss_db - r.sensitivity_dbm - p.link_margin_db;
  r.range_m = wavelength(p.carrier_frequency_hz) / (4.0 * kPi) * std::pow(10.0, r.fspl_db / 20.0);
  return r;
}

double data_rate(const RateParams& p) {
  switch (p.modulation_order) {
    case 2: case 4: case 16: case 64: break;
    default: throw Error(Errc::invalid_argument, "unsupported modulation order " + std::to_string(p.modulation_order));
  }
  if (!(p.symbol_duration_s > 0.0)) throw Error(Errc::invalid_argument, "symbol duration must be positive");
  const double info_fraction =
      p.code_rate - static_cast<double>(p.crc_len_bits) / static_cast<double>(p.codeword_len_bits);
  if (info_fraction < -1e-15) throw Error(Errc::invalid_argument, "CRC longer than the message part of a codeword");
  return p.n_data_subcarriers * std::log2(static_cast<double>(p.modulation_order)) / p.symbol_duration_s *
         std::max(0.0, info_fraction);
}

namespace {
std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace

std::string render_text(const LinkBudgetParams& p, const LinkBudgetResult& r) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) { out += std::string(key) + ": " + value + "\n"; };
  line("eirp_dbm", fmt2(p.eirp_dbm));
  line("rx_gain_dbi", fmt2(p.rx_gain_dbi));
  line("noise_figure_db", fmt2(p.noise_figure_db));
  line("bandwidth_hz", fmt2(p.bandwidth_hz));
  line("required_snr_db", fmt2(p.required_snr_db));
  line("link_margin_db", fmt2(p.link_margin_db));
  line("atmospheric_loss_db", fmt2(p.atmospheric_loss_db));
  line("carrier_frequency_hz", fmt2(p.carrier_frequency_hz));
  line("noise_floor_dbm", fmt2(r.noise_floor_dbm));
  line("sensitivity_dbm", fmt2(r.sensitivity_dbm));
  line("fspl_db", fmt2(r.fspl_db));
  line("range_m", fmt2(r.range_m));
  return out;
}

std::string render_json(const LinkBudgetParams& p, const LinkBudgetResult& r) {
  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  nlohmann::ordered_json j;
  j["params"] = {{"eirp_dbm", round2(p.eirp_dbm)},
                 {"rx_gain_dbi", round2(p.rx_gain_dbi)},
                 {"noise_figure_db", round2(p.noise_figure_db)},
                 {"bandwidth_hz", p.bandwidth_hz},
                 {"required_snr_db", round2(p.required_snr_db)},
                 {"link_margin_db", round2(p.link_margin_db)},
                 {"atmospheric_loss_db", round2(p.atmospheric_loss_db)},
                 {"carrier_frequency_hz", p.carrier_frequency_hz}};
  j["result"] = {{"range_m", round2(r.range_m)},
                 {"fspl_db", round2(r.fspl_db)},
                 {"noise_floor_dbm", round2(r.noise_floor_dbm)},
                 {"sensitivity_dbm", round2(r.sensitivity_dbm)}};
  return j.dump(2);
}

}  // namespace sda::link
