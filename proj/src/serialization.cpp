#include "sda/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sda {

using nlohmann::json;
using nlohmann::ordered_json;

json ArtifactMeta::to_json() const {
  return json{{"tool", "sda"}, {"version", std::string(kToolVersion)}, {"subcommand", subcommand},
              {"seed", seed}, {"config", config}};
}

std::string ArtifactMeta::csv_comment() const {
  std::string out;
  out += "# tool: sda " + std::string(kToolVersion) + "\n";
  out += "# subcommand: " + subcommand + "\n";
  out += "# seed: " + std::to_string(seed) + "\n";
  out += "# config: " + config.dump() + "\n";
  return out;
}

std::string artifact_name(const std::string& kind, std::uint64_t seed, std::string_view content,
                          const std::string& extension) {
  return kind + "-" + std::to_string(seed) + "-" + hex64(fnv1a64(content)) + "." + extension;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path write_artifact(const std::filesystem::path& dir, const std::string& kind, std::uint64_t seed,
                                     const std::string& content, const std::string& extension) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create directory " + dir.string());
  const auto path = dir / artifact_name(kind, seed, content, extension);
  write_text(path, content);
  return path;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // "-0.00"
  return s;
}

std::string patterns_csv(const std::vector<int>& beam_indices, const std::vector<beam::Pattern>& patterns,
                         const ArtifactMeta& meta) {
  if (beam_indices.size() != patterns.size() || patterns.empty())
    throw Error(Errc::size_mismatch, "one pattern per beam index required");
  std::string out = meta.csv_comment() + "angle_deg";
  for (int b : beam_indices) out += ",beam_" + std::to_string(b);
  out += "\n";
  const auto n = patterns.front().angles_deg.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out += format_fixed(patterns.front().angles_deg(i), 3);
    for (const auto& p : patterns) out += "," + format_fixed(p.gains_db(i), 4);
    out += "\n";
  }
  return out;
}

std::string codebook_csv(const beam::Codebook& cb, const ArtifactMeta& meta) {
  std::string out = meta.csv_comment() + "beam_index,steering_angle_deg,element,amplitude,phase_deg,i_code,q_code\n";
  for (const auto& e : cb.entries) {
    for (int n = 0; n < e.awv.size(); ++n) {
      const auto& w = e.awv.weights[n];
      out += std::to_string(e.beam_index) + "," + format_fixed(e.steering_angle_deg, 2) + "," + std::to_string(n) +
             "," + format_fixed(w.amplitude, 6) + "," + format_fixed(rad2deg(w.phase), 4) + "," +
             std::to_string(w.i_code) + "," + std::to_string(w.q_code) + "\n";
    }
  }
  return out;
}

json awv_json(const beam::Awv& awv) {
  json weights = json::array();
  for (const auto& w : awv.weights)
    weights.push_back({{"amplitude", w.amplitude}, {"phase_deg", rad2deg(w.phase)}, {"i_code", w.i_code},
                       {"q_code", w.q_code}});
  json j{{"dac_bits", awv.dac_bits}, {"active_elements", awv.active_elements()}, {"weights", weights}};
  if (awv.label) j["label"] = *awv.label;
  return j;
}

json codebook_json(const beam::Codebook& cb) {
  json entries = json::array();
  for (const auto& e : cb.entries)
    entries.push_back({{"beam_index", e.beam_index}, {"steering_angle_deg", e.steering_angle_deg},
                       {"awv", awv_json(e.awv)}});
  return json{{"taper", beam::to_string(cb.taper)}, {"entries", entries}};
}

std::string snr_matrix_csv(const sweep::SnrMatrix& m, const ArtifactMeta& meta) {
  std::string out = meta.csv_comment() + "tx\\rx";
  for (int j = 1; j <= m.size(); ++j) out += "," + std::to_string(j);
  out += "\n";
  for (int i = 1; i <= m.size(); ++i) {
    out += std::to_string(i);
    for (int j = 1; j <= m.size(); ++j) out += "," + format_fixed(m.at(i, j), 2);
    out += "\n";
  }
  return out;
}

json sweep_result_json(const sweep::SweepResult& r, const ArtifactMeta& meta) {
  json peaks = json::array();
  for (const auto& p : r.secondary_peaks) peaks.push_back({{"tx", p.tx}, {"rx", p.rx}, {"snr_db", p.snr_db}});
  json ok = json::array();
  for (int i = 0; i < r.matrix.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < r.matrix.size(); ++j) row.push_back(static_cast<bool>(r.matrix.decode_ok(i, j)));
    ok.push_back(row);
  }
  return json{{"meta", meta.to_json()},
              {"best_pair", {{"tx", r.best_pair.first}, {"rx", r.best_pair.second}}},
              {"peak_snr_db", r.matrix.at(r.best_pair.first, r.best_pair.second)},
              {"min_snr_db", r.matrix.values_db.minCoeff()},
              {"secondary_peaks", peaks},
              {"cells_visited", r.cells_visited},
              {"frames_total", r.frames_total},
              {"frames_decoded", r.frames_decoded},
              {"decode_ok", ok}};
}

std::string gain_table_csv(const std::vector<comet::ElementResponse>& rows, const ArtifactMeta& meta) {
  std::string out = meta.csv_comment() + "element_id,commanded_phase_deg,gain_db,phase_deg\n";
  for (const auto& r : rows)
    out += std::to_string(r.element_id) + "," + format_fixed(r.commanded_phase_deg, 2) + "," +
           format_fixed(r.gain_db, 4) + "," + format_fixed(r.phase_deg, 3) + "\n";
  return out;
}

json frame_json(const modem::Frame& f) {
  const auto& c = f.config;
  return json{{"config",
               {{"idft_size", c.idft_size},
                {"cp_len", c.cp_len},
                {"n_active_tones", c.n_active_tones},
                {"n_dc_null", c.n_dc_null},
                {"n_data_tones", c.n_data_tones},
                {"n_pilot_tones", c.n_pilot_tones},
                {"sample_rate_hz", c.sample_rate_hz},
                {"chest_interval_symbols", c.chest_interval_symbols},
                {"modulation", modem::to_string(c.modulation)},
                {"codeword_len", c.codeword_len},
                {"code_rate", c.code_rate},
                {"crc_len", c.crc_len}}},
              {"header",
               {{"modulation", modem::to_string(f.header.modulation)},
                {"payload_bits", f.header.payload_bits},
                {"pre_pad", f.header.pre_pad},
                {"post_pad", f.header.post_pad}}},
              {"preamble_samples", f.preamble_samples},
              {"n_codewords", f.n_codewords},
              {"payload_symbols", f.n_payload_symbols},
              {"chest_positions", f.chest_positions},
              {"pilot_subcarriers", f.pilot_subcarriers},
              {"total_samples", f.total_samples}};
}

json decode_report_json(const modem::DecodeReport& r) {
  json j{{"status", modem::to_string(r.status)},
         {"timing_offset_samples", r.timing_offset_samples},
         {"cfo_hz_estimate", r.cfo_hz_estimate},
         {"sync_metric", r.sync_metric},
         {"noise_var", r.noise_var},
         {"snr_db", r.snr_db},
         {"codewords_total", r.codewords_total},
         {"codewords_crc_ok", r.codewords_crc_ok},
         {"payload_bits", r.payload.size()},
         {"payload_ok", r.payload_ok()},
         {"warnings", r.warnings}};
  j["evm_db"] = r.evm_db ? json(*r.evm_db) : json(nullptr);
  if (r.header)
    j["header"] = {{"modulation", modem::to_string(r.header->modulation)},
                   {"payload_bits", r.header->payload_bits},
                   {"pre_pad", r.header->pre_pad},
                   {"post_pad", r.header->post_pad}};
  return j;
}

}  // namespace sda
