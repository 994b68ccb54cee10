#include "sda/scenario.hpp"

#include <fstream>
#include <random>

namespace sda {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::Vector2d read_point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::invalid_argument, "positions must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

channel::NodePose read_pose(const json& j, channel::NodePose pose) {
  if (j.contains("position")) pose.position = read_point(j.at("position"));
  read(j, "heading_deg", pose.heading_deg);
  return pose;
}

beam::PatternReference parse_reference(const std::string& s) {
  if (s == "absolute_dbi") return beam::PatternReference::absolute_dbi;
  if (s == "normalized") return beam::PatternReference::normalized;
  throw Error(Errc::invalid_argument, "unknown pattern reference '" + s + "'");
}

channel::NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "none") return channel::NoiseMode::none;
  if (s == "absolute") return channel::NoiseMode::absolute;
  if (s == "floor") return channel::NoiseMode::floor;
  if (s == "target_snr") return channel::NoiseMode::target_snr;
  throw Error(Errc::invalid_argument, "unknown noise mode '" + s + "'");
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::invalid_argument, "scenario must be a JSON object");
  Scenario s;
  s.source = doc;
  try {
    read(doc, "name", s.name);
    read(doc, "description", s.description);
    read(doc, "seed", s.seed);
    if (doc.contains("array")) {
      const json& a = doc.at("array");
      beam::ArrayGeometry& g = s.channel.geometry;
      read(a, "n_azimuth", g.n_azimuth);
      read(a, "n_elevation", g.n_elevation);
      read(a, "element_spacing", g.element_spacing);
      read(a, "carrier_frequency_hz", g.carrier_frequency_hz);
      read(a, "dac_bits", s.dac_bits);
      if (a.contains("taper")) s.taper = beam::parse_taper(a.at("taper").get<std::string>());
      if (a.contains("element")) s.channel.element = beam::parse_element_model(a.at("element").get<std::string>());
    }
    if (doc.contains("tx")) s.channel.tx_pose = read_pose(doc.at("tx"), s.channel.tx_pose);
    if (doc.contains("rx")) s.channel.rx_pose = read_pose(doc.at("rx"), s.channel.rx_pose);
    if (doc.contains("paths")) {
      s.channel.paths.clear();
      for (const json& p : doc.at("paths")) {
        channel::PathSpec path;
        const std::string kind = p.value("kind", "los");
        if (kind == "los") {
          path.kind = channel::PathKind::los;
        } else if (kind == "reflector") {
          path.kind = channel::PathKind::reflector;
          path.reflector = read_point(p.at("position"));
          read(p, "reflection_loss_db", path.reflection_loss_db);
          read(p, "invert_phase", path.invert_phase);
        } else {
          throw Error(Errc::invalid_argument, "unknown path kind '" + kind + "'");
        }
        s.channel.paths.push_back(path);
      }
    }
    if (doc.contains("noise")) {
      const json& n = doc.at("noise");
      if (n.contains("mode")) s.channel.noise.mode = parse_noise_mode(n.at("mode").get<std::string>());
      read(n, "noise_power_db", s.channel.noise.noise_power_db);
      read(n, "noise_floor_dbm_hz", s.channel.noise.noise_floor_dbm_hz);
      read(n, "tx_power_dbm", s.channel.noise.tx_power_dbm);
      read(n, "target_snr_db", s.channel.noise.target_snr_db);
    }
    read(doc, "cfo_hz", s.channel.cfo_hz);
    read(doc, "ripple_depth_db", s.channel.ripple_depth_db);
    read(doc, "ripple_seed", s.channel.ripple_seed);
    if (doc.contains("sweep")) {
      const json& w = doc.at("sweep");
      read(w, "frames_per_position", s.sweep.frames_per_position);
      read(w, "floor_db", s.sweep.floor_db);
      read(w, "secondary_threshold_db", s.sweep.secondary_threshold_db);
    }
    if (doc.contains("pattern")) {
      const json& p = doc.at("pattern");
      read(p, "beams", s.pattern.beams);
      read(p, "start_deg", s.pattern.start_deg);
      read(p, "stop_deg", s.pattern.stop_deg);
      read(p, "step_deg", s.pattern.step_deg);
      if (p.contains("reference")) s.pattern.reference = parse_reference(p.at("reference").get<std::string>());
    }
    if (doc.contains("comet")) {
      const json& c = doc.at("comet");
      read(c, "n_elements", s.comet.n_elements);
      read(c, "gain_spread_db", s.comet.gain_spread_db);
      read(c, "random_phase_offsets", s.comet.random_phase_offsets);
      read(c, "dac_bits", s.comet.interpolator.dac_bits);
      read(c, "i_gain", s.comet.interpolator.i_gain);
      read(c, "q_gain", s.comet.interpolator.q_gain);
      read(c, "current_steering", s.comet.interpolator.current_steering);
      read(c, "amplitude", s.comet.amplitude);
      read(c, "detector_noise_sigma", s.comet.detector_noise_sigma);
      read(c, "phase_step_deg", s.comet.phase_step_deg);
    }
    if (doc.contains("annotations")) s.annotations = doc.at("annotations");
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("scenario: ") + e.what());
  }
  s.channel.validate();
  for (int b : s.pattern.beams)
    if (b < 1 || b > beam::kCodebookSize) throw Error(Errc::out_of_range, "index out of range 1..21");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, "scenario " + path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

sweep::SweepConfig make_sweep_config(const Scenario& s, std::uint64_t seed, int threads) {
  sweep::SweepConfig c;
  c.tx_codebook = s.codebook();
  c.rx_codebook = c.tx_codebook;
  c.frames_per_position = s.sweep.frames_per_position;
  c.channel = s.channel;
  c.floor_db = s.sweep.floor_db;
  c.secondary_threshold_db = s.sweep.secondary_threshold_db;
  c.threads = threads;
  c.seed = seed;
  return c;
}

comet::ArrayModel make_comet_model(const Scenario& s, std::uint64_t seed) {
  const int n = s.comet.n_elements;
  if (n < 2) throw Error(Errc::invalid_argument, "CoMET needs at least two elements");
  comet::ArrayModel m;
  m.element_gains.resize(n);
  std::mt19937_64 rng(derive_seed(seed, 0x636f6d6574ULL));
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  for (int e = 0; e < n; ++e) {
    // Gains step linearly in dB from 0 down to -spread.
    const double gain_db = -s.comet.gain_spread_db * e / (n - 1);
    const double offset = s.comet.random_phase_offsets ? phase(rng) : 0.0;
    m.element_gains(e) = std::polar(db2mag(gain_db), offset);
  }
  m.interpolator = s.comet.interpolator;
  m.amplitude = s.comet.amplitude;
  m.detector_noise_sigma = s.comet.detector_noise_sigma;
  m.seed = seed;
  return m;
}

}  // namespace sda
