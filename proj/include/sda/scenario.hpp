#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sda/beamforming.hpp"
#include "sda/channel.hpp"
#include "sda/comet.hpp"
#include "sda/sweep.hpp"

namespace sda {

/// One experiment: array, channel geometry and per-tool settings. Loaded from
/// JSON; absent keys keep their defaults and unknown keys are ignored.
struct Scenario {
  std::string name = "default";
  std::string description;
  std::uint64_t seed = 1;

  beam::Taper taper = beam::Taper::uniform;
  int dac_bits = beam::kDefaultDacBits;
  channel::ChannelConfig channel;  // geometry and element model live here

  struct Sweep {
    int frames_per_position = 3;
    double floor_db = -10.0;
    double secondary_threshold_db = 15.0;
  } sweep;

  struct Pattern {
    std::vector<int> beams{beam::kBroadsideBeamIndex};
    double start_deg = -90.0;
    double stop_deg = 90.0;
    double step_deg = 0.1;
    beam::PatternReference reference = beam::PatternReference::absolute_dbi;
  } pattern;

  struct Comet {
    int n_elements = 16;
    double gain_spread_db = 0.0;
    bool random_phase_offsets = true;
    comet::InterpolatorModel interpolator;
    double amplitude = 1.0;
    double detector_noise_sigma = 0.0;
    double phase_step_deg = 5.0;
  } comet;

  nlohmann::json annotations = nlohmann::json::object();
  /// The document this scenario was parsed from (embedded in artifact metadata).
  nlohmann::json source = nlohmann::json::object();

  const beam::ArrayGeometry& geometry() const { return channel.geometry; }
  beam::Codebook codebook() const { return beam::build_codebook(geometry(), taper, dac_bits); }
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

sweep::SweepConfig make_sweep_config(const Scenario& scenario, std::uint64_t seed, int threads);
comet::ArrayModel make_comet_model(const Scenario& scenario, std::uint64_t seed);

}  // namespace sda
