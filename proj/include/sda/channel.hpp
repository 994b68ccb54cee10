#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sda/beamforming.hpp"
#include "sda/iq.hpp"
#include "sda/ofdm.hpp"

namespace sda::channel {

/// Position in the horizontal plane (m) and boresight heading (degrees, CCW from +x).
struct NodePose {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading_deg = 0.0;
};

enum class PathKind { los, reflector };

struct PathSpec {
  PathKind kind = PathKind::los;
  Eigen::Vector2d reflector = Eigen::Vector2d::Zero();
  double reflection_loss_db = 10.0;
  /// Metallic reflection flips the field sign.
  bool invert_phase = true;
};

enum class NoiseMode { none, absolute, floor, target_snr };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::none;
  /// absolute: per-sample complex noise variance in dB relative to unit per-tone signal power.
  double noise_power_db = -100.0;
  /// floor: thermal density (dBm/Hz, including noise figure) against the transmit power.
  double noise_floor_dbm_hz = -168.0;
  double tx_power_dbm = 18.0;
  /// target_snr: resolved by calibrate_to_snr against the best codebook pair.
  double target_snr_db = 30.0;
};

struct ChannelConfig {
  NodePose tx_pose{Eigen::Vector2d(0.0, 0.0), 0.0};
  NodePose rx_pose{Eigen::Vector2d(4.5, 0.0), 180.0};
  std::vector<PathSpec> paths{PathSpec{}};
  beam::ArrayGeometry geometry;
  beam::ElementModel element = beam::ElementModel::cosine;
  modem::PpduConfig numerology;
  NoiseSpec noise;
  double cfo_hz = 0.0;
  /// Peak-to-peak depth of the smooth per-tone ripple; 0 disables it.
  double ripple_depth_db = 0.0;
  /// Ripple is a fixed property of the link; noise draws come from rng_seed.
  std::uint64_t ripple_seed = 1;
  std::uint64_t rng_seed = 1;

  double carrier_frequency_hz() const { return geometry.carrier_frequency_hz; }
  void validate() const;
};

struct PathGeometry {
  double length_m = 0.0;
  double departure_deg = 0.0;  // relative to TX boresight
  double arrival_deg = 0.0;    // relative to RX boresight
  int delay_samples = 0;
};

PathGeometry resolve_path(const PathSpec& path, const ChannelConfig& config);

cplx path_gain(const PathSpec& path, const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config);

/// Ripple impulse response (odd length, centered; adds (length-1)/2 samples of delay).
/// Returns {1} when ripple is disabled.
CVector ripple_taps(const ChannelConfig& config);

/// Noiseless frequency response on the active tones, delays taken relative to
/// the earliest path.
CVector tone_response(const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config);

/// Mean |H_k|^2 over active tones.
double mean_tone_gain(const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config);

/// Per-sample noise variance implied by the noise spec (0 for none).
double noise_variance(const ChannelConfig& config);

/// Multipath sum with integer delays, ripple, CFO rotation, then AWGN.
IqBuffer propagate(const IqBuffer& iq, const beam::Awv& tx_awv, const beam::Awv& rx_awv, const ChannelConfig& config);

/// Resolves a target-SNR noise spec into an absolute one: the best pair of the
/// two codebooks reaches the target post-FFT SNR in expectation.
ChannelConfig calibrate_to_snr(const ChannelConfig& config, const beam::Codebook& tx_codebook,
                               const beam::Codebook& rx_codebook, double target_snr_db);

/// Aligned beam indices (nearest codebook angle to the LOS departure/arrival).
std::pair<int, int> aligned_indices(const ChannelConfig& config, const beam::Codebook& codebook);

}  // namespace sda::channel
