#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sda/common.hpp"

namespace sda::beam {

inline constexpr double kMinCarrierHz = 24e9;
inline constexpr double kMaxCarrierHz = 29.5e9;
inline constexpr double kMaxSynthesisAngleDeg = 60.0;
inline constexpr int kDefaultDacBits = 6;
inline constexpr double kPatternFloorDb = -100.0;
/// Peak gain reported by a uniform broadside beam in absolute (dBi) mode.
inline constexpr double kAnchorPeakGainDbi = 14.0;

inline constexpr int kCodebookSize = 21;
inline constexpr int kBroadsideBeamIndex = 11;
inline constexpr double kScanStartDeg = -45.0;
inline constexpr double kScanStepDeg = 4.5;

struct ArrayGeometry {
  int n_azimuth = 8;
  int n_elevation = 2;
  double element_spacing = 0.5;  // wavelengths at carrier
  double carrier_frequency_hz = 28e9;

  int size() const { return n_azimuth * n_elevation; }
  void validate() const;
};

struct IqCode {
  int i_code = 0;
  int q_code = 0;
  bool saturated = false;
};

struct ElementWeight {
  double amplitude = 0.0;
  double phase = 0.0;  // radians, [0, 2pi)
  int i_code = 0;
  int q_code = 0;

  cplx ideal() const { return std::polar(amplitude, phase); }
};

/// One beam: a weight per element, row-major over (elevation, azimuth).
struct Awv {
  std::vector<ElementWeight> weights;
  std::optional<int> label;
  int dac_bits = kDefaultDacBits;

  int size() const { return static_cast<int>(weights.size()); }
  CVector ideal_weights() const;
  /// Weights reconstructed from the I/Q DAC codes.
  CVector quantized_weights() const;
  int active_elements() const;
};

enum class Taper { uniform, hamming };

Taper parse_taper(const std::string& name);
const char* to_string(Taper taper);

std::pair<double, double> weight_to_iq(double amplitude, double phase);
std::pair<double, double> iq_to_weight(double i, double q);

/// Mid-rise quantizer on [-1, 1]: code k in [-2^(b-1), 2^(b-1) - 1] sits at (k + 1/2) LSB.
IqCode quantize_iq(double i, double q, int bits);
double dequantize(int code, int bits);
inline double lsb(int bits) { return 2.0 / static_cast<double>(1 << bits); }

/// Builds an AWV from per-element (amplitude, phase) pairs, filling DAC codes.
Awv make_awv(const std::vector<std::pair<double, double>>& amplitude_phase, const ArrayGeometry& geometry,
             int dac_bits = kDefaultDacBits);

Awv make_steering_awv(double angle_deg, const ArrayGeometry& geometry, Taper taper = Taper::uniform,
                      int dac_bits = kDefaultDacBits);

cplx array_factor(const Awv& awv, const ArrayGeometry& geometry, double angle_deg);

enum class ElementModel { isotropic, cosine };
enum class PatternReference { absolute_dbi, normalized };

ElementModel parse_element_model(const std::string& name);
const char* to_string(ElementModel model);

/// Element field factor E(theta).
double element_field(ElementModel model, double angle_deg);

/// Single-element gain that makes a uniform broadside beam report kAnchorPeakGainDbi.
double anchored_element_gain_dbi(const ArrayGeometry& geometry);

struct PatternOptions {
  ElementModel element = ElementModel::isotropic;
  PatternReference reference = PatternReference::absolute_dbi;
  /// Defaults to anchored_element_gain_dbi(geometry).
  std::optional<double> element_gain_dbi;
  bool use_dac_codes = false;
};

struct Pattern {
  RVector angles_deg;
  RVector gains_db;
  PatternReference reference = PatternReference::absolute_dbi;
};

/// Far-field field amplitude (linear, sqrt of gain) including element model and anchoring.
cplx field_pattern(const Awv& awv, const ArrayGeometry& geometry, double angle_deg, const PatternOptions& options);

Pattern compute_pattern(const Awv& awv, const ArrayGeometry& geometry, const RVector& grid_deg,
                        const PatternOptions& options = {});

RVector uniform_grid(double start_deg, double stop_deg, double step_deg);

struct PatternMetrics {
  double peak_angle_deg = 0.0;
  double peak_gain_db = 0.0;
  double hpbw_deg = 0.0;
  std::optional<double> peak_to_null_db;
  std::optional<double> first_sidelobe_db;  // relative to peak
};

PatternMetrics pattern_metrics(const Pattern& pattern);

struct CodebookEntry {
  int beam_index = 0;
  double steering_angle_deg = 0.0;
  Awv awv;
};

struct Codebook {
  std::vector<CodebookEntry> entries;
  Taper taper = Taper::uniform;

  int size() const { return static_cast<int>(entries.size()); }
  /// 1-based beam index.
  const CodebookEntry& at(int beam_index) const;
};

inline double beam_angle_deg(int beam_index) { return kScanStartDeg + kScanStepDeg * (beam_index - 1); }

Codebook build_codebook(const ArrayGeometry& geometry, Taper taper = Taper::uniform,
                        int dac_bits = kDefaultDacBits);

}  // namespace sda::beam
