#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sda/common.hpp"

namespace sda::comet {

/// On/off element codes c_n = (1 + w_{a_n}) / 2 built from Walsh rows of
/// length L = 2^k. The indices {0, a_1, ..., a_n} have pairwise-distinct XORs,
/// so every product c_n c_m has its own Walsh component w_{a_n ^ a_m}.
struct CodeSet {
  Eigen::MatrixXd codes;  // n_elements x L, entries 0/1
  std::vector<int> walsh_indices;
  int log2_length = 0;

  int n_elements() const { return static_cast<int>(codes.rows()); }
  int length() const { return static_cast<int>(codes.cols()); }

  /// Least-squares factorization of the trace model (columns c_n, then 2 c_n c_m for n < m).
  std::shared_ptr<const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> solver;
};

inline constexpr int kMaxLog2Length = 12;

int walsh(int index, int chip);

/// Greedy XOR-Sidon set of `count` values in [0, 2^k), starting from 0; empty if it does not fit.
std::vector<int> sidon_indices(int count, int log2_length);

/// Shortest code family that separates `n_elements`, unless a length is forced.
CodeSet gen_codes(int n_elements, std::optional<int> log2_length = std::nullopt);

/// Square-law detector trace P(t) = |sum_n c_n(t) z_n|^2, plus optional Gaussian
/// measurement noise (clipped at zero, the detector cannot read negative power).
RVector simulate_detector(const CVector& gains, const CodeSet& codes, double noise_sigma = 0.0,
                          std::uint64_t seed = 0);

/// Number of 90-degree-rotated traces needed for the imaginary parts.
int imag_trace_count(int n_elements);

/// Gains with elements whose index has bit `bit` set rotated by +90 degrees.
CVector rotate_group(const CVector& gains, int bit);

/// Plain trace followed by one rotated trace per index bit.
std::vector<RVector> measure(const CVector& gains, const CodeSet& codes, double noise_sigma = 0.0,
                             std::uint64_t seed = 0);

/// z_n conj(z_m) estimates (Hermitian) from the traces produced by `measure`.
Eigen::MatrixXcd extract_correlations(const std::vector<RVector>& traces, const CodeSet& codes);

struct ElementSolution {
  CVector gains;  // reference element has phase 0
  int reference = 0;
  std::vector<int> dead_elements;
  std::vector<std::string> notes;
};

/// Magnitudes from the diagonal, phases against a reference element, then a
/// weighted least-squares refinement over every live pair.
ElementSolution solve_elements(const Eigen::MatrixXcd& correlations);

/// Vector-interpolator realization of a commanded (amplitude, phase).
struct InterpolatorModel {
  int dac_bits = 6;  // 0 = ideal, unquantized
  double i_gain = 1.0;
  double q_gain = 1.0;
  /// Current-steering compression: output scaled by ((|I| + |Q|) / |I + jQ|)^-eta.
  double current_steering = 0.6;

  cplx response(double amplitude, double phase_rad) const;
};

struct ArrayModel {
  CVector element_gains = CVector::Ones(16);  // intrinsic per-element responses
  InterpolatorModel interpolator;
  double amplitude = 1.0;
  double detector_noise_sigma = 0.0;
  std::uint64_t seed = 1;
};

struct ElementResponse {
  int element_id = 0;
  double commanded_phase_deg = 0.0;
  double gain_db = 0.0;
  double phase_deg = 0.0;  // [0, 360), relative to element 0 at the 0-degree setting
};

/// For each commanded phase, program every element, run the CoMET pipeline and report
/// the extracted per-element gain and phase. Ordered by phase, then element.
std::vector<ElementResponse> sweep_phase_settings(const ArrayModel& model, const std::vector<double>& phases_deg,
                                                  const CodeSet& codes);

/// Gain-spread helper: max - min extracted gain (dB) across elements at one setting.
double gain_spread_db(const std::vector<ElementResponse>& responses, double commanded_phase_deg);

}  // namespace sda::comet
