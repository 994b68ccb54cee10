#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sda/beamforming.hpp"
#include "sda/channel.hpp"
#include "sda/ppdu.hpp"

namespace sda::sweep {

struct SweepConfig {
  beam::Codebook tx_codebook;
  beam::Codebook rx_codebook;
  int frames_per_position = 3;
  channel::ChannelConfig channel;
  modem::PpduConfig ppdu;  // modulation defaults to BPSK
  /// Value recorded where no frame could be synchronized.
  double floor_db = -10.0;
  double secondary_threshold_db = 15.0;
  /// 0 = one per hardware thread, 1 = sequential.
  int threads = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Rows are TX beam indices, columns RX beam indices (both 1-based in the API).
struct SnrMatrix {
  Eigen::MatrixXd values_db;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> decode_ok;

  int size() const { return static_cast<int>(values_db.rows()); }
  double at(int tx, int rx) const { return values_db(tx - 1, rx - 1); }
};

struct Peak {
  int tx = 0;
  int rx = 0;
  double snr_db = 0.0;
};

struct SweepResult {
  SnrMatrix matrix;
  std::pair<int, int> best_pair{0, 0};
  std::vector<Peak> secondary_peaks;
  int cells_visited = 0;
  int frames_total = 0;
  int frames_decoded = 0;
};

/// Payload announcing a TX beam index: a marker byte followed by the index.
modem::Bits beam_announcement(int tx_index);
/// Decoded TX index, or 0 if the payload is not an announcement.
int parse_announcement(const modem::Bits& payload);

/// Called after each completed cell with (cells_done, cells_total).
using ProgressFn = std::function<void(int, int)>;

SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress = {});

/// Argmax over decode_ok cells, ties to the lowest (tx, rx). Throws not_found if none decoded.
std::pair<int, int> select_best(const SnrMatrix& matrix);

/// Local maxima over the 8-neighborhood, strictly above (global max - threshold),
/// outside the global maximum's neighborhood. Plateaus report their first cell.
std::vector<Peak> detect_secondary_peaks(const SnrMatrix& matrix, double threshold_db);

}  // namespace sda::sweep
