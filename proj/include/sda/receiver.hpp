#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sda/iq.hpp"
#include "sda/ofdm.hpp"
#include "sda/ppdu.hpp"

namespace sda::modem {

struct SyncResult {
  Eigen::Index timing_offset = 0;  // first sample of the frame (start of the sync CP)
  double cfo_hz = 0.0;
  double metric = 0.0;  // normalized autocorrelation at the coarse peak, in [0, 1]
};

struct SyncOptions {
  double threshold = 0.4;
  bool fine_timing = true;
};

/// Repeated-half autocorrelation (lag idft/2) for coarse timing and CFO, then
/// cross-correlation with the known preamble for the exact frame start.
/// Throws not_found when no plateau clears the threshold.
SyncResult synchronize(const IqBuffer& iq, const PpduConfig& config, const SyncOptions& options = {});

/// Rotates samples by -cfo (in place).
void correct_cfo(CVector& samples, double cfo_hz, double sample_rate_hz);

/// Per-tone least-squares estimate Y/X over the active tones.
CVector estimate_channel(const CVector& received_active, const CVector& known_active);

/// Sparse delay-domain fit of an LS estimate (orthogonal matching pursuit over
/// the first cp_len taps). Falls back to the input when no sparse fit is found.
CVector refine_channel(const CVector& h_ls, const ToneMap& map, int max_delay_taps, double noise_var);

/// Common phase of one symbol: angle of sum Y_p conj(H_p X_p) over pilot tones.
double track_cpe(const CVector& received_active, const CVector& channel, const ToneMap& map, const Sequences& seq);

enum class DecodeStatus { ok, sync_not_found, header_crc_fail, truncated };
const char* to_string(DecodeStatus status);

struct RxOptions {
  SyncOptions sync;
  bool refine_channel = true;
  /// FFT window starts this many samples into the CP.
  int fft_backoff = 32;
};

struct DecodeReport {
  DecodeStatus status = DecodeStatus::sync_not_found;
  Eigen::Index timing_offset_samples = 0;
  double cfo_hz_estimate = 0.0;
  double sync_metric = 0.0;
  CVector channel_estimate;  // most recent, per active tone
  double noise_var = 0.0;
  double snr_db = 0.0;
  std::optional<double> evm_db;
  int codewords_total = 0;
  int codewords_crc_ok = 0;
  std::optional<HeaderRecord> header;
  Bits payload;
  CVector equalized;  // data-tone symbols after equalization and CPE removal
  std::vector<double> cpe_rad;
  std::vector<std::string> warnings;

  bool payload_ok() const { return status == DecodeStatus::ok && codewords_crc_ok == codewords_total; }
};

DecodeReport demod_decode(const IqBuffer& iq, const PpduConfig& config, const RxOptions& options = {});

}  // namespace sda::modem
