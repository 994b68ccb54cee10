#include "sda/sweep.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "sda/receiver.hpp"

namespace sda::sweep {

namespace {
constexpr std::uint8_t kAnnounceMarker = 0xA5;

struct FrameOutcome {
  bool measured = false;
  double snr_linear = 0.0;
  int decoded_tx = 0;  // 0 when the payload did not decode
};
}  // namespace

void SweepConfig::validate() const {
  if (tx_codebook.size() != rx_codebook.size() || tx_codebook.size() == 0)
    throw Error(Errc::invalid_argument, "TX and RX codebooks must have equal, non-zero length");
  if (frames_per_position < 1) throw Error(Errc::invalid_argument, "frames per position must be at least 1");
  if (threads < 0) throw Error(Errc::invalid_argument, "thread count must be non-negative");
  if (!(secondary_threshold_db >= 0.0)) throw Error(Errc::invalid_argument, "peak threshold must be non-negative");
  channel.validate();
  ppdu.validate();
}

modem::Bits beam_announcement(int tx_index) {
  if (tx_index < 1 || tx_index > 255) throw Error(Errc::out_of_range, "beam index must fit one byte");
  const std::uint8_t bytes[2] = {kAnnounceMarker, static_cast<std::uint8_t>(tx_index)};
  return modem::bytes_to_bits(bytes);
}

int parse_announcement(const modem::Bits& payload) {
  if (payload.size() != 16) return 0;
  const auto bytes = modem::bits_to_bytes(payload);
  return bytes[0] == kAnnounceMarker ? bytes[1] : 0;
}

SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress) {
  config.validate();
  channel::ChannelConfig chan = config.channel;
  if (chan.noise.mode == channel::NoiseMode::target_snr)
    chan = channel::calibrate_to_snr(chan, config.tx_codebook, config.rx_codebook, chan.noise.target_snr_db);

  const int n = config.tx_codebook.size();
  const int fpp = config.frames_per_position;
  std::vector<modem::Ppdu> frames;
  frames.reserve(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) frames.push_back(modem::build_ppdu(beam_announcement(t), config.ppdu));

  const int cells = n * n;
  std::vector<FrameOutcome> outcomes(static_cast<std::size_t>(cells * fpp));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mu;

  auto worker = [&] {
    for (int cell = next++; cell < cells; cell = next++) {
      const int tx = cell / n + 1, rx = cell % n + 1;
      for (int f = 0; f < fpp; ++f) {
        channel::ChannelConfig c = chan;
        c.rng_seed = derive_seed(config.seed, static_cast<std::uint64_t>(tx), static_cast<std::uint64_t>(rx),
                                 static_cast<std::uint64_t>(f));
        const IqBuffer rx_iq = channel::propagate(frames[tx - 1].iq, config.tx_codebook.at(tx).awv,
                                                  config.rx_codebook.at(rx).awv, c);
        const modem::DecodeReport rep = modem::demod_decode(rx_iq, config.ppdu);
        FrameOutcome& o = outcomes[static_cast<std::size_t>(cell * fpp + f)];
        o.measured = rep.status != modem::DecodeStatus::sync_not_found;
        o.snr_linear = o.measured ? db2pow(rep.snr_db) : 0.0;
        if (rep.payload_ok()) o.decoded_tx = parse_announcement(rep.payload);
      }
      const int d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(d, cells);
      }
    }
  };

  int threads = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : config.threads;
  threads = std::clamp(threads, 1, cells);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  // Accumulate in schedule order so the result is independent of thread timing.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n, n);
  SweepResult res;
  res.matrix.decode_ok.setConstant(n, n, false);
  for (int cell = 0; cell < cells; ++cell) {
    const int tx = cell / n + 1, rx = cell % n + 1;
    for (int f = 0; f < fpp; ++f) {
      const FrameOutcome& o = outcomes[static_cast<std::size_t>(cell * fpp + f)];
      const bool ok = o.decoded_tx >= 1 && o.decoded_tx <= n;
      const int row = (ok ? o.decoded_tx : tx) - 1;
      ++res.frames_total;
      if (ok) {
        ++res.frames_decoded;
        res.matrix.decode_ok(row, rx - 1) = true;
      }
      if (o.measured) {
        sum(row, rx - 1) += o.snr_linear;
        ++count(row, rx - 1);
      }
    }
  }
  res.matrix.values_db.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      res.matrix.values_db(i, j) =
          count(i, j) > 0 ? std::max(config.floor_db, pow2db(sum(i, j) / count(i, j))) : config.floor_db;
  res.cells_visited = cells;
  res.best_pair = select_best(res.matrix);
  res.secondary_peaks = detect_secondary_peaks(res.matrix, config.secondary_threshold_db);
  return res;
}

std::pair<int, int> select_best(const SnrMatrix& m) {
  std::pair<int, int> best{0, 0};
  double best_v = 0.0;
  for (int i = 0; i < m.values_db.rows(); ++i)
    for (int j = 0; j < m.values_db.cols(); ++j)
      if (m.decode_ok(i, j) && (best.first == 0 || m.values_db(i, j) > best_v)) {
        best = {i + 1, j + 1};
        best_v = m.values_db(i, j);
      }
  if (best.first == 0) throw Error(Errc::not_found, "no beam pair decoded");
  return best;
}

std::vector<Peak> detect_secondary_peaks(const SnrMatrix& m, double threshold_db) {
  const Eigen::MatrixXd& v = m.values_db;
  std::vector<Peak> peaks;
  if (v.size() == 0) return peaks;
  Eigen::Index gi = 0, gj = 0;
  // Eigen's maxCoeff returns the first maximum in column-major order; scan row-major for the tie rule.
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (v(i, j) > v(gi, gj)) gi = i, gj = j;
  const double level = v(gi, gj) - threshold_db;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (std::abs(i - gi) <= 1 && std::abs(j - gj) <= 1) continue;
      if (!(v(i, j) > level)) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const Eigen::Index a = i + di, b = j + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= v.rows() || b >= v.cols()) continue;
          // Equal neighbors earlier in row-major order own the plateau.
          if (v(a, b) > v(i, j) || (v(a, b) == v(i, j) && (a < i || (a == i && b < j)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1), v(i, j)});
    }
  }
  return peaks;
}

}  // namespace sda::sweep
