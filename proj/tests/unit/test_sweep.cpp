#include <doctest.h>

#include "sda/scenario.hpp"
#include "sda/serialization.hpp"
#include "sda/sweep.hpp"

using namespace sda;
using namespace sda::sweep;

namespace {

SnrMatrix blank(double v = 0.0) {
  SnrMatrix m;
  m.values_db = Eigen::MatrixXd::Constant(21, 21, v);
  m.decode_ok.setConstant(21, 21, true);
  return m;
}

const SweepResult& los_result() {
  static const SweepResult r = run_sweep(make_sweep_config(load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json"), 7, 1));
  return r;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("beam announcement round trip") {
    for (int k = 1; k <= 21; ++k) CHECK(parse_announcement(beam_announcement(k)) == k);
    CHECK(parse_announcement(modem::Bits(16, 0)) == 0);
    CHECK(parse_announcement(modem::Bits(8, 1)) == 0);
    CHECK_THROWS_AS(beam_announcement(0), Error);
  }

  TEST_CASE("select_best") {
    SnrMatrix m = blank();
    m.values_db(4, 6) = 9.0;
    CHECK(select_best(m) == std::pair<int, int>{5, 7});
    m.values_db(2, 19) = 9.0;
    CHECK(select_best(m) == std::pair<int, int>{3, 20});
    m.values_db(2, 1) = 9.0;
    CHECK(select_best(m) == std::pair<int, int>{3, 2});
    m.decode_ok(2, 1) = false;
    CHECK(select_best(m) == std::pair<int, int>{3, 20});
    m.decode_ok.setConstant(false);
    CHECK_THROWS_AS(select_best(m), Error);
  }

  TEST_CASE("detect_secondary_peaks") {
    SnrMatrix m = blank();
    m.values_db(10, 10) = 30.0;
    m.values_db(9, 10) = 25.0;  // inside the global neighbourhood
    m.values_db(4, 16) = 17.0;
    m.values_db(4, 17) = 17.0;  // plateau: reported once, at the row-major first cell
    m.values_db(18, 2) = 14.0;  // below 30 - 15
    auto peaks = detect_secondary_peaks(m, 15.0);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].tx == 5);
    CHECK(peaks[0].rx == 17);
    CHECK(peaks[0].snr_db == 17.0);
    CHECK(detect_secondary_peaks(m, 0.0).empty());
    CHECK(detect_secondary_peaks(blank(), 15.0).empty());
  }

  TEST_CASE("los sweep: aligned argmax, no secondary peaks, 441 cells") {
    const SweepResult& r = los_result();
    const Scenario s = load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json");
    CHECK(r.best_pair == channel::aligned_indices(s.channel, s.codebook()));
    CHECK(r.best_pair == std::pair<int, int>{11, 11});
    CHECK(r.cells_visited == 441);
    CHECK(r.frames_total == 441 * 3);
    CHECK(r.matrix.at(11, 11) == doctest::Approx(30.0).epsilon(1.0 / 30.0));
    CHECK(r.secondary_peaks.empty());
    CHECK(r.matrix.values_db.minCoeff() >= s.sweep.floor_db);
  }

  TEST_CASE("los sweep: unimodal along the best rx column") {
    const SweepResult& r = los_result();
    const int rx = r.best_pair.second, best = r.best_pair.first;
    // Non-increasing away from the peak inside the main lobe, one index of jitter allowed.
    int violations = 0;
    for (int t = best; t < std::min(21, best + 4); ++t) violations += r.matrix.at(t + 1, rx) > r.matrix.at(t, rx);
    for (int t = best; t > std::max(1, best - 4); --t) violations += r.matrix.at(t - 1, rx) > r.matrix.at(t, rx);
    CHECK(violations <= 1);
  }

  TEST_CASE("parallel schedule matches sequential bytes") {
    const Scenario s = load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json");
    const SweepResult par = run_sweep(make_sweep_config(s, 7, 3));
    const ArtifactMeta meta{"sweep", 7, {}};
    CHECK(snr_matrix_csv(par.matrix, meta) == snr_matrix_csv(los_result().matrix, meta));
    CHECK(par.matrix.decode_ok == los_result().matrix.decode_ok);
  }

  TEST_CASE("progress callback sees every cell") {
    Scenario s = load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json");
    SweepConfig cfg = make_sweep_config(s, 3, 2);
    cfg.frames_per_position = 1;
    int calls = 0, last = 0;
    run_sweep(cfg, [&](int done, int total) {
      ++calls;
      CHECK(total == 441);
      CHECK(done == last + 1);
      last = done;
    });
    CHECK(calls == 441);
  }

  TEST_CASE("config validation") {
    SweepConfig cfg = make_sweep_config(load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json"), 1, 1);
    cfg.frames_per_position = 0;
    CHECK_THROWS_AS(run_sweep(cfg), Error);
    cfg.frames_per_position = 1;
    cfg.rx_codebook.entries.pop_back();
    CHECK_THROWS_AS(run_sweep(cfg), Error);
  }
}
