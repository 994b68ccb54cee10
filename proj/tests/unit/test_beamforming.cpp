#include <doctest.h>

#include <cmath>

#include "sda/array_factor.hpp"
#include "sda/beamforming.hpp"
#include "support.hpp"

using namespace sda;
using namespace sda::beam;

namespace {

// Dense-sweep oracle on a bare 8-element line: |sum_n w_n e^{j pi n sin th}|^2,
// evaluated independently of the library kernels.
struct OracleMetrics {
  double hpbw_deg;
  double first_sidelobe_db;
};

OracleMetrics line_oracle(const std::vector<double>& amplitudes, double step_deg) {
  std::vector<double> th, g;
  for (double t = -90.0; t <= 90.0 + 1e-12; t += step_deg) {
    cplx sum = 0.0;
    for (std::size_t n = 0; n < amplitudes.size(); ++n)
      sum += amplitudes[n] * std::exp(cplx(0.0, kPi * static_cast<double>(n) * std::sin(t * kPi / 180.0)));
    th.push_back(t);
    g.push_back(10.0 * std::log10(std::norm(sum) + 1e-300));
  }
  std::size_t pk = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] > g[pk]) pk = i;
  const double peak = g[pk], half = peak - 10.0 * std::log10(2.0);
  auto edge = [&](int dir) {
    std::size_t i = pk;
    while (g[i + dir] >= half) i += dir;
    const std::size_t j = i + dir;
    return th[i] + (g[i] - half) / (g[i] - g[j]) * (th[j] - th[i]);
  };
  std::size_t r = pk;
  while (g[r + 1] <= g[r]) ++r;
  double sll = -1e9;
  for (std::size_t i = r + 1; i + 1 < g.size(); ++i)
    if (g[i] >= g[i - 1] && g[i] >= g[i + 1]) sll = std::max(sll, g[i] - peak);
  return {edge(+1) - edge(-1), sll};
}

std::vector<double> hamming8() {
  std::vector<double> a(8);
  for (int n = 0; n < 8; ++n) a[n] = 0.54 - 0.46 * std::cos(kTwoPi * n / 7.0);
  return a;
}

// Frozen from line_oracle at a 0.0005 deg step.
constexpr double kUniformHpbwDeg = 12.802;
constexpr double kUniformSidelobeDb = -12.797;
constexpr double kHammingHpbwDeg = 20.407;
constexpr double kHammingSidelobeDb = -33.621;

ArrayGeometry line8() {
  ArrayGeometry g;
  g.n_elevation = 1;
  return g;
}

}  // namespace

TEST_SUITE("beamforming") {
  TEST_CASE("oracle constants are reproduced by the oracle") {
    const auto u = line_oracle(std::vector<double>(8, 1.0), 0.001);
    CHECK(u.hpbw_deg == doctest::Approx(kUniformHpbwDeg).epsilon(1e-3));
    CHECK(u.first_sidelobe_db == doctest::Approx(kUniformSidelobeDb).epsilon(1e-3));
    const auto h = line_oracle(hamming8(), 0.001);
    CHECK(h.hpbw_deg == doctest::Approx(kHammingHpbwDeg).epsilon(1e-3));
    CHECK(h.first_sidelobe_db == doctest::Approx(kHammingSidelobeDb).epsilon(1e-3));
  }

  TEST_CASE("steering awv phases") {
    const ArrayGeometry g;
    const Awv b0 = make_steering_awv(0.0, g);
    for (const auto& w : b0.weights) {
      CHECK(w.phase == doctest::Approx(0.0));
      CHECK(w.amplitude == doctest::Approx(1.0));
    }
    const Awv p45 = make_steering_awv(45.0, g), m45 = make_steering_awv(-45.0, g);
    const double step = wrap_2pi(p45.weights[1].phase - p45.weights[0].phase);
    CHECK(step == doctest::Approx(2.2214414691).epsilon(1e-9));
    CHECK(wrap_2pi(m45.weights[1].phase - m45.weights[0].phase) == doctest::Approx(kTwoPi - step));
    // Elevation rows carry identical phases.
    for (int c = 0; c < 8; ++c) CHECK(p45.weights[c].phase == doctest::Approx(p45.weights[8 + c].phase));
    CHECK_THROWS_AS(make_steering_awv(61.0, g), Error);
    ArrayGeometry bad = g;
    bad.carrier_frequency_hz = 30e9;
    CHECK_THROWS_AS(make_steering_awv(0.0, bad), Error);
  }

  TEST_CASE("weight_to_iq examples and inverse") {
    auto [i1, q1] = weight_to_iq(1.0, 0.0);
    CHECK(i1 == doctest::Approx(1.0));
    CHECK(q1 == doctest::Approx(0.0));
    auto [i2, q2] = weight_to_iq(1.0, kPi / 2);
    CHECK(i2 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q2 == doctest::Approx(1.0));
    auto [i3, q3] = weight_to_iq(0.5, kPi / 4);
    CHECK(i3 == doctest::Approx(0.35355339).epsilon(1e-8));
    CHECK(q3 == doctest::Approx(0.35355339).epsilon(1e-8));

    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000; ++t) {
      const double a = test::uniform(rng, 0.01, 1.0), ph = test::uniform(rng, 0.0, kTwoPi);
      auto [i, q] = weight_to_iq(a, ph);
      auto [a2, ph2] = iq_to_weight(i, q);
      CHECK(std::abs(a2 - a) / a < 1e-12);
      CHECK(std::abs(wrap_pi(ph2 - ph)) < 1e-12);
    }
  }

  TEST_CASE("quantize_iq grid") {
    const auto top = quantize_iq(1.0, 0.0, 6);
    CHECK(top.i_code == 31);
    CHECK(top.q_code == 0);
    CHECK_FALSE(top.saturated);
    const auto zero = quantize_iq(0.0, 0.0, 6);
    CHECK(zero.i_code == 0);
    CHECK(zero.q_code == 0);
    CHECK(quantize_iq(1.5, -2.0, 6).saturated);
    CHECK(quantize_iq(-1.0, 0.0, 6).i_code == -32);
    CHECK_THROWS_AS(quantize_iq(0.0, 0.0, 1), Error);

    // Scan every code cell: dequantized value is within half an LSB of the input.
    for (int bits : {2, 4, 6, 9}) {
      const double step = lsb(bits);
      for (double x = -1.0; x <= 1.0; x += step / 7.0) {
        const auto c = quantize_iq(x, -x, bits);
        CHECK(std::abs(dequantize(c.i_code, bits) - x) <= step / 2 + 1e-12);
        CHECK(std::abs(dequantize(c.q_code, bits) + x) <= step / 2 + 1e-12);
      }
    }
  }

  TEST_CASE("array factor examples") {
    const ArrayGeometry g;
    const Awv b = make_steering_awv(0.0, g);
    CHECK(std::abs(array_factor(b, g, 0.0)) == doctest::Approx(16.0));

    std::vector<std::pair<double, double>> one(16, {0.0, 0.0});
    one[3] = {0.7, 1.1};
    const Awv single = make_awv(one, g);
    for (double th = -80; th <= 80; th += 7.3) CHECK(std::abs(array_factor(single, g, th)) == doctest::Approx(0.7));

    const Awv s30 = make_steering_awv(30.0, g);
    const RVector grid = uniform_grid(-90, 90, 0.1);
    Eigen::Index best = 0;
    RVector p(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) p(i) = std::abs(array_factor(s30, g, grid(i)));
    p.maxCoeff(&best);
    CHECK(std::abs(grid(best) - 30.0) <= 0.1 + 1e-9);
    CHECK_THROWS_AS(array_factor(s30, line8(), 0.0), Error);
  }

  TEST_CASE("array factor properties") {
    std::mt19937_64 rng(11);
    const ArrayGeometry g;
    for (int t = 0; t < 50; ++t) {
      std::vector<std::pair<double, double>> ap(16);
      double sum_a = 0.0;
      for (auto& [a, ph] : ap) {
        a = test::uniform(rng, 0.0, 1.0);
        ph = test::uniform(rng, 0.0, kTwoPi);
        sum_a += a;
      }
      const double c = test::uniform(rng, 0.1, 3.0), rot = test::uniform(rng, 0.0, kTwoPi);
      auto scaled = ap, rotated = ap;
      for (auto& [a, ph] : scaled) a *= c;
      for (auto& [a, ph] : rotated) ph += rot;
      const Awv w = make_awv(ap, g), ws = make_awv(scaled, g), wr = make_awv(rotated, g);
      for (double th = -90; th <= 90; th += 3.7) {
        const double m = std::abs(array_factor(w, g, th));
        CHECK(std::abs(array_factor(ws, g, th)) == doctest::Approx(c * m).epsilon(1e-10));
        CHECK(std::abs(array_factor(wr, g, th)) == doctest::Approx(m).epsilon(1e-10));
        CHECK(m <= sum_a + 1e-9);
      }
    }
    // Mirror symmetry of +-theta0 patterns with uniform amplitudes.
    for (int k = 1; k <= 21; ++k) {
      const Awv p = make_steering_awv(beam_angle_deg(k), g), m = make_steering_awv(-beam_angle_deg(k), g);
      for (double th = 0; th <= 90; th += 2.9)
        CHECK(std::abs(array_factor(p, g, th)) == doctest::Approx(std::abs(array_factor(m, g, -th))).epsilon(1e-10));
    }
  }

  TEST_CASE("template kernel matches the Awv entry point") {
    const ArrayGeometry g;
    const Awv w = make_steering_awv(13.5, g, Taper::hamming);
    const auto f = w.ideal_weights().cast<std::complex<float>>().eval();
    for (double th = -60; th <= 60; th += 10) {
      const auto af = beam::array_factor(f, 8, 0.5f, static_cast<float>(deg2rad(th)));
      CHECK(std::abs(af) == doctest::Approx(std::abs(array_factor(w, g, th))).epsilon(1e-4));
    }
  }

  TEST_CASE("compute_pattern gain and floor") {
    const ArrayGeometry g;
    const Awv b = make_steering_awv(0.0, g);
    PatternOptions iso;
    iso.element_gain_dbi = 0.0;
    const Pattern p = compute_pattern(b, g, uniform_grid(-90, 90, 0.5), iso);
    CHECK(p.gains_db.maxCoeff() == doctest::Approx(20.0 * std::log10(16.0)));
    PatternOptions cosine;
    cosine.element = ElementModel::cosine;
    const Pattern pc = compute_pattern(b, g, uniform_grid(-90, 90, 0.5), cosine);
    CHECK(pc.gains_db(0) == doctest::Approx(kPatternFloorDb));
    CHECK(pc.gains_db(pc.gains_db.size() - 1) == doctest::Approx(kPatternFloorDb));
    CHECK(pc.gains_db.maxCoeff() == doctest::Approx(kAnchorPeakGainDbi));
    CHECK_THROWS_AS(compute_pattern(b, g, RVector()), Error);
    RVector decreasing(2);
    decreasing << 1.0, 0.0;
    CHECK_THROWS_AS(compute_pattern(b, g, decreasing), Error);
  }

  TEST_CASE("pattern metrics against the dense-sweep oracle") {
    const ArrayGeometry g;
    PatternOptions opt;
    opt.reference = PatternReference::normalized;
    const RVector grid = uniform_grid(-90, 90, 0.1);
    const auto mu = pattern_metrics(compute_pattern(make_steering_awv(0.0, g), g, grid, opt));
    CHECK(mu.peak_angle_deg == doctest::Approx(0.0));
    CHECK(mu.hpbw_deg == doctest::Approx(kUniformHpbwDeg).epsilon(0.002));
    REQUIRE(mu.first_sidelobe_db);
    CHECK(*mu.first_sidelobe_db == doctest::Approx(kUniformSidelobeDb).epsilon(0.002));
    const auto mh = pattern_metrics(compute_pattern(make_steering_awv(0.0, g, Taper::hamming), g, grid, opt));
    CHECK(mh.hpbw_deg == doctest::Approx(kHammingHpbwDeg).epsilon(0.002));
    REQUIRE(mh.first_sidelobe_db);
    CHECK(*mh.first_sidelobe_db == doctest::Approx(kHammingSidelobeDb).epsilon(0.002));
  }

  TEST_CASE("single cosine element has a 90 degree beamwidth and no sidelobe") {
    ArrayGeometry one;
    one.n_azimuth = 1;
    one.n_elevation = 1;
    PatternOptions opt;
    opt.element = ElementModel::cosine;
    const auto m = pattern_metrics(compute_pattern(make_steering_awv(0.0, one), one, uniform_grid(-90, 90, 0.1), opt));
    CHECK(m.hpbw_deg == doctest::Approx(90.0).epsilon(1e-3));
    CHECK_FALSE(m.first_sidelobe_db);
  }

  TEST_CASE("pattern without a -3 dB crossing is rejected") {
    const ArrayGeometry g;
    RVector grid(2);
    grid << -0.5, 0.5;
    CHECK_THROWS_AS(pattern_metrics(compute_pattern(make_steering_awv(0.0, g), g, grid)), Error);
  }

  TEST_CASE("codebook angles and peaks") {
    const ArrayGeometry g;
    const Codebook cb = build_codebook(g);
    REQUIRE(cb.size() == 21);
    CHECK(cb.at(11).steering_angle_deg == doctest::Approx(0.0));
    CHECK(cb.at(1).steering_angle_deg == doctest::Approx(-45.0));
    CHECK(cb.at(21).steering_angle_deg == doctest::Approx(45.0));
    CHECK_THROWS_AS(cb.at(22), Error);
    CHECK_THROWS_AS(cb.at(0), Error);
    const RVector grid = uniform_grid(-90, 90, 0.05);
    for (const auto& e : cb.entries) {
      CHECK(e.awv.label == e.beam_index);
      const auto m = pattern_metrics(compute_pattern(e.awv, g, grid));
      CHECK(std::abs(m.peak_angle_deg - e.steering_angle_deg) <= 2.25);
    }
  }
}
