#include <doctest.h>

#include <set>

#include "sda/comet.hpp"
#include "sda/scenario.hpp"
#include "support.hpp"

using namespace sda;
using namespace sda::comet;

namespace {

Eigen::MatrixXcd outer(const CVector& z) { return z * z.adjoint(); }

CVector align_global_phase(const CVector& est, const CVector& truth, int ref) {
  return est * std::polar(1.0, std::arg(truth(ref)) - std::arg(est(ref)));
}

double projection(const RVector& p, int index) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < p.size(); ++t) acc += p(t) * walsh(index, static_cast<int>(t));
  return acc / static_cast<double>(p.size());
}

}  // namespace

TEST_SUITE("comet") {
  TEST_CASE("walsh rows are orthogonal") {
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b) {
        int acc = 0;
        for (int t = 0; t < 16; ++t) acc += walsh(a, t) * walsh(b, t);
        CHECK(acc == (a == b ? 16 : 0));
      }
  }

  TEST_CASE("two elements need four chips") {
    const CodeSet cs = gen_codes(2);
    CHECK(cs.length() == 4);
    CHECK(cs.codes.row(0) != cs.codes.row(1));
    for (int n = 0; n < 2; ++n) CHECK(cs.codes.row(n).sum() == 2.0);
  }

  TEST_CASE("product projections match the algebraic expansion") {
    const CodeSet cs = gen_codes(4);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const int a = cs.walsh_indices[i], b = cs.walsh_indices[j];
        const RVector prod = cs.codes.row(i).cwiseProduct(cs.codes.row(j)).transpose();
        const std::set<int> support{0, a, b, a ^ b};
        for (int k = 0; k < cs.length(); ++k)
          CHECK(projection(prod, k) == doctest::Approx(support.count(k) ? 0.25 : 0.0));
      }
  }

  TEST_CASE("sixteen elements: separable xor set, smallest length") {
    const CodeSet cs = gen_codes(16);
    CHECK(cs.length() == 256);
    std::vector<int> idx{0};
    idx.insert(idx.end(), cs.walsh_indices.begin(), cs.walsh_indices.end());
    std::set<int> xors;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i + 1; j < idx.size(); ++j) xors.insert(idx[i] ^ idx[j]);
    CHECK(xors.size() == idx.size() * (idx.size() - 1) / 2);
    // 137 distinct non-zero components cannot fit a 128-row basis.
    CHECK_THROWS_AS(gen_codes(16, 7), Error);
    CHECK_THROWS_AS(gen_codes(16, 5), Error);
    CHECK_THROWS_AS(gen_codes(0), Error);
  }

  TEST_CASE("detector examples") {
    const CodeSet cs = gen_codes(2);
    CVector z = CVector::Zero(2);
    z(0) = cplx(0.6, 0.8);
    RVector p = simulate_detector(z, cs);
    for (int t = 0; t < 4; ++t) CHECK(p(t) == doctest::Approx(cs.codes(0, t) * 1.0));
    z(1) = z(0);
    p = simulate_detector(z, cs);
    z(1) = -z(0);
    const RVector q = simulate_detector(z, cs);
    for (int t = 0; t < 4; ++t)
      if (cs.codes(0, t) == 1 && cs.codes(1, t) == 1) {
        CHECK(p(t) == doctest::Approx(4.0));
        CHECK(q(t) == doctest::Approx(0.0));
      }
    CHECK_THROWS_AS(simulate_detector(CVector::Zero(3), cs), Error);
    std::mt19937_64 rng(22);
    const CodeSet c16 = gen_codes(16);
    for (int t = 0; t < 20; ++t) CHECK(simulate_detector(test::random_gains(rng, 16), c16, 0.5, t).minCoeff() >= 0.0);
  }

  TEST_CASE("correlation round trip, zero gains, hermitian") {
    const CodeSet cs = gen_codes(16);
    std::mt19937_64 rng(23);
    for (int t = 0; t < 50; ++t) {
      const CVector z = test::random_gains(rng, 16);
      const Eigen::MatrixXcd r = extract_correlations(measure(z, cs), cs);
      CHECK((r - outer(z)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((r - r.adjoint()).norm() == 0.0);
    }
    const Eigen::MatrixXcd zero = extract_correlations(measure(CVector::Zero(16), cs), cs);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(extract_correlations({RVector::Zero(256)}, cs), Error);
  }

  TEST_CASE("correlation error scales with detector noise") {
    const CodeSet cs = gen_codes(8);
    std::mt19937_64 rng(24);
    const CVector z = test::random_gains(rng, 8, 0.8, 1.2);
    auto rms_error = [&](double sigma) {
      double acc = 0.0;
      for (int s = 0; s < 200; ++s) acc += (extract_correlations(measure(z, cs, sigma, s), cs) - outer(z)).squaredNorm();
      return std::sqrt(acc / 200.0);
    };
    const double e1 = rms_error(1e-3), e2 = rms_error(2e-3);
    CHECK(e2 / e1 == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("solve_elements recovers gains up to a global phase") {
    const CodeSet cs = gen_codes(16);
    std::mt19937_64 rng(25);
    for (int t = 0; t < 100; ++t) {
      const CVector z = test::random_gains(rng, 16);
      const ElementSolution s = solve_elements(extract_correlations(measure(z, cs), cs));
      CHECK(s.reference == 0);
      CHECK(std::arg(s.gains(0)) == doctest::Approx(0.0));
      const CVector a = align_global_phase(s.gains, z, 0);
      for (int e = 0; e < 16; ++e) {
        CHECK(std::abs(pow2db(std::norm(a(e))) - pow2db(std::norm(z(e)))) < 1e-6);
        CHECK(std::abs(rad2deg(wrap_pi(std::arg(a(e)) - std::arg(z(e))))) < 1e-4);
      }
    }
  }

  TEST_CASE("identical elements and the global-phase gauge") {
    const CodeSet cs = gen_codes(16);
    const ElementSolution same = solve_elements(extract_correlations(measure(CVector::Constant(16, cplx(0.0, 2.0)), cs), cs));
    for (int e = 0; e < 16; ++e) {
      CHECK(std::abs(same.gains(e)) == doctest::Approx(2.0));
      CHECK(std::abs(std::arg(same.gains(e))) < 1e-9);
    }
    std::mt19937_64 rng(26);
    const CVector z = test::random_gains(rng, 16);
    const CVector a = solve_elements(extract_correlations(measure(z, cs), cs)).gains;
    const CVector b = solve_elements(extract_correlations(measure(z * std::polar(1.0, 1.234), cs), cs)).gains;
    CHECK((a - b).norm() < 1e-9);
  }

  TEST_CASE("dead elements") {
    const CodeSet cs = gen_codes(16);
    std::mt19937_64 rng(27);
    CVector z = test::random_gains(rng, 16);
    z(5) = 0.0;
    ElementSolution s = solve_elements(extract_correlations(measure(z, cs), cs));
    CHECK(s.dead_elements == std::vector<int>{5});
    CHECK(s.gains(5) == cplx(0.0, 0.0));
    const CVector a = align_global_phase(s.gains, z, 0);
    for (int e = 0; e < 16; ++e)
      if (e != 5) CHECK(std::abs(a(e) - z(e)) < 1e-9);

    z(0) = 0.0;
    s = solve_elements(extract_correlations(measure(z, cs), cs));
    CHECK(s.reference != 0);
    CHECK(s.dead_elements.size() == 2);
    CHECK_FALSE(s.notes.empty());
    const CVector b = align_global_phase(s.gains, z, s.reference);
    for (int e = 0; e < 16; ++e) CHECK(std::abs(b(e) - z(e)) < 1e-9);
  }

  TEST_CASE("ideal interpolator gives a flat gain table") {
    ArrayModel m;
    m.interpolator.dac_bits = 0;
    m.interpolator.current_steering = 0.0;
    std::vector<double> phases;
    for (double p = 0; p < 360; p += 15) phases.push_back(p);
    const auto rows = sweep_phase_settings(m, phases, gen_codes(16));
    REQUIRE(rows.size() == phases.size() * 16);
    for (const auto& r : rows) {
      CHECK(std::abs(r.gain_db) < 1e-6);
      CHECK(r.phase_deg >= 0.0);
      CHECK(r.phase_deg < 360.0);
      CHECK(std::abs(wrap_pi(deg2rad(r.phase_deg - r.commanded_phase_deg))) < 1e-6);
    }
  }

  TEST_CASE("quantized interpolator ripple peaks on the axes") {
    ArrayModel m;
    std::vector<double> phases;
    for (double p = 0; p < 360; p += 5.625) phases.push_back(p);
    const auto rows = sweep_phase_settings(m, phases, gen_codes(16));
    std::vector<double> g(phases.size());
    for (const auto& r : rows)
      if (r.element_id == 3) g[static_cast<std::size_t>(std::lround(r.commanded_phase_deg / 5.625))] = r.gain_db;
    const auto n = g.size();
    std::vector<double> maxima;
    for (std::size_t i = 0; i < n; ++i)
      if (g[i] > g[(i + n - 1) % n] && g[i] >= g[(i + 1) % n]) maxima.push_back(phases[i]);
    CHECK(maxima == std::vector<double>{0.0, 90.0, 180.0, 270.0});
  }

  TEST_CASE("injected gain spread is extracted") {
    Scenario s;
    s.comet.gain_spread_db = 4.5;
    const ArrayModel m = make_comet_model(s, 9);
    const auto rows = sweep_phase_settings(m, {0.0, 45.0, 90.0}, gen_codes(16));
    for (double p : {0.0, 45.0, 90.0}) CHECK(std::abs(gain_spread_db(rows, p) - 4.5) <= 0.1);
    CHECK_THROWS_AS(gain_spread_db(rows, 10.0), Error);
  }
}
