#include <doctest.h>

#include <string>

#include "sda/ppdu.hpp"
#include "sda/receiver.hpp"
#include "support.hpp"

using namespace sda;
using namespace sda::modem;

namespace {

IqBuffer place(const IqBuffer& tx, Eigen::Index delay, double cfo_hz = 0.0, double noise_var = 0.0,
               std::uint64_t seed = 1) {
  IqBuffer rx;
  rx.origin = Origin::rx;
  rx.sample_rate_hz = tx.sample_rate_hz;
  rx.samples = CVector::Zero(tx.size() + delay + 320);
  rx.samples.segment(delay, tx.size()) = tx.samples;
  if (cfo_hz != 0.0) correct_cfo(rx.samples, -cfo_hz, rx.sample_rate_hz);
  if (noise_var > 0.0) {
    std::mt19937_64 rng(seed);
    rx.samples += test::awgn(rng, rx.size(), noise_var);
  }
  return rx;
}

PpduConfig with(Modulation m) {
  PpduConfig c;
  c.modulation = m;
  return c;
}

Bits ascii(const std::string& s) {
  return bytes_to_bits(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace

TEST_SUITE("receiver") {
  TEST_CASE("synchronize at zero offset") {
    const PpduConfig cfg;
    const Ppdu p = build_ppdu(ascii("sync"), cfg);
    const SyncResult s = synchronize(p.iq, cfg);
    CHECK(s.timing_offset == 0);
    CHECK(std::abs(s.cfo_hz) < 1e3);
    CHECK(s.metric > 0.9);
  }

  TEST_CASE("integer delays are recovered exactly") {
    const PpduConfig cfg;
    const Ppdu p = build_ppdu(ascii("delay"), cfg);
    for (Eigen::Index d : {1, 7, 37, 100, 319, 1000, 4097}) CHECK(synchronize(place(p.iq, d), cfg).timing_offset == d);
  }

  TEST_CASE("cfo estimate within 2 percent") {
    const PpduConfig cfg;
    const Ppdu p = build_ppdu(ascii("cfo"), cfg);
    for (double f : {1e6, -1e6, 2.5e6}) {
      const SyncResult s = synchronize(place(p.iq, 55, f), cfg);
      CHECK(s.timing_offset == 55);
      CHECK(std::abs(s.cfo_hz - f) <= 0.02 * std::abs(f));
    }
  }

  TEST_CASE("noise alone is not a frame") {
    std::mt19937_64 rng(12);
    IqBuffer iq;
    iq.samples = test::awgn(rng, 5000, 1.0);
    CHECK_THROWS_AS(synchronize(iq, PpduConfig{}), Error);
    const DecodeReport rep = demod_decode(iq, PpduConfig{});
    CHECK(rep.status == DecodeStatus::sync_not_found);
    CHECK_FALSE(rep.payload_ok());
  }

  TEST_CASE("least squares estimate: identity, two taps, notch") {
    const PpduConfig cfg;
    const ToneMap map = make_tone_map(cfg);
    const Sequences& seq = sequences(cfg);
    const CVector ltf = ofdm_modulate(seq.ltf_active, map, cfg.cp_len);

    const CVector h_id = estimate_channel(ofdm_demodulate(ltf.tail(256), map), seq.ltf_active);
    CHECK((h_id.array() - 1.0).abs().maxCoeff() < 1e-10);

    const cplx h0(0.9, -0.2), h1(-0.3, 0.25);
    const int lag = 3;
    CVector y = h0 * ltf;
    y.tail(320 - lag) += h1 * ltf.head(320 - lag);
    const CVector h2 = estimate_channel(ofdm_demodulate(y.tail(256), map), seq.ltf_active);
    for (std::size_t i = 0; i < map.active.size(); ++i) {
      const cplx expect = h0 + h1 * std::polar(1.0, -kTwoPi * map.active[i] * lag / 256.0);
      CHECK(std::abs(h2(static_cast<Eigen::Index>(i)) - expect) < 1e-6);
    }

    CVector tones = ofdm_demodulate(ltf.tail(256), map);
    tones(40) *= 0.5;
    CHECK(std::abs(estimate_channel(tones, seq.ltf_active)(40)) == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("delay-domain refinement keeps a sparse channel and tolerates noise") {
    const PpduConfig cfg;
    const ToneMap map = make_tone_map(cfg);
    CVector h(192);
    for (std::size_t i = 0; i < 192; ++i)
      h(static_cast<Eigen::Index>(i)) = cplx(0.8, 0.1) + cplx(0.2, -0.3) * std::polar(1.0, -kTwoPi * map.active[i] * 5 / 256.0);
    CHECK((refine_channel(h, map, 64, 1e-9) - h).norm() / h.norm() < 1e-3);
    std::mt19937_64 rng(13);
    const CVector noisy = h + test::awgn(rng, 192, 0.01);
    CHECK((refine_channel(noisy, map, 64, 0.01) - h).squaredNorm() < (noisy - h).squaredNorm());
  }

  TEST_CASE("cpe: none, constant, ramp") {
    const PpduConfig cfg;
    const ToneMap map = make_tone_map(cfg);
    const Sequences& seq = sequences(cfg);
    std::mt19937_64 rng(14);
    const CVector data = map_symbols(test::random_bits(rng, 128 * 2), Modulation::qam4);
    const CVector x = assemble_symbol(data, map, seq);
    const CVector h = CVector::Ones(192);
    CHECK(std::abs(track_cpe(x, h, map, seq)) < 1e-9);
    CHECK(track_cpe(x * std::polar(1.0, 0.1), h, map, seq) == doctest::Approx(0.1).epsilon(1e-3));

    // Per-symbol phase ramp injected after the transmitter, through the whole receive chain.
    const Ppdu p = build_ppdu(test::random_bits(rng, 14 * 56), with(Modulation::qam4));
    REQUIRE(p.frame.n_payload_symbols == 7);
    IqBuffer rx = p.iq;
    for (int i = 0; i < p.frame.n_payload_symbols; ++i)
      rx.samples.segment(p.frame.payload_symbol_offset(i), 320) *= std::polar(1.0, 0.03 * i);
    const DecodeReport rep = demod_decode(place(rx, 20), with(Modulation::qam4));
    REQUIRE(rep.payload_ok());
    REQUIRE(rep.cpe_rad.size() == 7);
    for (int i = 0; i < 7; ++i) CHECK(rep.cpe_rad[i] == doctest::Approx(0.03 * i).epsilon(1e-6));
  }

  TEST_CASE("noiseless loopback property") {
    std::mt19937_64 rng(15);
    for (int t = 0; t < 40; ++t) {
      const Modulation m = modulation_from_id(t % 4);
      const Bits payload = test::random_bits(rng, static_cast<std::size_t>(test::uniform_int(rng, 0, 4096)));
      const Ppdu p = build_ppdu(payload, with(m));
      const DecodeReport rep = demod_decode(place(p.iq, test::uniform_int(rng, 0, 500)), with(m));
      REQUIRE(rep.status == DecodeStatus::ok);
      CHECK(rep.payload_ok());
      CHECK(rep.payload == payload);
      CHECK(rep.header->modulation == m);
    }
  }

  TEST_CASE("ascii payload in every modulation") {
    const Bits text = ascii("The quick brown fox jumps over the lazy dog 0123456789");
    for (int id = 0; id < 4; ++id) {
      const Modulation m = modulation_from_id(id);
      const DecodeReport rep = demod_decode(place(build_ppdu(text, with(m)).iq, 64, 3e5), with(m));
      CHECK(rep.payload_ok());
      CHECK(rep.payload == text);
    }
  }

  TEST_CASE("awgn: 30 dB recovers 64-qam, 0 dB reports crc failures") {
    std::mt19937_64 rng(16);
    const Bits payload = test::random_bits(rng, 3000);
    const Ppdu p = build_ppdu(payload, with(Modulation::qam64));
    const DecodeReport good = demod_decode(place(p.iq, 90, 0.0, db2pow(-30.0), 1), with(Modulation::qam64));
    CHECK(good.payload_ok());
    CHECK(good.payload == payload);
    REQUIRE(good.evm_db);
    CHECK(*good.evm_db <= -29.0);
    CHECK(good.snr_db == doctest::Approx(30.0).epsilon(0.03));

    const DecodeReport bad = demod_decode(place(p.iq, 90, 0.0, 1.0, 2), with(Modulation::qam64));
    if (bad.status == DecodeStatus::ok) {
      CHECK(bad.codewords_crc_ok < bad.codewords_total);
      CHECK(bad.evm_db.has_value());
    } else {
      CHECK_FALSE(bad.payload_ok());
    }
  }

  TEST_CASE("missing chest symbol raises a stale-estimate warning") {
    const Bits payload(17 * 56, 1);
    const Ppdu p = build_ppdu(payload, PpduConfig{});
    IqBuffer rx = p.iq;
    rx.samples.segment(p.frame.chest_symbol_offset(16), 320).setZero();
    const DecodeReport rep = demod_decode(rx, PpduConfig{});
    REQUIRE(rep.status == DecodeStatus::ok);
    CHECK(rep.payload == payload);
    bool stale = false;
    for (const auto& w : rep.warnings) stale = stale || w.find("stale") != std::string::npos;
    CHECK(stale);
  }

  TEST_CASE("corrupted header and truncated frame") {
    const PpduConfig cfg;
    const Ppdu p = build_ppdu(Bits(500, 1), cfg);
    IqBuffer rx = p.iq;
    std::mt19937_64 rng(17);
    rx.samples.segment(p.frame.header_offset(), 320) = test::awgn(rng, 320, 1.0);
    CHECK(demod_decode(rx, cfg).status == DecodeStatus::header_crc_fail);

    IqBuffer cut = p.iq;
    cut.samples.conservativeResize(p.iq.size() - 500);
    const DecodeReport rep = demod_decode(cut, cfg);
    CHECK(rep.status == DecodeStatus::truncated);
    CHECK(rep.header.has_value());
  }
}
