#include <doctest.h>

#include <filesystem>

#include "sda/iq.hpp"
#include "support.hpp"

using namespace sda;

TEST_SUITE("iq_file") {
  TEST_CASE("header bytes are bit exact") {
    IqBuffer b;
    b.samples = CVector(1);
    b.samples(0) = cplx(1.0, -2.0);
    b.origin = Origin::rx;
    const std::string s = iqfile::encode(b);
    REQUIRE(s.size() == 24);
    const unsigned char expect[24] = {'S', 'D', 'A', 'I', 'Q', 0,    1,    1,    0x00, 0x80, 0x8d, 0x5b,
                                      0,   0,   0,   0,   0,   0, 0x80, 0x3f, 0,    0,    0,    0xc0};
    for (int i = 0; i < 24; ++i) CHECK(static_cast<unsigned char>(s[i]) == expect[i]);
  }

  TEST_CASE("round trip through a file") {
    std::mt19937_64 rng(18);
    IqBuffer b;
    b.samples = test::awgn(rng, 1000, 1.0);
    b.origin = Origin::channel;
    b.sample_rate_hz = 2.4e9;
    const auto path = std::filesystem::temp_directory_path() / "sda_iq_roundtrip.sdaiq";
    iqfile::write(path, b);
    const IqBuffer r = iqfile::read(path);
    std::filesystem::remove(path);
    CHECK(r.origin == Origin::channel);
    CHECK(r.sample_rate_hz == 2.4e9);
    REQUIRE(r.size() == 1000);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      CHECK(r.samples(i).real() == static_cast<float>(b.samples(i).real()));
      CHECK(r.samples(i).imag() == static_cast<float>(b.samples(i).imag()));
    }
  }

  TEST_CASE("malformed inputs") {
    CHECK_THROWS_AS(iqfile::decode("SDAIQ"), Error);
    std::string bad_magic(16, '\0');
    CHECK_THROWS_AS(iqfile::decode(bad_magic), Error);
    IqBuffer b;
    b.samples = CVector::Ones(2);
    std::string s = iqfile::encode(b);
    s[6] = 2;
    CHECK_THROWS_AS(iqfile::decode(s), Error);
    s = iqfile::encode(b);
    s.pop_back();
    CHECK_THROWS_AS(iqfile::decode(s), Error);
    try {
      iqfile::read("/nonexistent/dir/file.sdaiq");
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::io);
    }
    IqBuffer empty;
    CHECK_THROWS_AS(empty.validate(), Error);
  }
}
