#include "sda/iq.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sda {

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::tx: return "tx";
    case Origin::rx: return "rx";
    case Origin::channel: return "channel";
  }
  return "?";
}

void IqBuffer::validate() const {
  if (samples.size() == 0) throw Error(Errc::invalid_argument, "IQ buffer is empty");
  if (!samples.allFinite()) throw Error(Errc::invalid_argument, "IQ buffer holds non-finite samples");
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::invalid_argument, "sample rate must be positive");
}

namespace iqfile {
namespace {

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f32_le(std::string& out, float f) {
  const auto v = std::bit_cast<std::uint32_t>(f);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int k = 0; k < width; ++k)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + k])) << (8 * k);
  return v;
}

}  // namespace

std::string encode(const IqBuffer& buffer) {
  std::string out;
  out.reserve(kHeaderSize + static_cast<std::size_t>(buffer.size()) * 8);
  out.append(kMagic, sizeof kMagic);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(static_cast<std::uint8_t>(buffer.origin) & 0x3));
  put_u64_le(out, static_cast<std::uint64_t>(std::llround(buffer.sample_rate_hz)));
  for (Eigen::Index n = 0; n < buffer.size(); ++n) {
    put_f32_le(out, static_cast<float>(buffer.samples(n).real()));
    put_f32_le(out, static_cast<float>(buffer.samples(n).imag()));
  }
  return out;
}

IqBuffer decode(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw Error(Errc::io, "not an SDAIQ file");
  if (static_cast<std::uint8_t>(bytes[6]) != kVersion) throw Error(Errc::io, "unsupported SDAIQ version");
  if ((bytes.size() - kHeaderSize) % 8 != 0) throw Error(Errc::io, "truncated SDAIQ sample block");
  const auto origin = static_cast<std::uint8_t>(bytes[7]) & 0x3;
  if (origin > 2) throw Error(Errc::io, "bad origin tag in SDAIQ header");
  IqBuffer buf;
  buf.origin = static_cast<Origin>(origin);
  buf.sample_rate_hz = static_cast<double>(get_le(bytes, 8, 8));
  const auto n = static_cast<Eigen::Index>((bytes.size() - kHeaderSize) / 8);
  buf.samples.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t off = kHeaderSize + static_cast<std::size_t>(k) * 8;
    const auto i = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, off, 4)));
    const auto q = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, off + 4, 4)));
    buf.samples(k) = cplx(i, q);
  }
  return buf;
}

void write(const std::filesystem::path& path, const IqBuffer& buffer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  const std::string bytes = encode(buffer);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

IqBuffer read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace iqfile
}  // namespace sda
