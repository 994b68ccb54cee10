#include "sda/ppdu.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include "sda/polar.hpp"

namespace sda::modem {

Bits header_to_bits(const HeaderRecord& h) {
  if (h.payload_bits >= (1U << 24) || h.pre_pad >= (1U << 16) || h.post_pad >= (1U << 13))
    throw Error(Errc::out_of_range, "header field overflow");
  Bits out;
  auto put = [&](std::uint64_t v, int w) {
    const Bits b = uint_to_bits(v, w);
    out.insert(out.end(), b.begin(), b.end());
  };
  put(static_cast<std::uint64_t>(h.modulation), 3);
  put(h.payload_bits, 24);
  put(h.pre_pad, 16);
  put(h.post_pad, 13);
  return out;
}

HeaderRecord header_from_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() < static_cast<std::size_t>(kHeaderInfoBits))
    throw Error(Errc::size_mismatch, "header needs 56 bits");
  HeaderRecord h;
  h.modulation = modulation_from_id(static_cast<int>(bits_to_uint(bits.subspan(0, 3))));
  h.payload_bits = static_cast<std::uint32_t>(bits_to_uint(bits.subspan(3, 24)));
  h.pre_pad = static_cast<std::uint32_t>(bits_to_uint(bits.subspan(27, 16)));
  h.post_pad = static_cast<std::uint32_t>(bits_to_uint(bits.subspan(43, 13)));
  return h;
}

PadResult pad_payload(std::span<const std::uint8_t> payload, Modulation m, const PpduConfig& config) {
  config.validate();
  if (payload.size() > kMaxPayloadBits) throw Error(Errc::out_of_range, "payload exceeds 2^20 bits");
  const int b = bits_per_symbol(m);
  const auto len = static_cast<long>(payload.size());
  long n = std::max(1L, (len + kInfoBitsPerCodeword - 1) / kInfoBitsPerCodeword);
  while ((n * kPolarN) % b != 0) ++n;
  PadResult r;
  r.n_codewords = static_cast<int>(n);
  r.pre_pad = static_cast<int>(n * kInfoBitsPerCodeword - len);
  const long symbol_bits = static_cast<long>(config.n_data_tones) * b;
  r.n_payload_symbols = static_cast<int>((n * kPolarN + symbol_bits - 1) / symbol_bits);
  r.post_pad = static_cast<int>(r.n_payload_symbols * symbol_bits - n * kPolarN);
  r.info_bits.assign(static_cast<std::size_t>(r.pre_pad), 0);
  r.info_bits.insert(r.info_bits.end(), payload.begin(), payload.end());
  return r;
}

std::pair<int, int> frame_dimensions(const HeaderRecord& h, const PpduConfig& config) {
  const long info = static_cast<long>(h.payload_bits) + h.pre_pad;
  if (h.payload_bits > kMaxPayloadBits || info == 0 || info % kInfoBitsPerCodeword != 0)
    throw Error(Errc::protocol, "header padding does not align to whole codewords");
  const long n = info / kInfoBitsPerCodeword;
  const long symbol_bits = static_cast<long>(config.n_data_tones) * bits_per_symbol(h.modulation);
  const long coded = n * kPolarN + h.post_pad;
  if (coded % symbol_bits != 0) throw Error(Errc::protocol, "header post-pad does not fill whole symbols");
  return {static_cast<int>(n), static_cast<int>(coded / symbol_bits)};
}

Bits unpad(std::span<const std::uint8_t> info_bits, const HeaderRecord& header) {
  if (info_bits.size() != static_cast<std::size_t>(header.pre_pad) + header.payload_bits)
    throw Error(Errc::size_mismatch, "recovered info length disagrees with header");
  return Bits(info_bits.begin() + header.pre_pad, info_bits.end());
}

Eigen::Index Frame::payload_symbol_offset(int i) const {
  const int chests_before = i / config.chest_interval_symbols + 1;
  return header_offset() + static_cast<Eigen::Index>(1 + chests_before + i) * config.symbol_len();
}

Eigen::Index Frame::chest_symbol_offset(int i) const { return payload_symbol_offset(i) - config.symbol_len(); }

Frame frame_layout(const HeaderRecord& header, const PpduConfig& config) {
  Frame f;
  f.config = config;
  f.header = header;
  std::tie(f.n_codewords, f.n_payload_symbols) = frame_dimensions(header, config);
  for (int i = 0; i < f.n_payload_symbols; i += config.chest_interval_symbols) f.chest_positions.push_back(i);
  const ToneMap map = make_tone_map(config);
  for (int p : map.pilot) f.pilot_subcarriers.push_back(map.active[p]);
  f.preamble_samples = 2 * config.symbol_len();
  f.total_samples = f.preamble_samples +
                    static_cast<Eigen::Index>(1 + f.chest_positions.size() + f.n_payload_symbols) * config.symbol_len();
  return f;
}

const CVector& preamble_waveform(const PpduConfig& config) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int>, CVector> cache;
  const auto key = std::make_tuple(config.idft_size, config.cp_len, config.n_active_tones, config.n_dc_null);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const ToneMap map = make_tone_map(config);
    const Sequences& seq = sequences(config);
    CVector w(2 * config.symbol_len());
    w << ofdm_modulate(seq.sync_active, map, config.cp_len), ofdm_modulate(seq.ltf_active, map, config.cp_len);
    it = cache.emplace(key, std::move(w)).first;
  }
  return it->second;
}

Ppdu build_ppdu(std::span<const std::uint8_t> payload, const PpduConfig& config) {
  const PadResult pad = pad_payload(payload, config.modulation, config);
  HeaderRecord header{config.modulation, static_cast<std::uint32_t>(payload.size()),
                      static_cast<std::uint32_t>(pad.pre_pad), static_cast<std::uint32_t>(pad.post_pad)};
  Ppdu out;
  out.frame = frame_layout(header, config);
  const ToneMap map = make_tone_map(config);
  const Sequences& seq = sequences(config);
  const int sym = config.symbol_len();

  CVector& x = out.iq.samples;
  x = CVector::Zero(out.frame.total_samples);
  x.head(out.frame.preamble_samples) = preamble_waveform(config);

  const Bits header_cw = encode_codeword(header_to_bits(header));
  x.segment(out.frame.header_offset(), sym) =
      ofdm_modulate(assemble_symbol(map_symbols(header_cw, Modulation::bpsk), map, seq), map, config.cp_len);

  Bits coded;
  coded.reserve(static_cast<std::size_t>(pad.n_codewords) * kPolarN + pad.post_pad);
  for (int c = 0; c < pad.n_codewords; ++c) {
    const Bits cw = encode_codeword(std::span(pad.info_bits).subspan(static_cast<std::size_t>(c) * kInfoBitsPerCodeword,
                                                                     kInfoBitsPerCodeword));
    coded.insert(coded.end(), cw.begin(), cw.end());
  }
  coded.insert(coded.end(), static_cast<std::size_t>(pad.post_pad), 0);
  const CVector symbols = map_symbols(coded, config.modulation);

  const CVector chest = ofdm_modulate(seq.ltf_active, map, config.cp_len);
  for (int i = 0; i < pad.n_payload_symbols; ++i) {
    if (i % config.chest_interval_symbols == 0) x.segment(out.frame.chest_symbol_offset(i), sym) = chest;
    const CVector data = symbols.segment(static_cast<Eigen::Index>(i) * config.n_data_tones, config.n_data_tones);
    x.segment(out.frame.payload_symbol_offset(i), sym) =
        ofdm_modulate(assemble_symbol(data, map, seq), map, config.cp_len);
  }
  out.iq.sample_rate_hz = config.sample_rate_hz;
  out.iq.origin = Origin::tx;
  return out;
}

}  // namespace sda::modem
