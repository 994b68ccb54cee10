#include "sda/control_protocol.hpp"

#include <cstdlib>

namespace sda::control {

using nlohmann::json;

std::string encode_frame_raw(std::string_view body) {
  if (body.size() > kMaxFrameBytes) throw Error(Errc::protocol, "frame exceeds 16 MiB");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xffU));
  out.append(body);
  return out;
}

std::string encode_frame(const json& body) { return encode_frame_raw(body.dump()); }

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(buffer_[i]);
  if (n > kMaxFrameBytes) throw Error(Errc::protocol, "frame length " + std::to_string(n) + " exceeds 16 MiB");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  return body;
}

json make_request(const json& id, const std::string& cmd, const json& args) {
  return json{{"v", kProtocolVersion}, {"id", id}, {"cmd", cmd}, {"args", args}};
}

json make_ok(const json& id, const json& result) {
  return json{{"v", kProtocolVersion}, {"id", id}, {"status", "ok"}, {"result", result}};
}

json make_error(const json& id, const std::string& code, const std::string& message) {
  return json{{"v", kProtocolVersion}, {"id", id}, {"status", "error"},
              {"error", {{"code", code}, {"message", message}}}};
}

json make_error(const json& id, Errc code, const std::string& message) {
  return make_error(id, std::string(to_string(code)), message);
}

json make_progress(const json& id, int done, int total) {
  return json{{"v", kProtocolVersion}, {"id", id}, {"event", "progress"}, {"done", done}, {"total", total}};
}

BindAddress parse_bind(const std::string& text) {
  BindAddress b;
  const auto colon = text.rfind(':');
  const std::string host = colon == std::string::npos ? text : text.substr(0, colon);
  if (!host.empty()) b.host = host;
  if (colon != std::string::npos) {
    const std::string port = text.substr(colon + 1);
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end != '\0' || p < 0 || p > 65535)
      throw Error(Errc::invalid_argument, "bad port in bind address '" + text + "'");
    b.port = static_cast<std::uint16_t>(p);
  }
  return b;
}

BindAddress bind_from_env() {
  const char* env = std::getenv(kBindEnvVar);
  return env && *env ? parse_bind(env) : BindAddress{};
}

}  // namespace sda::control
