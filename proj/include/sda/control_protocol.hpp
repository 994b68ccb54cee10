#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sda/common.hpp"

namespace sda::control {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 5225;
inline constexpr const char* kBindEnvVar = "SDA_BIND";
inline constexpr std::uint32_t kMaxFrameBytes = 16U << 20;

/// 4-byte big-endian length followed by the UTF-8 JSON body.
std::string encode_frame(const nlohmann::json& body);
std::string encode_frame_raw(std::string_view body);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// Next complete body, if any. Throws protocol on an oversized length prefix.
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

nlohmann::json make_request(const nlohmann::json& id, const std::string& cmd, const nlohmann::json& args);
nlohmann::json make_ok(const nlohmann::json& id, const nlohmann::json& result);
nlohmann::json make_error(const nlohmann::json& id, Errc code, const std::string& message);
nlohmann::json make_error(const nlohmann::json& id, const std::string& code, const std::string& message);
nlohmann::json make_progress(const nlohmann::json& id, int done, int total);

struct BindAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
};

/// "host", "host:port" or ":port".
BindAddress parse_bind(const std::string& text);
/// From SDA_BIND when set, else the default.
BindAddress bind_from_env();

}  // namespace sda::control
