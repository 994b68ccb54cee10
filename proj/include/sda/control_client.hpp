#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "sda/control_protocol.hpp"

namespace sda::control {

class ControlClient {
 public:
  ControlClient() = default;
  ~ControlClient();
  ControlClient(const ControlClient&) = delete;
  ControlClient& operator=(const ControlClient&) = delete;

  void connect(const std::string& host, std::uint16_t port);
  void close();
  bool connected() const { return fd_ >= 0; }

  /// Sends a request and waits for the reply with the same id; events go to `on_event`.
  nlohmann::json call(const std::string& cmd, const nlohmann::json& args = nlohmann::json::object(),
                      const std::function<void(const nlohmann::json&)>& on_event = {});

  void send_raw(std::string_view bytes);
  /// Next message from the server; throws io when the connection closes.
  nlohmann::json read_message();

 private:
  int fd_ = -1;
  long next_id_ = 1;
  FrameDecoder decoder_;
};

}  // namespace sda::control
