#include "sda/control_client.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

namespace sda::control {

using nlohmann::json;

ControlClient::~ControlClient() { close(); }

void ControlClient::connect(const std::string& host, std::uint16_t port) {
  close();
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw Error(Errc::io, "cannot resolve " + host);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    freeaddrinfo(res);
    if (fd >= 0) ::close(fd);
    throw Error(Errc::io, "cannot connect to " + host + ":" + std::to_string(port));
  }
  freeaddrinfo(res);
  fd_ = fd;
  decoder_ = FrameDecoder{};
}

void ControlClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void ControlClient::send_raw(std::string_view bytes) {
  if (fd_ < 0) throw Error(Errc::io, "not connected");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw Error(Errc::io, "send failed");
    sent += static_cast<std::size_t>(n);
  }
}

json ControlClient::read_message() {
  if (fd_ < 0) throw Error(Errc::io, "not connected");
  char buf[65536];
  while (true) {
    if (auto body = decoder_.next()) return json::parse(*body);
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) throw Error(Errc::io, "connection closed by server");
    decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

json ControlClient::call(const std::string& cmd, const json& args, const std::function<void(const json&)>& on_event) {
  const long id = next_id_++;
  send_raw(encode_frame(make_request(id, cmd, args)));
  while (true) {
    json msg = read_message();
    if (msg.contains("event")) {
      if (on_event) on_event(msg);
      continue;
    }
    if (msg.value("id", json(nullptr)) == json(id)) return msg;
  }
}

}  // namespace sda::control
