#include "sda/control_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "sda/receiver.hpp"
#include "sda/serialization.hpp"

namespace sda::control {

using nlohmann::json;

namespace {

class BusyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const json& require(const json& args, const char* key) {
  if (!args.is_object() || !args.contains(key))
    throw Error(Errc::invalid_argument, std::string("missing argument '") + key + "'");
  return args.at(key);
}

std::string bytes_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::vector<std::uint8_t> hex_bytes(const std::string& hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::invalid_argument, "payload_hex needs an even number of digits");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    auto nib = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw Error(Errc::invalid_argument, "payload_hex has a non-hex digit");
    };
    out.push_back(static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
  }
  return out;
}

}  // namespace

const char* to_string(NodeMode mode) {
  switch (mode) {
    case NodeMode::idle: return "idle";
    case NodeMode::tx: return "tx";
    case NodeMode::rx: return "rx";
  }
  return "?";
}

NodeMode parse_node_mode(const std::string& name) {
  if (name == "idle") return NodeMode::idle;
  if (name == "tx") return NodeMode::tx;
  if (name == "rx") return NodeMode::rx;
  throw Error(Errc::invalid_argument, "unknown mode '" + name + "'");
}

ControlService::ControlService(Scenario scenario, std::filesystem::path output_dir, int sweep_threads,
                               std::chrono::milliseconds lock_timeout)
    : scenario_(std::move(scenario)),
      output_dir_(std::move(output_dir)),
      sweep_threads_(sweep_threads),
      lock_timeout_(lock_timeout) {
  codebook_ = scenario_.codebook();
  channel_ = scenario_.channel;
  if (channel_.noise.mode == channel::NoiseMode::target_snr)
    channel_ = channel::calibrate_to_snr(channel_, codebook_, codebook_, channel_.noise.target_snr_db);
  for (const auto& [id, pose] : {std::pair{"tx0", scenario_.channel.tx_pose}, std::pair{"rx0", scenario_.channel.rx_pose}}) {
    auto n = std::make_unique<Node>();
    n->defaults.node_id = id;
    n->defaults.pose = pose;
    n->state = n->defaults;
    nodes_.emplace(id, std::move(n));
  }
}

ControlService::Node& ControlService::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::not_found, "unknown node '" + id + "'");
  return *it->second;
}

std::unique_lock<std::timed_mutex> ControlService::lock(std::timed_mutex& mu, const std::string& what) {
  std::unique_lock<std::timed_mutex> l(mu, std::defer_lock);
  if (!l.try_lock_for(lock_timeout_)) throw BusyError(what + " busy");
  return l;
}

beam::Awv ControlService::node_awv(const NodeState& s) const {
  if (s.custom_awv) return *s.custom_awv;
  return codebook_.at(s.beam_index.value_or(beam::kBroadsideBeamIndex)).awv;
}

json ControlService::state_json(const NodeState& s) const {
  const beam::Awv awv = node_awv(s);
  json j{{"node", s.node_id},
         {"mode", to_string(s.mode)},
         {"beam_index", s.beam_index ? json(*s.beam_index) : json(nullptr)},
         {"awv_source", s.custom_awv ? "custom" : "codebook"},
         {"active_elements", awv.active_elements()},
         {"gain_db", s.gain_db},
         {"pose", {{"position", {s.pose.position.x(), s.pose.position.y()}}, {"heading_deg", s.pose.heading_deg}}}};
  j["steering_angle_deg"] = s.beam_index && !s.custom_awv ? json(beam::beam_angle_deg(*s.beam_index)) : json(nullptr);
  j["loaded_iq"] = s.loaded_iq ? json{{"samples", s.loaded_iq->size()}, {"source", s.loaded_iq_source}} : json(nullptr);
  j["capture"] = s.capture ? json{{"samples", s.capture->size()}, {"seed", s.capture_seed}} : json(nullptr);
  return j;
}

NodeState ControlService::snapshot(const std::string& id) {
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  return n.state;
}

json ControlService::status_json(const std::string& id) { return state_json(snapshot(id)); }

json ControlService::handle_text(std::string_view body, const EventSink& events) {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception& e) {
    return make_error(nullptr, Errc::protocol, std::string("malformed JSON: ") + e.what());
  }
  return handle(request, events);
}

json ControlService::handle(const json& request, const EventSink& events) {
  const json id = request.is_object() && request.contains("id") ? request.at("id") : json(nullptr);
  try {
    if (!request.is_object()) throw Error(Errc::protocol, "request must be a JSON object");
    if (request.contains("v") && request.at("v") != kProtocolVersion)
      throw Error(Errc::protocol, "unsupported protocol version");
    if (!request.contains("cmd") || !request.at("cmd").is_string()) throw Error(Errc::protocol, "missing 'cmd'");
    const std::string cmd = request.at("cmd").get<std::string>();
    const json args = request.contains("args") ? request.at("args") : json::object();
    if (!args.is_object()) throw Error(Errc::invalid_argument, "'args' must be an object");
    json result;
    if (cmd == "set_mode") result = cmd_set_mode(args);
    else if (cmd == "set_beam") result = cmd_set_beam(args);
    else if (cmd == "set_awv") result = cmd_set_awv(args);
    else if (cmd == "set_gain") result = cmd_set_gain(args);
    else if (cmd == "load_iq") result = cmd_load_iq(args);
    else if (cmd == "tx_frame") result = cmd_tx_frame(args);
    else if (cmd == "rx_capture") result = cmd_rx_capture(args);
    else if (cmd == "run_sweep") result = cmd_run_sweep(args, id, events);
    else if (cmd == "get_status") result = cmd_get_status(args);
    else if (cmd == "reset") result = cmd_reset(args);
    else throw Error(Errc::invalid_argument, "unknown command '" + cmd + "'");
    return make_ok(id, result);
  } catch (const BusyError& e) {
    return make_error(id, "busy", e.what());
  } catch (const Error& e) {
    return make_error(id, e.code(), e.what());
  } catch (const json::exception& e) {
    return make_error(id, Errc::invalid_argument, std::string("malformed arguments: ") + e.what());
  }
}

json ControlService::cmd_set_mode(const json& args) {
  const NodeMode mode = parse_node_mode(require(args, "mode").get<std::string>());
  const std::string id = require(args, "node").get<std::string>();
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  n.state.mode = mode;
  return json{{"node", id}, {"mode", to_string(mode)}};
}

json ControlService::cmd_set_beam(const json& args) {
  const int index = require(args, "index").get<int>();
  if (index < 1 || index > codebook_.size())
    throw Error(Errc::out_of_range, "index out of range 1.." + std::to_string(codebook_.size()));
  const std::string id = require(args, "node").get<std::string>();
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  n.state.beam_index = index;
  n.state.custom_awv.reset();
  return json{{"node", id}, {"index", index}, {"angle_deg", beam::beam_angle_deg(index)}};
}

json ControlService::cmd_set_awv(const json& args) {
  const json& weights = require(args, "weights");
  if (!weights.is_array()) throw Error(Errc::invalid_argument, "'weights' must be an array");
  std::vector<std::pair<double, double>> ap;
  for (const json& w : weights)
    ap.emplace_back(require(w, "amplitude").get<double>(), deg2rad(w.value("phase_deg", 0.0)));
  // Built completely before the swap so readers never see a partial vector.
  beam::Awv awv = beam::make_awv(ap, scenario_.geometry(), args.value("dac_bits", scenario_.dac_bits));
  const std::string id = require(args, "node").get<std::string>();
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  n.state.custom_awv = std::move(awv);
  n.state.beam_index.reset();
  return json{{"node", id}, {"active_elements", n.state.custom_awv->active_elements()}};
}

json ControlService::cmd_set_gain(const json& args) {
  const double gain = require(args, "gain_db").get<double>();
  if (!(gain >= -30.0 && gain <= 30.0)) throw Error(Errc::out_of_range, "gain_db outside -30..30");
  const std::string id = require(args, "node").get<std::string>();
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  n.state.gain_db = gain;
  return json{{"node", id}, {"gain_db", gain}};
}

json ControlService::cmd_load_iq(const json& args) {
  std::filesystem::path path = require(args, "path").get<std::string>();
  if (path.is_relative()) path = output_dir_ / path;
  IqBuffer iq = iqfile::read(path);
  const std::string id = require(args, "node").get<std::string>();
  Node& n = node(id);
  auto l = lock(n.mu, "node " + id);
  n.state.loaded_iq = std::move(iq);
  n.state.loaded_iq_source = path.filename().string();
  return json{{"node", id}, {"samples", n.state.loaded_iq->size()}, {"sample_rate_hz", n.state.loaded_iq->sample_rate_hz}};
}

json ControlService::cmd_tx_frame(const json& args) {
  const std::string tx_id = require(args, "node").get<std::string>();
  const std::string rx_id = args.value("to", std::string("rx0"));
  const std::uint64_t seed = args.value("seed", scenario_.seed);

  NodeState tx = snapshot(tx_id);
  if (tx.mode != NodeMode::tx) throw Error(Errc::invalid_argument, "node not in tx mode");
  IqBuffer signal;
  if (args.contains("payload_hex") || args.contains("payload_text")) {
    std::vector<std::uint8_t> bytes;
    if (args.contains("payload_hex")) {
      bytes = hex_bytes(args.at("payload_hex").get<std::string>());
    } else {
      const std::string text = args.at("payload_text").get<std::string>();
      bytes.assign(text.begin(), text.end());
    }
    modem::PpduConfig cfg = channel_.numerology;
    cfg.modulation = modem::parse_modulation(args.value("modulation", std::string("bpsk")));
    signal = modem::build_ppdu(modem::bytes_to_bits(bytes), cfg).iq;
  } else if (tx.loaded_iq) {
    signal = *tx.loaded_iq;
  } else {
    throw Error(Errc::invalid_argument, "no payload given and no IQ loaded on " + tx_id);
  }
  signal.samples *= db2mag(tx.gain_db);

  const NodeState rx = snapshot(rx_id);
  if (rx.mode != NodeMode::rx) throw Error(Errc::invalid_argument, "node " + rx_id + " not in rx mode");
  channel::ChannelConfig chan = channel_;
  chan.tx_pose = tx.pose;
  chan.rx_pose = rx.pose;
  chan.rng_seed = seed;
  IqBuffer received = channel::propagate(signal, node_awv(tx), node_awv(rx), chan);
  received.samples *= db2mag(rx.gain_db);
  received.origin = Origin::rx;

  Node& rn = node(rx_id);
  auto l = lock(rn.mu, "node " + rx_id);
  if (rn.state.mode != NodeMode::rx) throw Error(Errc::invalid_argument, "node " + rx_id + " not in rx mode");
  rn.state.capture = std::move(received);
  rn.state.capture_seed = seed;
  return json{{"node", tx_id}, {"to", rx_id}, {"samples", signal.size()}, {"seed", seed}};
}

json ControlService::cmd_rx_capture(const json& args) {
  const std::string id = require(args, "node").get<std::string>();
  const NodeState s = snapshot(id);
  if (s.mode != NodeMode::rx) throw Error(Errc::invalid_argument, "node not in rx mode");
  if (!s.capture) throw Error(Errc::not_found, "nothing captured on " + id);
  const std::string bytes = iqfile::encode(*s.capture);
  const auto path = write_artifact(output_dir_, "rx_capture", s.capture_seed, bytes, "sdaiq");
  json result{{"node", id}, {"artifact", path.filename().string()}, {"samples", s.capture->size()}};
  if (args.value("decode", true)) {
    modem::PpduConfig cfg = channel_.numerology;
    const modem::DecodeReport rep = modem::demod_decode(*s.capture, cfg);
    result["report"] = decode_report_json(rep);
    if (rep.payload_ok() && rep.payload.size() % 8 == 0)
      result["payload_hex"] = bytes_hex(modem::bits_to_bytes(rep.payload));
  }
  return result;
}

json ControlService::cmd_run_sweep(const json& args, const json& id, const EventSink& events) {
  const std::uint64_t seed = args.value("seed", scenario_.seed);
  sweep::SweepConfig cfg = make_sweep_config(scenario_, seed, args.value("threads", sweep_threads_));
  cfg.channel = channel_;
  if (args.contains("frames_per_position")) cfg.frames_per_position = args.at("frames_per_position").get<int>();
  auto l = lock(sweep_mu_, "sweep engine");
  const sweep::SweepResult res = sweep::run_sweep(cfg, [&](int done, int total) {
    if (events && (done % cfg.tx_codebook.size() == 0 || done == total)) events(make_progress(id, done, total));
  });
  ArtifactMeta meta{"sweep", seed, {{"scenario", scenario_.source}, {"frames_per_position", cfg.frames_per_position}}};
  const std::string csv = snr_matrix_csv(res.matrix, meta);
  const auto csv_path = write_artifact(output_dir_, "sweep", seed, csv, "csv");
  const std::string result_doc = sweep_result_json(res, meta).dump(2) + "\n";
  const auto json_path = write_artifact(output_dir_, "sweep", seed, result_doc, "json");
  json peaks = json::array();
  for (const auto& p : res.secondary_peaks) peaks.push_back({{"tx", p.tx}, {"rx", p.rx}, {"snr_db", p.snr_db}});
  return json{{"matrix_artifact", csv_path.filename().string()},
              {"result_artifact", json_path.filename().string()},
              {"best_pair", {{"tx", res.best_pair.first}, {"rx", res.best_pair.second}}},
              {"peak_snr_db", res.matrix.at(res.best_pair.first, res.best_pair.second)},
              {"secondary_peaks", peaks}};
}

json ControlService::cmd_get_status(const json& args) {
  if (args.contains("node")) return status_json(args.at("node").get<std::string>());
  json nodes = json::object();
  for (const auto& [id, n] : nodes_) nodes[id] = status_json(id);
  return json{{"nodes", nodes}, {"scenario", scenario_.name}};
}

json ControlService::cmd_reset(const json& args) {
  std::vector<std::string> ids;
  if (args.contains("node")) {
    ids.push_back(args.at("node").get<std::string>());
    node(ids.back());
  } else {
    for (const auto& [id, n] : nodes_) ids.push_back(id);
  }
  for (const auto& id : ids) {
    Node& n = node(id);
    auto l = lock(n.mu, "node " + id);
    n.state = n.defaults;
  }
  return json{{"reset", ids}};
}

// ---------------------------------------------------------------------------

TcpServer::TcpServer(ControlService& service) : service_(service) {}

TcpServer::~TcpServer() { stop(); }

std::uint16_t TcpServer::start(const BindAddress& address) {
  if (running_) throw Error(Errc::invalid_argument, "server already running");
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(address.port);
  if (getaddrinfo(address.host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
    throw Error(Errc::io, "cannot resolve bind address " + address.host);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(res);
    throw Error(Errc::io, "socket() failed");
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
    const std::string why = std::strerror(errno);
    freeaddrinfo(res);
    ::close(fd);
    throw Error(Errc::io, "cannot bind " + address.host + ":" + port + ": " + why);
  }
  freeaddrinfo(res);
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  listen_fd_ = fd;
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  return ntohs(bound.sin_port);
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(conn_mu_);
    connections_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

namespace {
bool send_all(int fd, const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}
}  // namespace

void TcpServer::serve_connection(int fd) {
  FrameDecoder decoder;
  char buf[65536];
  bool open = true;
  while (open && running_) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready == 0) continue;
    if (ready < 0) break;
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    while (open) {
      std::optional<std::string> body;
      try {
        body = decoder.next();
      } catch (const Error& e) {
        // The stream cannot be resynchronized after a bad length prefix.
        send_all(fd, encode_frame(make_error(nullptr, Errc::protocol, e.what())));
        open = false;
        break;
      }
      if (!body) break;
      const json reply =
          service_.handle_text(*body, [fd](const json& event) { send_all(fd, encode_frame(event)); });
      if (!send_all(fd, encode_frame(reply))) open = false;
    }
  }
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
}

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conn_mu_);
    threads.swap(connections_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
}

void TcpServer::wait() {
  while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace sda::control
