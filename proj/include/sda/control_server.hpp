#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sda/control_protocol.hpp"
#include "sda/iq.hpp"
#include "sda/scenario.hpp"

namespace sda::control {

enum class NodeMode { idle, tx, rx };
const char* to_string(NodeMode mode);
NodeMode parse_node_mode(const std::string& name);

struct NodeState {
  std::string node_id;
  NodeMode mode = NodeMode::idle;
  std::optional<int> beam_index = beam::kBroadsideBeamIndex;
  std::optional<beam::Awv> custom_awv;  // replaces the codebook beam when set
  double gain_db = 0.0;
  std::optional<IqBuffer> loaded_iq;
  std::string loaded_iq_source;
  std::optional<IqBuffer> capture;  // last frame delivered to this node
  std::uint64_t capture_seed = 0;
  channel::NodePose pose;
};

/// Sink for streamed events (progress) sent before the final reply.
using EventSink = std::function<void(const nlohmann::json&)>;

/// Command dispatcher holding the simulated nodes and channel. Thread-safe:
/// each node is guarded by its own timed mutex, sweeps by a separate one.
class ControlService {
 public:
  ControlService(Scenario scenario, std::filesystem::path output_dir, int sweep_threads = 1,
                 std::chrono::milliseconds lock_timeout = std::chrono::seconds(30));

  nlohmann::json handle(const nlohmann::json& request, const EventSink& events = {});
  /// Parses a frame body; malformed JSON yields an in-band protocol error.
  nlohmann::json handle_text(std::string_view body, const EventSink& events = {});

  NodeState snapshot(const std::string& node_id);
  nlohmann::json status_json(const std::string& node_id);
  const std::filesystem::path& output_dir() const { return output_dir_; }

 private:
  struct Node {
    std::timed_mutex mu;
    NodeState state;
    NodeState defaults;
  };

  Node& node(const std::string& id);
  std::unique_lock<std::timed_mutex> lock(std::timed_mutex& mu, const std::string& what);
  beam::Awv node_awv(const NodeState& s) const;
  nlohmann::json state_json(const NodeState& s) const;

  nlohmann::json cmd_set_mode(const nlohmann::json& args);
  nlohmann::json cmd_set_beam(const nlohmann::json& args);
  nlohmann::json cmd_set_awv(const nlohmann::json& args);
  nlohmann::json cmd_set_gain(const nlohmann::json& args);
  nlohmann::json cmd_load_iq(const nlohmann::json& args);
  nlohmann::json cmd_tx_frame(const nlohmann::json& args);
  nlohmann::json cmd_rx_capture(const nlohmann::json& args);
  nlohmann::json cmd_run_sweep(const nlohmann::json& args, const nlohmann::json& id, const EventSink& events);
  nlohmann::json cmd_get_status(const nlohmann::json& args);
  nlohmann::json cmd_reset(const nlohmann::json& args);

  Scenario scenario_;
  channel::ChannelConfig channel_;  // noise resolved
  beam::Codebook codebook_;
  std::filesystem::path output_dir_;
  int sweep_threads_;
  std::chrono::milliseconds lock_timeout_;
  std::map<std::string, std::unique_ptr<Node>> nodes_;
  std::timed_mutex sweep_mu_;
};

/// POSIX TCP front end: one thread per connection, requests handled in order.
class TcpServer {
 public:
  explicit TcpServer(ControlService& service);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and starts accepting; returns the bound port (useful with port 0).
  std::uint16_t start(const BindAddress& address);
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  ControlService& service_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> connections_;
};

}  // namespace sda::control
