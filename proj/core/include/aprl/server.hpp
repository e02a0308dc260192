#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>

#include "aprl/net.hpp"
#include "aprl/rollout.hpp"

namespace aprl {

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 46600;  // 0 picks an ephemeral port
  std::uint16_t obs_layout_version = kObsLayoutVersion;
  std::uint32_t expected_obs_len = kObsVectorSize;
  int poll_timeout_ms = 200;
  double heartbeat_period_s = 5.0;
};

// Socket-backed RolloutTransport: validates hellos, then per tick gathers
// exactly one StepUpload from every connected client and answers each with
// an ActionDownload. Connection handling and the lockstep tick share one
// thread so the collection step stays serialized.
class RolloutServer : public RolloutTransport {
 public:
  explicit RolloutServer(const ServerConfig& config);

  bool gather(UploadMap& uploads) override;
  void send_actions(const ActionMap& actions) override;

  std::uint16_t port() const { return listener_.port(); }
  int client_count() const { return static_cast<int>(clients_.size()); }

  // Makes gather() return false at the next opportunity (signal handlers
  // set this via a global flag in the CLI).
  void request_stop() { stop_.store(true, std::memory_order_relaxed); }
  bool stop_requested() const { return stop_.load(std::memory_order_relaxed); }

  // When true (default), gather() waits for the first client; when false it
  // returns an empty upload map while no clients are connected.
  void set_wait_for_clients(bool wait) { wait_for_clients_ = wait; }

  // Accepts and validates pending connections without waiting for uploads.
  void poll_connections(int timeout_ms = 0);

 private:
  struct Client {
    TcpStream stream;
    std::uint64_t expected_tick = 0;
    std::uint32_t num_processes = 0;
    std::uint32_t agents_per_process = 0;
    bool has_upload = false;
    StepUpload upload;
  };

  void handle_hello(TcpStream stream);
  void drop_client(std::uint64_t client_id, const std::string& reason);

  ServerConfig config_;
  TcpListener listener_;
  std::map<std::uint64_t, Client> clients_;
  std::atomic<bool> stop_{false};
  bool wait_for_clients_ = true;
  bool had_clients_ = false;
};

}  // namespace aprl
