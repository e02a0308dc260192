#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "aprl/env.hpp"
#include "aprl/net.hpp"

namespace aprl {

struct ClientRunConfig {
  std::string server_host = "127.0.0.1";
  std::uint16_t server_port = 46600;
  std::uint64_t client_id = 1;
  int num_processes = 1;
  int agents_per_process = 1;
  std::uint64_t seed = 1;
  // reconnect backoff, seconds
  double backoff_initial_s = 0.5;
  double backoff_max_s = 8.0;
  int max_reconnect_attempts = -1;  // -1: keep trying
  long max_ticks = -1;              // -1: run until stopped or disconnected
  std::atomic<bool>* stop = nullptr;
};

struct ClientRunStats {
  long ticks = 0;
  int connections = 0;
  bool rejected = false;
  std::string reject_reason;
};

// Owns num_processes x agents_per_process environment instances, uploads
// their observations each tick and applies the returned actions. Episodes
// restart from fresh seeds states on reconnect. A hello rejection is fatal
// (retrying cannot fix a version mismatch); connection loss triggers bounded
// exponential backoff.
ClientRunStats run_client(const ClientRunConfig& config, const EnvFactory& factory);

}  // namespace aprl
