#include "aprl/client.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include "aprl/errors.hpp"

namespace aprl {

namespace {

bool should_stop(const ClientRunConfig& config) {
  return config.stop && config.stop->load(std::memory_order_relaxed);
}

}  // namespace

ClientRunStats run_client(const ClientRunConfig& config, const EnvFactory& factory) {
  ClientRunStats stats;
  double backoff = config.backoff_initial_s;
  int attempts = 0;

  while (!should_stop(config)) {
    TcpStream stream;
    try {
      stream = TcpStream::connect(config.server_host, config.server_port);
    } catch (const IoError& e) {
      attempts += 1;
      if (config.max_reconnect_attempts >= 0 && attempts > config.max_reconnect_attempts)
        return stats;
      std::fprintf(stderr, "[client %llu] %s; retrying in %.1fs\n",
                   static_cast<unsigned long long>(config.client_id), e.what(), backoff);
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff = std::min(backoff * 2.0, config.backoff_max_s);
      continue;
    }

    ClientHello hello;
    hello.client_id = config.client_id;
    hello.num_processes = static_cast<std::uint32_t>(config.num_processes);
    hello.agents_per_process = static_cast<std::uint32_t>(config.agents_per_process);
    if (!write_message(stream, hello)) continue;

    DecodeError error;
    const std::optional<Message> reply = read_message(stream, error);
    if (!reply) continue;
    if (const auto* reject = std::get_if<HelloReject>(&*reply)) {
      stats.rejected = true;
      stats.reject_reason = reject->text;
      std::fprintf(stderr, "[client %llu] rejected by server: %s\n",
                   static_cast<unsigned long long>(config.client_id),
                   reject->text.c_str());
      return stats;
    }
    if (!std::holds_alternative<HelloAccept>(*reply)) continue;

    stats.connections += 1;
    backoff = config.backoff_initial_s;
    attempts = 0;

    // fresh environment bank per connection: episodes restart on reconnect
    VectorEnv envs(factory, config.num_processes, config.agents_per_process,
                   config.seed, config.client_id);
    std::vector<ActionVector> actions;
    bool have_actions = false;
    std::uint64_t tick = 0;
    bool connection_alive = true;

    while (connection_alive && !should_stop(config)) {
      if (config.max_ticks >= 0 && stats.ticks >= config.max_ticks) {
        write_message(stream, Bye{});
        return stats;
      }
      std::vector<VectorEnv::SlotStep> steps =
          have_actions ? envs.tick(actions) : envs.tick({});

      StepUpload upload;
      upload.client_id = config.client_id;
      upload.tick = tick;
      upload.obs_len = static_cast<std::uint32_t>(envs.observation_size());
      upload.records.reserve(steps.size());
      for (VectorEnv::SlotStep& s : steps) {
        StepRecord r;
        r.agent_index = s.agent_index;
        r.episode_id = s.episode_id;
        r.observation = std::move(s.observation);
        r.reward = s.reward;
        r.flags = s.flags;
        upload.records.push_back(std::move(r));
      }
      if (!write_message(stream, upload)) break;

      const std::optional<Message> response = read_message(stream, error);
      if (!response) break;
      const auto* download = std::get_if<ActionDownload>(&*response);
      if (!download || download->tick != tick) break;

      actions.assign(static_cast<std::size_t>(envs.slot_count()), ActionVector{});
      for (const ActionRecord& a : download->records) {
        if (a.agent_index >= actions.size()) {
          connection_alive = false;
          break;
        }
        ActionVector clamped{};
        for (int d = 0; d < kActionDim; ++d)
          clamped[static_cast<std::size_t>(d)] =
              clamp(a.action[static_cast<std::size_t>(d)], -1.0, 1.0);
        actions[a.agent_index] = clamped;
      }
      have_actions = true;
      tick += 1;
      stats.ticks += 1;
    }

    if (should_stop(config)) {
      write_message(stream, Bye{});
      return stats;
    }
    std::fprintf(stderr, "[client %llu] connection lost; reconnecting\n",
                 static_cast<unsigned long long>(config.client_id));
  }
  return stats;
}

}  // namespace aprl
