#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "aprl/env.hpp"
#include "aprl/nn.hpp"
#include "aprl/ppo.hpp"

namespace aprl {

// Per-agent payload of one collection tick. Identical whether it arrived
// over a socket or from an in-process environment bank.
struct StepRecord {
  std::uint32_t agent_index = 0;
  std::uint64_t episode_id = 0;
  std::vector<float> observation;
  float reward = 0.0f;
  std::uint8_t flags = 0;
};

struct ActionRecord {
  std::uint32_t agent_index = 0;
  std::array<float, kActionDim> action{};  // pre-clamp
  float log_prob = 0.0f;
  float value = 0.0f;
};

using UploadMap = std::map<std::uint64_t, std::vector<StepRecord>>;
using ActionMap = std::map<std::uint64_t, std::vector<ActionRecord>>;

// One tick of the lockstep collection fabric, either in-process or remote.
class RolloutTransport {
 public:
  virtual ~RolloutTransport() = default;

  // Blocks until every connected client contributed one upload for this
  // tick. Returns false when no client remains.
  virtual bool gather(UploadMap& uploads) = 0;
  virtual void send_actions(const ActionMap& actions) = 0;
};

// In-process transport: a VectorEnv pumped directly, reported under a single
// client id. Behaves tick-for-tick like a remote client running the same
// environment bank.
class LocalTransport : public RolloutTransport {
 public:
  LocalTransport(const EnvFactory& factory, int num_processes, int agents_per_process,
                 std::uint64_t seed, std::uint64_t client_id);

  bool gather(UploadMap& uploads) override;
  void send_actions(const ActionMap& actions) override;

  int slot_count() const { return envs_.slot_count(); }

 private:
  VectorEnv envs_;
  std::uint64_t client_id_;
  std::vector<ActionVector> next_actions_;
  bool have_actions_ = false;
};

struct EpisodeSummary {
  AgentKey key;
  std::uint64_t episode_id = 0;
  double total_reward = 0.0;
  int length = 0;
  int arrivals = 0;
  EpisodeStatus status = EpisodeStatus::Running;
};

// Batches uploads through the policy, samples actions with one RNG stream
// per agent slot, pairs rewards with the actions that earned them and turns
// the stream into Transitions.
class RolloutCollector {
 public:
  RolloutCollector(RolloutTransport& transport, std::uint64_t seed);

  struct Iteration {
    std::vector<Transition> transitions;
    std::vector<std::pair<AgentKey, float>> tail_bootstraps;
    std::vector<EpisodeSummary> episodes;
    long ticks = 0;
    bool transport_alive = true;
  };

  // Runs `ticks` lockstep ticks against the current model.
  Iteration collect(const PolicyModel<float>& model, int ticks);

 private:
  struct Pending {
    std::uint64_t episode_id = 0;
    std::vector<float> observation;
    std::array<float, kActionDim> action{};
    float log_prob = 0.0f;
    float value = 0.0f;
  };
  struct SlotState {
    Rng sample_rng{0};
    bool has_pending = false;
    Pending pending;
    double episode_return = 0.0;
    int episode_length = 0;
    int episode_arrivals = 0;
  };

  SlotState& slot(const AgentKey& key);

  RolloutTransport& transport_;
  std::uint64_t seed_;
  std::map<AgentKey, SlotState> slots_;
};

struct MetricsRow {
  int iteration = 0;
  long env_steps = 0;
  double mean_return = 0.0;
  double arrival_rate = 0.0;
  double crash_rate = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double wall_clock_s = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

struct TrainConfig {
  PpoConfig ppo;
  std::uint64_t seed = 1;
  long max_env_steps = 0;  // exhausting the budget ends training; 0 trains nothing
  int max_iterations = std::numeric_limits<int>::max();
  // early stop once the per-iteration arrival rate holds the target for
  // three consecutive iterations (0 disables)
  double target_arrival_rate = 0.0;
  int min_episodes_for_target = 5;
  int checkpoint_interval = 25;  // iterations between checkpoints
  std::string output_dir;        // empty: keep everything in memory
  int targets_per_episode = 8;   // task waypoint count, for the arrival metric
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  long env_steps = 0;
  int iterations = 0;
  bool transport_disconnected = false;
};

// collect horizon -> GAE -> ppo_update -> metrics row, repeated until a stop
// condition fires. Writes metrics.csv and periodic + final checkpoints into
// output_dir when set; on transport loss it checkpoints and returns cleanly.
TrainResult train_loop(PolicyModel<float>& model, RolloutTransport& transport,
                       const TrainConfig& config);

struct EvalStats {
  int episodes = 0;
  double arrival_rate = 0.0;   // waypoints reached / waypoints presented
  double success_rate = 0.0;
  double crash_rate = 0.0;
  double liftoff_rate = 0.0;   // episodes that reached their first waypoint
  double mean_episode_length = 0.0;
  double mean_return = 0.0;
};

// Deterministic-policy evaluation: action = clamp(mu), no sampling.
EvalStats evaluate_policy(const PolicyModel<float>& model, const EnvConfig& env_config,
                          int episodes, std::uint64_t seed);

}  // namespace aprl
