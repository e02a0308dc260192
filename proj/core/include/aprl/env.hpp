#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "aprl/observation.hpp"
#include "aprl/reward.hpp"
#include "aprl/rng.hpp"
#include "aprl/sim.hpp"
#include "aprl/task.hpp"

namespace aprl {

struct TaskParams {
  PathMode path_mode = PathMode::FreeSpace;
  int n_waypoints = 8;
  SegmentRange segment_range{8.0, 16.0};
  double epsilon = 2.0;  // meters, arrival threshold
  int max_steps = 1800;  // 60 simulated seconds at 30 Hz

  bool validate_or_throw() const;
};

struct EnvConfig {
  World world;
  VehicleParams vehicle;
  ControlMode control_mode = ControlMode::ZeroG;
  TaskParams task;
  RewardParams reward;

  void validate_or_throw() const;
};

// Step flags byte: low 3 bits carry the episode status, bit 3 marks a
// waypoint arrival on this step.
inline constexpr std::uint8_t kFlagArrived = 0x08;
inline constexpr std::uint8_t kFlagStatusMask = 0x07;

inline std::uint8_t make_step_flags(EpisodeStatus status, bool arrived) {
  return static_cast<std::uint8_t>(static_cast<std::uint8_t>(status) |
                                   (arrived ? kFlagArrived : 0));
}
inline EpisodeStatus flags_status(std::uint8_t flags) {
  return static_cast<EpisodeStatus>(flags & kFlagStatusMask);
}
inline bool flags_done(std::uint8_t flags) {
  return flags_status(flags) != EpisodeStatus::Running;
}
inline bool flags_arrived(std::uint8_t flags) { return (flags & kFlagArrived) != 0; }

struct EnvStep {
  std::vector<float> observation;  // post-step observation (terminal obs when done)
  float reward = 0.0f;
  EpisodeStatus status = EpisodeStatus::Running;
  bool arrived = false;

  bool done() const { return status != EpisodeStatus::Running; }
  std::uint8_t flags() const { return make_step_flags(status, arrived); }
};

// Gym-style single-agent environment.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int observation_size() const = 0;
  virtual std::vector<float> reset() = 0;
  virtual EnvStep step(const ActionVector& action) = 0;
};

// The waypoint-navigation test range: deterministic physics, procedural
// paths, the 72-value stacked observation and the shaped reward.
class WaypointEnv : public Environment {
 public:
  WaypointEnv(EnvConfig config, std::uint64_t seed);

  int observation_size() const override { return kObsVectorSize; }
  std::vector<float> reset() override;
  EnvStep step(const ActionVector& action) override;

  // read-only views for tests and evaluation
  const AgentState& state() const { return state_; }
  const WaypointPath& path() const { return path_; }
  const PathProgress& progress() const { return progress_; }
  int steps_taken() const { return steps_; }
  const EnvConfig& config() const { return config_; }

 private:
  std::vector<float> stacked() const;

  EnvConfig config_;
  Rng rng_;
  AgentState state_;
  WaypointPath path_;
  PathProgress progress_;
  FrameStack stack_;
  Quat prev_orientation_;
  int steps_ = 0;
  bool episode_open_ = false;
};

// Builds one environment instance from a derived per-slot seed.
using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

// The standard factory for the waypoint test range.
EnvFactory waypoint_env_factory(EnvConfig config);

// A bank of independent environments stepped in lockstep; the slot layout
// mirrors the process/agent topology of a rollout client.
class VectorEnv {
 public:
  VectorEnv(const EnvFactory& factory, int num_processes, int agents_per_process,
            std::uint64_t base_seed, std::uint64_t client_id);

  int slot_count() const { return static_cast<int>(envs_.size()); }
  int observation_size() const { return envs_.empty() ? 0 : envs_[0]->observation_size(); }

  struct SlotStep {
    std::uint32_t agent_index = 0;
    std::uint64_t episode_id = 0;
    std::vector<float> observation;
    float reward = 0.0f;
    std::uint8_t flags = 0;
  };

  // First call resets every slot; subsequent calls apply the provided
  // actions (pre-clamp, one per slot). A slot whose previous step finished
  // an episode ignores its action and reports the fresh episode's first
  // observation instead.
  std::vector<SlotStep> tick(const std::vector<ActionVector>& actions);

  // direct access for tests
  Environment& env(int slot) { return *envs_[static_cast<std::size_t>(slot)]; }

 private:
  std::vector<std::unique_ptr<Environment>> envs_;
  std::vector<std::uint64_t> episode_ids_;
  std::vector<bool> pending_reset_;
  bool started_ = false;
};

}  // namespace aprl
