#include "aprl/env.hpp"

#include "aprl/errors.hpp"

namespace aprl {

bool TaskParams::validate_or_throw() const {
  if (n_waypoints < 1) throw ValidationError("task: n_waypoints must be >= 1");
  if (segment_range.min <= 0.0 || segment_range.min > segment_range.max)
    throw ValidationError("task: invalid segment range");
  if (epsilon <= 0.0) throw ValidationError("task: epsilon must be positive");
  if (max_steps < 1) throw ValidationError("task: max_steps must be >= 1");
  return true;
}

void EnvConfig::validate_or_throw() const {
  if (!world.valid()) throw ValidationError("world: invalid bounds or timestep");
  if (!vehicle.valid()) throw ValidationError("vehicle: invalid parameters");
  if (!reward.valid()) throw ValidationError("reward: invalid parameters");
  task.validate_or_throw();
  if (task.segment_range.max > world.bounds.diagonal())
    throw ValidationError("task: segment range exceeds world diagonal");
}

WaypointEnv::WaypointEnv(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate_or_throw();
}

std::vector<float> WaypointEnv::reset() {
  state_ = spawn(config_.world, config_.control_mode, rng_);
  // the waypoint chain roots at the agent so the first target is one
  // segment away, matching the stepwise task construction
  path_ = generate_path(rng_, config_.world, config_.task.path_mode,
                        config_.task.n_waypoints, config_.task.segment_range,
                        state_.position);
  if (config_.task.path_mode == PathMode::GroundToGround) {
    // ground-to-ground episodes start at the path's ground start point
    state_.position = path_.waypoints.front();
  }
  progress_ = start_progress(path_, state_.position);
  prev_orientation_ = state_.orientation;
  steps_ = 0;
  episode_open_ = true;
  stack_.reset(encode_observation(state_, path_, progress_, config_.world,
                                  prev_orientation_));
  return stacked();
}

EnvStep WaypointEnv::step(const ActionVector& action) {
  if (!episode_open_) throw ValidationError("WaypointEnv::step before reset");

  const AgentState prev_state = state_;
  const PathProgress prev_progress = progress_;

  state_ = aprl::step(state_, action, config_.world, config_.vehicle);
  if (config_.control_mode == ControlMode::Helicopter) {
    const ContactReport contact =
        detect_ground_contact(state_, config_.world, config_.vehicle);
    resolve_ground_contact(state_, contact, config_.world, config_.vehicle);
  }
  steps_ += 1;

  const AdvanceResult advance =
      advance_waypoint(progress_, state_.position, path_, config_.task.epsilon);
  const double reward = compute_reward(prev_state, prev_progress, state_,
                                       advance.arrived, path_, config_.world,
                                       config_.reward);
  progress_ = advance.progress;

  const EpisodeStatus status =
      episode_status(state_, progress_, path_, config_.task.epsilon, steps_,
                     config_.task.max_steps);

  const ObsFrame frame = encode_observation(state_, path_, progress_, config_.world,
                                            prev_orientation_);
  prev_orientation_ = state_.orientation;
  stack_.push(frame);

  EnvStep out;
  out.observation = stacked();
  out.reward = static_cast<float>(reward);
  out.status = status;
  out.arrived = advance.arrived;
  if (out.done()) episode_open_ = false;
  return out;
}

std::vector<float> WaypointEnv::stacked() const {
  const ObsVector v = stack_.stacked();
  return std::vector<float>(v.begin(), v.end());
}

EnvFactory waypoint_env_factory(EnvConfig config) {
  return [config](std::uint64_t seed) {
    return std::make_unique<WaypointEnv>(config, seed);
  };
}

VectorEnv::VectorEnv(const EnvFactory& factory, int num_processes, int agents_per_process,
                     std::uint64_t base_seed, std::uint64_t client_id) {
  if (num_processes < 1 || agents_per_process < 1)
    throw ValidationError("VectorEnv: process and agent counts must be >= 1");
  const int slots = num_processes * agents_per_process;
  envs_.reserve(static_cast<std::size_t>(slots));
  for (int p = 0; p < num_processes; ++p) {
    for (int a = 0; a < agents_per_process; ++a) {
      const std::uint64_t seed = mix_seed(base_seed, client_id,
                                          static_cast<std::uint64_t>(p),
                                          static_cast<std::uint64_t>(a));
      envs_.push_back(factory(seed));
    }
  }
  episode_ids_.assign(static_cast<std::size_t>(slots), 0);
  pending_reset_.assign(static_cast<std::size_t>(slots), false);
}

std::vector<VectorEnv::SlotStep> VectorEnv::tick(const std::vector<ActionVector>& actions) {
  const int slots = slot_count();
  std::vector<SlotStep> out(static_cast<std::size_t>(slots));
  if (!started_) {
    for (int i = 0; i < slots; ++i) {
      SlotStep& s = out[static_cast<std::size_t>(i)];
      s.agent_index = static_cast<std::uint32_t>(i);
      s.episode_id = episode_ids_[static_cast<std::size_t>(i)];
      s.observation = envs_[static_cast<std::size_t>(i)]->reset();
      s.flags = make_step_flags(EpisodeStatus::Running, false);
    }
    started_ = true;
    return out;
  }
  if (static_cast<int>(actions.size()) != slots)
    throw ValidationError("VectorEnv::tick: one action per slot required");

  for (int i = 0; i < slots; ++i) {
    SlotStep& s = out[static_cast<std::size_t>(i)];
    s.agent_index = static_cast<std::uint32_t>(i);
    if (pending_reset_[static_cast<std::size_t>(i)]) {
      // the action computed on the terminal observation is discarded
      episode_ids_[static_cast<std::size_t>(i)] += 1;
      pending_reset_[static_cast<std::size_t>(i)] = false;
      s.episode_id = episode_ids_[static_cast<std::size_t>(i)];
      s.observation = envs_[static_cast<std::size_t>(i)]->reset();
      s.flags = make_step_flags(EpisodeStatus::Running, false);
      continue;
    }
    const EnvStep step = envs_[static_cast<std::size_t>(i)]->step(actions[static_cast<std::size_t>(i)]);
    s.episode_id = episode_ids_[static_cast<std::size_t>(i)];
    s.observation = step.observation;
    s.reward = step.reward;
    s.flags = step.flags();
    if (step.done()) pending_reset_[static_cast<std::size_t>(i)] = true;
  }
  return out;
}

}  // namespace aprl
