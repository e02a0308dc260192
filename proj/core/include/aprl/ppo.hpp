#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "aprl/env.hpp"
#include "aprl/gae.hpp"
#include "aprl/nn.hpp"

namespace aprl {

struct AgentKey {
  std::uint64_t client_id = 0;
  std::uint32_t agent_index = 0;

  auto operator<=>(const AgentKey&) const = default;
};

// One environment step as the trainer sees it. advantage/return_to_go are
// filled by the collator (GAE over per-agent sequences) before the update.
struct Transition {
  AgentKey key;
  std::uint64_t episode_id = 0;
  std::vector<float> observation;
  std::array<float, kActionDim> action{};  // pre-clamp
  float log_prob = 0.0f;
  float reward = 0.0f;
  std::uint8_t flags = 0;  // status + arrived bit, see env.hpp
  float value = 0.0f;
  float bootstrap_value = 0.0f;  // v(s_T) when the episode timed out here
  float advantage = 0.0f;
  float return_to_go = 0.0f;

  bool done() const { return flags_done(flags); }
};

struct PpoConfig {
  double discount = 0.99;        // gamma_d
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  double policy_lr = 3e-4;
  double value_coeff = 0.5;
  double entropy_coeff = 0.003;
  int epochs_per_iter = 3;
  int minibatch_size = 512;
  int horizon = 256;             // steps collected per agent per iteration
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;

  void validate_or_throw() const;
};

struct UpdateStats {
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  int minibatches = 0;
  bool aborted = false;  // non-finite loss: parameters were restored
};

// Fills advantage/return_to_go in place: groups transitions by agent key
// (each agent's slice must be time-ordered), applies the timeout bootstrap
// fold, and runs GAE with the per-agent trailing bootstrap values.
void compute_advantages(std::vector<Transition>& batch,
                        const std::vector<std::pair<AgentKey, float>>& tail_bootstrap,
                        const PpoConfig& config);

// In-place per-batch normalization to mean 0, std 1 (eps 1e-8).
void normalize_advantages_in_place(std::vector<float>& advantages);

// Clipped-surrogate PPO update over the batch: epochs x shuffled minibatches,
// gradient clipping, Adam. Advantage normalization (mean 0, std 1) happens
// per batch. On a non-finite loss the iteration aborts and the previous
// parameters are restored.
UpdateStats ppo_update(PolicyModel<float>& model, AdamState<float>& optimizer,
                       std::vector<Transition>& batch, const PpoConfig& config,
                       Rng& rng);

}  // namespace aprl
