#include "aprl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aprl/errors.hpp"

namespace aprl {

void PpoConfig::validate_or_throw() const {
  if (discount <= 0.0 || discount >= 1.0)
    throw ValidationError("ppo: discount must be in (0, 1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw ValidationError("ppo: gae_lambda must be in [0, 1]");
  if (clip_range <= 0.0) throw ValidationError("ppo: clip_range must be positive");
  if (epochs_per_iter < 1 || minibatch_size < 1 || horizon < 1)
    throw ValidationError("ppo: epochs, minibatch size and horizon must be >= 1");
}

void compute_advantages(std::vector<Transition>& batch,
                        const std::vector<std::pair<AgentKey, float>>& tail_bootstrap,
                        const PpoConfig& config) {
  std::map<AgentKey, std::vector<std::size_t>> by_agent;
  for (std::size_t i = 0; i < batch.size(); ++i)
    by_agent[batch[i].key].push_back(i);

  std::map<AgentKey, float> tails(tail_bootstrap.begin(), tail_bootstrap.end());

  for (auto& [key, indices] : by_agent) {
    std::vector<double> rewards, values;
    std::vector<unsigned char> dones;
    rewards.reserve(indices.size());
    for (std::size_t i : indices) {
      Transition& t = batch[i];
      double r = t.reward;
      // time-limit termination bootstraps through the terminal state
      if (flags_status(t.flags) == EpisodeStatus::TimedOut)
        r += config.discount * static_cast<double>(t.bootstrap_value);
      rewards.push_back(r);
      values.push_back(t.value);
      dones.push_back(t.done() ? 1 : 0);
    }
    const auto tail = tails.find(key);
    const double bootstrap = tail != tails.end() ? tail->second : 0.0;
    const GaeResult gae =
        compute_gae(rewards, values, dones, bootstrap, config.discount, config.gae_lambda);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      batch[indices[k]].advantage = static_cast<float>(gae.advantages[k]);
      batch[indices[k]].return_to_go = static_cast<float>(gae.returns[k]);
    }
  }
}

namespace {

MiniBatch<float> slice_minibatch(const std::vector<Transition>& batch,
                                 const std::vector<std::size_t>& order,
                                 std::size_t begin, std::size_t end,
                                 const std::vector<float>& advantages) {
  const int rows = static_cast<int>(end - begin);
  const int obs_dim = static_cast<int>(batch[order[begin]].observation.size());
  MiniBatch<float> mb;
  mb.obs.resize(rows, obs_dim);
  mb.actions.resize(rows, kActionDim);
  mb.old_log_probs.reserve(static_cast<std::size_t>(rows));
  mb.advantages.reserve(static_cast<std::size_t>(rows));
  mb.returns.reserve(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const std::size_t idx = order[begin + static_cast<std::size_t>(r)];
    const Transition& t = batch[idx];
    std::copy(t.observation.begin(), t.observation.end(), mb.obs.row(r));
    std::copy(t.action.begin(), t.action.end(), mb.actions.row(r));
    mb.old_log_probs.push_back(t.log_prob);
    mb.advantages.push_back(advantages[idx]);
    mb.returns.push_back(t.return_to_go);
  }
  return mb;
}

}  // namespace

void normalize_advantages_in_place(std::vector<float>& advantages) {
  if (advantages.empty()) return;
  double mean = 0.0;
  for (float a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (float a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double stddev = std::sqrt(var);
  for (float& a : advantages)
    a = static_cast<float>((a - mean) / (stddev + 1e-8));
}

UpdateStats ppo_update(PolicyModel<float>& model, AdamState<float>& optimizer,
                       std::vector<Transition>& batch, const PpoConfig& config,
                       Rng& rng) {
  config.validate_or_throw();
  if (batch.empty()) throw ValidationError("ppo_update: empty batch");
  if (static_cast<int>(batch.size()) < config.horizon)
    throw ValidationError("ppo_update: batch smaller than one horizon");

  // per-batch advantage normalization
  std::vector<float> advantages(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) advantages[i] = batch[i].advantage;
  if (config.normalize_advantages) normalize_advantages_in_place(advantages);

  const PolicyModel<float> snapshot = model;
  const AdamState<float> optimizer_snapshot = optimizer;

  LossSpec spec;
  spec.clip_range = config.clip_range;
  spec.value_coeff = config.value_coeff;
  spec.entropy_coeff = config.entropy_coeff;

  UpdateStats stats;
  double row_weight = 0.0;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs_per_iter; ++epoch) {
    // Fisher-Yates with the caller's rng keeps runs reproducible
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_index(i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.minibatch_size));
      const MiniBatch<float> mb = slice_minibatch(batch, order, begin, end, advantages);
      LossStats<float> loss_stats;
      Gradients<float> grads;
      try {
        grads = ppo_gradients(model, mb, spec, &loss_stats);
      } catch (const ValidationError&) {
        model = snapshot;
        optimizer = optimizer_snapshot;
        stats.aborted = true;
        return stats;
      }
      const double norm = clip_gradients(model, grads, config.max_grad_norm);
      adam_update(model, grads, optimizer, config.policy_lr);

      const double w = static_cast<double>(mb.rows());
      stats.surrogate_loss += w * loss_stats.surrogate;
      stats.value_loss += w * loss_stats.value_loss;
      stats.entropy += w * loss_stats.entropy;
      stats.mean_ratio += w * loss_stats.mean_ratio;
      stats.clip_fraction += w * loss_stats.clip_fraction;
      stats.grad_norm += w * norm;
      row_weight += w;
      stats.minibatches += 1;
    }
  }
  if (row_weight > 0.0) {
    stats.surrogate_loss /= row_weight;
    stats.value_loss /= row_weight;
    stats.entropy /= row_weight;
    stats.mean_ratio /= row_weight;
    stats.clip_fraction /= row_weight;
    stats.grad_norm /= row_weight;
  }
  return stats;
}

}  // namespace aprl
