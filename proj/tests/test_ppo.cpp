#include <doctest.h>

#include <cmath>

#include "aprl/ppo.hpp"

using namespace aprl;

namespace {

// Transitions whose stored log-probs match the model exactly, as the
// collector would produce them.
std::vector<Transition> coherent_batch(const PolicyModel<float>& model, int count,
                                       Rng& rng, float advantage_fill = std::nanf("")) {
  std::vector<Transition> batch;
  const std::vector<float> sigma = sigma_of(model);
  for (int i = 0; i < count; ++i) {
    Transition t;
    t.key = {1, static_cast<std::uint32_t>(i % 4)};
    t.observation.resize(static_cast<std::size_t>(model.input_dim));
    for (float& v : t.observation) v = static_cast<float>(rng.uniform(-1, 1));
    const auto out = forward(model, t.observation);
    std::vector<float> mu = out.mu;
    const auto sample = sample_action(mu, sigma, rng);
    for (int d = 0; d < model.action_dim; ++d) t.action[static_cast<std::size_t>(d)] = sample.pre_clamp[static_cast<std::size_t>(d)];
    t.log_prob = sample.log_prob;
    t.value = out.value;
    t.reward = static_cast<float>(rng.uniform(-1, 1));
    t.advantage = std::isnan(advantage_fill) ? static_cast<float>(rng.uniform(-1, 1))
                                             : advantage_fill;
    t.return_to_go = out.value + t.advantage;
    batch.push_back(std::move(t));
  }
  return batch;
}

double mean_log_prob(const PolicyModel<float>& model, const std::vector<Transition>& batch) {
  const std::vector<float> sigma = sigma_of(model);
  double total = 0.0;
  for (const Transition& t : batch) {
    const auto out = forward(model, t.observation);
    std::vector<float> action(t.action.begin(), t.action.begin() + model.action_dim);
    total += gaussian_log_prob(out.mu.data(), sigma.data(), action.data(), model.action_dim);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("advantage normalization hits mean 0 std 1") {
  Rng rng(5);
  std::vector<float> adv;
  for (int i = 0; i < 1000; ++i) adv.push_back(static_cast<float>(rng.uniform(-3, 9)));
  normalize_advantages_in_place(adv);
  double mean = 0.0;
  for (float a : adv) mean += a;
  mean /= adv.size();
  double var = 0.0;
  for (float a : adv) var += (a - mean) * (a - mean);
  var /= adv.size();
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("frozen update (lr = 0) keeps ratios at one") {
  Rng rng(11);
  auto model = make_policy_model<float>(8, {16}, 3, rng);
  auto batch = coherent_batch(model, 64, rng);
  PpoConfig config;
  config.policy_lr = 0.0;
  config.horizon = 32;
  config.minibatch_size = 16;
  AdamState<float> adam;
  Rng update_rng(3);
  const UpdateStats stats = ppo_update(model, adam, batch, config, update_rng);
  CHECK(stats.clip_fraction == 0.0);
  CHECK(stats.mean_ratio == doctest::Approx(1.0).epsilon(1e-6));
  // with rho == 1 the surrogate averages to -mean(normalized A) ~= 0
  CHECK(std::abs(stats.surrogate_loss) < 1e-4);
  CHECK(!stats.aborted);
}

TEST_CASE("uniformly positive advantages push log-probs up") {
  Rng rng(21);
  auto model = make_policy_model<float>(8, {16}, 3, rng);
  auto batch = coherent_batch(model, 64, rng, /*advantage_fill=*/1.0f);
  PpoConfig config;
  config.policy_lr = 1e-4;
  config.epochs_per_iter = 1;
  config.horizon = 32;
  config.minibatch_size = 64;
  config.value_coeff = 0.0;
  config.entropy_coeff = 0.0;
  config.normalize_advantages = false;  // keep the raw positive signal
  const double before = mean_log_prob(model, batch);
  AdamState<float> adam;
  Rng update_rng(3);
  ppo_update(model, adam, batch, config, update_rng);
  const double after = mean_log_prob(model, batch);
  CHECK(after > before);
}

TEST_CASE("raising the clip range never shrinks the clip-free fraction") {
  Rng rng(31);
  auto model = make_policy_model<float>(8, {16}, 3, rng);
  auto batch = coherent_batch(model, 128, rng);
  // move the policy away from the data-collection policy first
  PpoConfig config;
  config.policy_lr = 5e-3;
  config.horizon = 64;
  config.minibatch_size = 64;
  AdamState<float> adam;
  Rng update_rng(7);
  ppo_update(model, adam, batch, config, update_rng);

  // frozen batch, frozen model: measure clipping at increasing ranges
  MiniBatch<float> mb;
  mb.obs.resize(static_cast<int>(batch.size()), model.input_dim);
  mb.actions.resize(static_cast<int>(batch.size()), model.action_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::copy(batch[i].observation.begin(), batch[i].observation.end(),
              mb.obs.row(static_cast<int>(i)));
    std::copy(batch[i].action.begin(), batch[i].action.begin() + model.action_dim,
              mb.actions.row(static_cast<int>(i)));
    mb.old_log_probs.push_back(batch[i].log_prob);
    mb.advantages.push_back(batch[i].advantage);
    mb.returns.push_back(batch[i].return_to_go);
  }
  double prev_free = -1.0;
  for (double clip : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    LossSpec spec;
    spec.clip_range = clip;
    LossStats<float> stats;
    ppo_loss(model, mb, spec, &stats);
    const double free = 1.0 - stats.clip_fraction;
    CHECK(free >= prev_free);
    prev_free = free;
  }
  CHECK(prev_free > 0.0);
}

TEST_CASE("update rejects a batch smaller than the horizon") {
  Rng rng(41);
  auto model = make_policy_model<float>(8, {16}, 3, rng);
  auto batch = coherent_batch(model, 16, rng);
  PpoConfig config;
  config.horizon = 64;
  AdamState<float> adam;
  Rng update_rng(1);
  CHECK_THROWS_AS(ppo_update(model, adam, batch, config, update_rng), ValidationError);
}

TEST_CASE("non-finite rewards abort the update and restore parameters") {
  Rng rng(51);
  auto model = make_policy_model<float>(8, {16}, 3, rng);
  auto batch = coherent_batch(model, 64, rng);
  batch[10].advantage = std::numeric_limits<float>::quiet_NaN();
  PpoConfig config;
  config.horizon = 32;
  config.minibatch_size = 64;
  config.normalize_advantages = false;  // let the NaN reach the loss
  const PolicyModel<float> before = model;
  AdamState<float> adam;
  Rng update_rng(2);
  const UpdateStats stats = ppo_update(model, adam, batch, config, update_rng);
  CHECK(stats.aborted);
  CHECK(model.trunk[0].weight.data == before.trunk[0].weight.data);
  CHECK(model.log_sigma == before.log_sigma);
}

TEST_CASE("compute_advantages folds the timeout bootstrap into the reward") {
  PpoConfig config;
  config.discount = 0.9;
  config.gae_lambda = 1.0;

  std::vector<Transition> batch(2);
  batch[0].key = batch[1].key = {1, 0};
  batch[0].reward = 1.0f;
  batch[0].value = 0.5f;
  batch[0].flags = make_step_flags(EpisodeStatus::Running, false);
  batch[1].reward = 2.0f;
  batch[1].value = 0.25f;
  batch[1].flags = make_step_flags(EpisodeStatus::TimedOut, false);
  batch[1].bootstrap_value = 3.0f;  // v(s_T) of the terminal observation

  compute_advantages(batch, {}, config);
  // delta_1 = (r_1 + gamma*v_T) - v_1   (done masks the recursive tail)
  const double delta1 = (2.0 + 0.9 * 3.0) - 0.25;
  CHECK(batch[1].advantage == doctest::Approx(delta1));
  // delta_0 = r_0 + gamma*v_1 - v_0; A_0 = delta_0 + gamma*lambda*A_1
  const double delta0 = 1.0 + 0.9 * 0.25 - 0.5;
  CHECK(batch[0].advantage == doctest::Approx(delta0 + 0.9 * 1.0 * delta1));
}

TEST_CASE("compute_advantages uses the tail bootstrap for unfinished agents") {
  PpoConfig config;
  config.discount = 0.9;
  config.gae_lambda = 0.0;

  std::vector<Transition> batch(1);
  batch[0].key = {2, 7};
  batch[0].reward = 1.0f;
  batch[0].value = 0.5f;
  batch[0].flags = make_step_flags(EpisodeStatus::Running, false);
  compute_advantages(batch, {{AgentKey{2, 7}, 2.0f}}, config);
  CHECK(batch[0].advantage == doctest::Approx(1.0 + 0.9 * 2.0 - 0.5));
  CHECK(batch[0].return_to_go == doctest::Approx(batch[0].advantage + 0.5));
}

TEST_CASE("crash and success terminals do not bootstrap") {
  PpoConfig config;
  config.discount = 0.9;
  config.gae_lambda = 0.95;
  for (EpisodeStatus status : {EpisodeStatus::Crashed, EpisodeStatus::Success}) {
    std::vector<Transition> batch(1);
    batch[0].key = {1, 1};
    batch[0].reward = 1.5f;
    batch[0].value = 0.75f;
    batch[0].flags = make_step_flags(status, status == EpisodeStatus::Success);
    batch[0].bootstrap_value = 99.0f;  // must be ignored
    compute_advantages(batch, {{AgentKey{1, 1}, 42.0f}}, config);
    CHECK(batch[0].advantage == doctest::Approx(1.5 - 0.75));
  }
}
