#include "aprl/rollout.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aprl/checkpoint.hpp"
#include "aprl/errors.hpp"

namespace aprl {

namespace {

constexpr std::uint64_t kSampleRngSalt = 0x5a6f8c3d1b2e4f70ULL;

}  // namespace

LocalTransport::LocalTransport(const EnvFactory& factory, int num_processes,
                               int agents_per_process, std::uint64_t seed,
                               std::uint64_t client_id)
    : envs_(factory, num_processes, agents_per_process, seed, client_id),
      client_id_(client_id) {}

bool LocalTransport::gather(UploadMap& uploads) {
  uploads.clear();
  std::vector<VectorEnv::SlotStep> steps;
  if (have_actions_) {
    steps = envs_.tick(next_actions_);
  } else {
    steps = envs_.tick({});  // initial reset tick
  }
  std::vector<StepRecord> records;
  records.reserve(steps.size());
  for (VectorEnv::SlotStep& s : steps) {
    StepRecord r;
    r.agent_index = s.agent_index;
    r.episode_id = s.episode_id;
    r.observation = std::move(s.observation);
    r.reward = s.reward;
    r.flags = s.flags;
    records.push_back(std::move(r));
  }
  uploads.emplace(client_id_, std::move(records));
  return true;
}

void LocalTransport::send_actions(const ActionMap& actions) {
  const auto it = actions.find(client_id_);
  if (it == actions.end()) throw ValidationError("LocalTransport: no actions for client");
  next_actions_.assign(static_cast<std::size_t>(envs_.slot_count()), ActionVector{});
  for (const ActionRecord& a : it->second) {
    ActionVector clamped{};
    for (int d = 0; d < kActionDim; ++d)
      clamped[static_cast<std::size_t>(d)] = clamp(a.action[static_cast<std::size_t>(d)], -1.0, 1.0);
    next_actions_.at(a.agent_index) = clamped;
  }
  have_actions_ = true;
}

RolloutCollector::RolloutCollector(RolloutTransport& transport, std::uint64_t seed)
    : transport_(transport), seed_(seed) {}

RolloutCollector::SlotState& RolloutCollector::slot(const AgentKey& key) {
  auto it = slots_.find(key);
  if (it == slots_.end()) {
    SlotState state;
    state.sample_rng.reseed(mix_seed(seed_ ^ kSampleRngSalt, key.client_id, key.agent_index));
    it = slots_.emplace(key, std::move(state)).first;
  }
  return it->second;
}

RolloutCollector::Iteration RolloutCollector::collect(const PolicyModel<float>& model,
                                                      int ticks) {
  Iteration out;
  const std::vector<float> sigma = sigma_of(model);

  for (int tick = 0; tick < ticks; ++tick) {
    UploadMap uploads;
    if (!transport_.gather(uploads)) {
      out.transport_alive = false;
      return out;
    }
    out.ticks += 1;

    // flatten rows in deterministic (client, agent) order
    struct RowRef {
      std::uint64_t client_id;
      const StepRecord* record;
    };
    std::vector<RowRef> rows;
    for (auto& [client_id, records] : uploads) {
      for (const StepRecord& r : records) rows.push_back({client_id, &r});
    }
    if (rows.empty()) continue;

    Matrix<float> obs_batch(static_cast<int>(rows.size()), model.input_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& obs = rows[i].record->observation;
      if (static_cast<int>(obs.size()) != model.input_dim)
        throw ValidationError("collect: observation width does not match the model");
      std::copy(obs.begin(), obs.end(), obs_batch.row(static_cast<int>(i)));
    }
    ForwardCache<float> cache;
    forward_batch(model, obs_batch, cache);

    ActionMap replies;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const StepRecord& record = *rows[i].record;
      const AgentKey key{rows[i].client_id, record.agent_index};
      SlotState& state = slot(key);
      const float row_value = cache.value[i];

      if (state.has_pending) {
        if (state.pending.episode_id == record.episode_id) {
          Transition t;
          t.key = key;
          t.episode_id = record.episode_id;
          t.observation = state.pending.observation;
          t.action = state.pending.action;
          t.log_prob = state.pending.log_prob;
          t.value = state.pending.value;
          t.reward = record.reward;
          t.flags = record.flags;
          if (flags_status(record.flags) == EpisodeStatus::TimedOut)
            t.bootstrap_value = row_value;  // value of the terminal observation
          out.transitions.push_back(std::move(t));

          state.episode_return += record.reward;
          state.episode_length += 1;
          if (flags_arrived(record.flags)) state.episode_arrivals += 1;
          if (flags_done(record.flags)) {
            out.episodes.push_back({key, record.episode_id, state.episode_return,
                                    state.episode_length, state.episode_arrivals,
                                    flags_status(record.flags)});
            state.episode_return = 0.0;
            state.episode_length = 0;
            state.episode_arrivals = 0;
          }
        }
        // a fresh episode id drops the action taken on the terminal state
      }

      std::vector<float> mu(static_cast<std::size_t>(model.action_dim));
      for (int d = 0; d < model.action_dim; ++d) mu[static_cast<std::size_t>(d)] = cache.mu(static_cast<int>(i), d);
      const ActionSample<float> sample = sample_action(mu, sigma, state.sample_rng);

      Pending pending;
      pending.episode_id = record.episode_id;
      pending.observation = record.observation;
      const int copy_dims = std::min(model.action_dim, kActionDim);
      for (int d = 0; d < copy_dims; ++d) pending.action[static_cast<std::size_t>(d)] = sample.pre_clamp[static_cast<std::size_t>(d)];
      pending.log_prob = sample.log_prob;
      pending.value = row_value;
      state.pending = std::move(pending);
      state.has_pending = true;

      ActionRecord reply;
      reply.agent_index = record.agent_index;
      reply.action = state.pending.action;
      reply.log_prob = sample.log_prob;
      reply.value = row_value;
      replies[key.client_id].push_back(reply);
    }
    transport_.send_actions(replies);
  }

  for (const auto& [key, state] : slots_) {
    if (state.has_pending)
      out.tail_bootstraps.emplace_back(key, state.pending.value);
  }
  return out;
}

std::string metrics_csv_header() {
  return "iteration,env_steps,mean_return,arrival_rate,crash_rate,clip_fraction,"
         "entropy,wall_clock_s";
}

std::string metrics_csv_line(const MetricsRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f",
                row.iteration, row.env_steps, row.mean_return, row.arrival_rate,
                row.crash_rate, row.clip_fraction, row.entropy, row.wall_clock_s);
  return buf;
}

namespace {

MetricsRow make_metrics_row(int iteration, long env_steps,
                            const std::vector<EpisodeSummary>& episodes,
                            const UpdateStats& stats, int targets_per_episode,
                            double wall_clock_s) {
  MetricsRow row;
  row.iteration = iteration;
  row.env_steps = env_steps;
  if (!episodes.empty()) {
    double ret = 0.0;
    int arrivals = 0;
    int crashes = 0;
    for (const EpisodeSummary& e : episodes) {
      ret += e.total_reward;
      arrivals += e.arrivals;
      crashes += e.status == EpisodeStatus::Crashed ? 1 : 0;
    }
    const double n = static_cast<double>(episodes.size());
    row.mean_return = ret / n;
    row.arrival_rate =
        static_cast<double>(arrivals) / (n * static_cast<double>(targets_per_episode));
    row.crash_rate = static_cast<double>(crashes) / n;
  }
  row.clip_fraction = stats.clip_fraction;
  row.entropy = stats.entropy;
  row.wall_clock_s = wall_clock_s;
  return row;
}

void save_model_checkpoint(const PolicyModel<float>& model, const std::string& dir,
                           const std::string& name) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  save_checkpoint(model, dir + "/" + name);
}

}  // namespace

TrainResult train_loop(PolicyModel<float>& model, RolloutTransport& transport,
                       const TrainConfig& config) {
  config.ppo.validate_or_throw();
  TrainResult result;
  if (config.max_env_steps <= 0) return result;  // zero budget: untouched model

  const auto start = std::chrono::steady_clock::now();
  RolloutCollector collector(transport, config.seed);
  AdamState<float> optimizer;
  Rng update_rng(mix_seed(config.seed, 0x9e1bULL));

  std::ofstream metrics_file;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    metrics_file.open(config.output_dir + "/metrics.csv", std::ios::trunc);
    metrics_file << metrics_csv_header() << "\n";
  }

  int target_streak = 0;
  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    // the initial tick and per-episode reset ticks deliver observations but
    // no transitions, so top up until the window holds a full horizon
    const int ticks = config.ppo.horizon + (iteration == 1 ? 1 : 0);
    auto batch = collector.collect(model, ticks);
    while (batch.transport_alive &&
           batch.transitions.size() < static_cast<std::size_t>(config.ppo.horizon)) {
      auto extra = collector.collect(model, 4);
      batch.transport_alive = extra.transport_alive;
      batch.ticks += extra.ticks;
      batch.transitions.insert(batch.transitions.end(),
                               std::make_move_iterator(extra.transitions.begin()),
                               std::make_move_iterator(extra.transitions.end()));
      batch.episodes.insert(batch.episodes.end(), extra.episodes.begin(),
                            extra.episodes.end());
      batch.tail_bootstraps = std::move(extra.tail_bootstraps);
    }
    if (!batch.transport_alive) {
      result.transport_disconnected = true;
      break;
    }
    if (batch.transitions.empty())
      throw ValidationError("train_loop: no transitions collected; no clients?");
    result.env_steps += static_cast<long>(batch.transitions.size());

    compute_advantages(batch.transitions, batch.tail_bootstraps, config.ppo);
    const UpdateStats stats =
        ppo_update(model, optimizer, batch.transitions, config.ppo, update_rng);
    if (stats.aborted)
      std::fprintf(stderr, "[train] iteration %d aborted on non-finite loss; parameters restored\n",
                   iteration);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const MetricsRow row = make_metrics_row(iteration, result.env_steps, batch.episodes,
                                            stats, config.targets_per_episode, wall);
    result.metrics.push_back(row);
    if (metrics_file) metrics_file << metrics_csv_line(row) << "\n" << std::flush;
    result.iterations = iteration;

    if (config.checkpoint_interval > 0 && iteration % config.checkpoint_interval == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "model_iter_%06d.apml", iteration);
      save_model_checkpoint(model, config.output_dir, name);
    }

    if (config.target_arrival_rate > 0.0 &&
        static_cast<int>(batch.episodes.size()) >= config.min_episodes_for_target &&
        row.arrival_rate >= config.target_arrival_rate) {
      if (++target_streak >= 3) break;
    } else {
      target_streak = 0;
    }
    if (result.env_steps >= config.max_env_steps) break;
  }

  save_model_checkpoint(model, config.output_dir, "model_final.apml");
  return result;
}

EvalStats evaluate_policy(const PolicyModel<float>& model, const EnvConfig& env_config,
                          int episodes, std::uint64_t seed) {
  WaypointEnv env(env_config, mix_seed(seed, 0xe7a1ULL));
  EvalStats stats;
  stats.episodes = episodes;
  long total_length = 0;
  double total_return = 0.0;
  int total_arrivals = 0;
  int successes = 0, crashes = 0, liftoffs = 0;

  for (int e = 0; e < episodes; ++e) {
    std::vector<float> obs = env.reset();
    int arrivals = 0;
    for (;;) {
      const PolicyOutput<float> out = forward(model, obs);
      ActionVector action{};
      for (int d = 0; d < model.action_dim && d < kActionDim; ++d)
        action[static_cast<std::size_t>(d)] = clamp(out.mu[static_cast<std::size_t>(d)], -1.0, 1.0);
      const EnvStep step = env.step(action);
      total_return += step.reward;
      total_length += 1;
      if (step.arrived) ++arrivals;
      obs = step.observation;
      if (step.done()) {
        if (step.status == EpisodeStatus::Success) ++successes;
        if (step.status == EpisodeStatus::Crashed) ++crashes;
        break;
      }
    }
    total_arrivals += arrivals;
    if (arrivals >= 1) ++liftoffs;
  }

  const double n = static_cast<double>(episodes);
  stats.arrival_rate = static_cast<double>(total_arrivals) /
                       (n * static_cast<double>(env_config.task.n_waypoints));
  stats.success_rate = successes / n;
  stats.crash_rate = crashes / n;
  stats.liftoff_rate = liftoffs / n;
  stats.mean_episode_length = static_cast<double>(total_length) / n;
  stats.mean_return = total_return / n;
  return stats;
}

}  // namespace aprl
