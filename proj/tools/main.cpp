#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <optional>

#include "aprl/checkpoint.hpp"
#include "aprl/client.hpp"
#include "aprl/config.hpp"
#include "aprl/inference.hpp"
#include "aprl/rollout.hpp"
#include "aprl/script.hpp"
#include "aprl/server.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_stop{false};
aprl::RolloutServer* g_server = nullptr;

void handle_signal(int) {
  g_stop.store(true);
  if (g_server) g_server->request_stop();
}

void install_signal_handlers() {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
}

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_steps;
  std::optional<int> max_iterations;
  std::optional<std::string> output_dir;
};

aprl::HarnessConfig load_config(const CliOptions& opts) {
  aprl::HarnessConfig config = aprl::load_harness_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.max_steps) config.max_env_steps = *opts.max_steps;
  if (opts.max_iterations) config.max_iterations = *opts.max_iterations;
  if (opts.output_dir) config.output_dir = *opts.output_dir;
  return config;
}

int cmd_train(const CliOptions& opts, bool serve) {
  const aprl::HarnessConfig config = load_config(opts);
  aprl::PolicyModel<float> model = config.make_model(config.seed);
  const aprl::TrainConfig train_config = config.train_config();

  std::printf("training %s task: %ld env steps budget, horizon %d, out=%s\n",
              aprl::to_string(config.env.control_mode), train_config.max_env_steps,
              train_config.ppo.horizon, train_config.output_dir.c_str());

  aprl::TrainResult result;
  if (serve) {
    aprl::ServerConfig server_config;
    server_config.bind_address = config.distrib.bind_address;
    server_config.port = config.distrib.port;
    aprl::RolloutServer server(server_config);
    g_server = &server;
    std::printf("serving rollout clients on %s:%u\n",
                config.distrib.bind_address.c_str(), server.port());
    result = aprl::train_loop(model, server, train_config);
    g_server = nullptr;
  } else {
    aprl::LocalTransport transport(aprl::waypoint_env_factory(config.env),
                                   config.distrib.num_processes,
                                   config.distrib.agents_per_process, config.seed,
                                   config.distrib.client_id);
    std::printf("local collection: %d agent slots\n", transport.slot_count());
    result = aprl::train_loop(model, transport, train_config);
  }

  std::printf("trained %d iterations, %ld env steps%s\n", result.iterations,
              result.env_steps,
              result.transport_disconnected ? " (transport disconnected)" : "");
  if (!result.metrics.empty()) {
    const aprl::MetricsRow& last = result.metrics.back();
    std::printf("final: mean_return=%.3f arrival_rate=%.3f crash_rate=%.3f\n",
                last.mean_return, last.arrival_rate, last.crash_rate);
  }
  return kExitOk;
}

int cmd_client(const CliOptions& opts, const std::string& server_override,
               std::optional<std::uint64_t> client_id_override) {
  const aprl::HarnessConfig config = load_config(opts);
  aprl::ClientRunConfig client_config;
  client_config.server_host = config.distrib.server_host;
  client_config.server_port = config.distrib.port;
  client_config.client_id = client_id_override.value_or(config.distrib.client_id);
  client_config.num_processes = config.distrib.num_processes;
  client_config.agents_per_process = config.distrib.agents_per_process;
  client_config.seed = config.seed;
  client_config.stop = &g_stop;
  if (!server_override.empty()) {
    const std::size_t colon = server_override.rfind(':');
    if (colon == std::string::npos)
      throw aprl::ValidationError("--server expects host:port");
    client_config.server_host = server_override.substr(0, colon);
    client_config.server_port = static_cast<std::uint16_t>(
        std::stoi(server_override.substr(colon + 1)));
  }

  std::printf("client %llu: %d processes x %d agents -> %s:%u\n",
              static_cast<unsigned long long>(client_config.client_id),
              client_config.num_processes, client_config.agents_per_process,
              client_config.server_host.c_str(), client_config.server_port);
  const aprl::ClientRunStats stats =
      aprl::run_client(client_config, aprl::waypoint_env_factory(config.env));
  std::printf("client done: %ld ticks over %d connections\n", stats.ticks,
              stats.connections);
  return stats.rejected ? kExitValidation : kExitOk;
}

int cmd_eval(const std::string& model_path, const CliOptions& opts, int episodes) {
  const aprl::HarnessConfig config = load_config(opts);
  const aprl::PolicyModel<float> model = aprl::load_checkpoint(model_path);
  if (model.obs_layout_version != aprl::kObsLayoutVersion)
    throw aprl::ValidationError("model uses an incompatible observation layout");
  const aprl::EvalStats stats =
      aprl::evaluate_policy(model, config.env, episodes, config.seed);
  std::printf("episodes:            %d\n", stats.episodes);
  std::printf("arrival_rate:        %.4f\n", stats.arrival_rate);
  std::printf("success_rate:        %.4f\n", stats.success_rate);
  std::printf("crash_rate:          %.4f\n", stats.crash_rate);
  std::printf("liftoff_rate:        %.4f\n", stats.liftoff_rate);
  std::printf("mean_episode_length: %.2f\n", stats.mean_episode_length);
  std::printf("mean_return:         %.3f\n", stats.mean_return);
  return kExitOk;
}

int cmd_export(const std::string& checkpoint_path, const std::string& out_path,
               bool strip_value) {
  const aprl::PolicyModel<float> model = aprl::load_checkpoint(checkpoint_path);
  aprl::save_checkpoint(model, out_path, strip_value);
  // verify the written artifact round trips before declaring success
  const aprl::InferenceModel runtime = aprl::InferenceModel::load(out_path);
  std::printf("exported %s (input %d, actions %d, %s, value head %s)\n", out_path.c_str(),
              runtime.input_dim(), runtime.action_dim(), aprl::to_string(runtime.mode()),
              runtime.has_value_head() ? "kept" : "stripped");
  return kExitOk;
}

int cmd_bench(const std::string& model_path, int iterations) {
  const aprl::InferenceModel model = aprl::InferenceModel::load(model_path);
  const aprl::LatencyStats stats = aprl::bench_latency(model, iterations);
  std::printf("batch-1 inference latency over %d calls:\n", stats.iterations);
  std::printf("  p50: %8.2f us\n", stats.p50_us);
  std::printf("  p95: %8.2f us\n", stats.p95_us);
  std::printf("  p99: %8.2f us\n", stats.p99_us);
  std::printf("  mean:%8.2f us\n", stats.mean_us);
  std::printf("budget: %.0f us -> %s\n", aprl::kInferenceLatencyBudgetUs,
              stats.p99_us < aprl::kInferenceLatencyBudgetUs ? "within budget"
                                                             : "OVER BUDGET");
  return kExitOk;
}

int cmd_lint_script(const std::string& path) {
  const aprl::ObjectiveScript script = aprl::parse_script_file(path);
  std::printf("%s: ok (%zu nodes, %zu point sets, entry '%s')\n", path.c_str(),
              script.nodes.size(), script.point_sets.size(), script.entry.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  install_signal_handlers();

  CLI::App app{"RL-augmented game-testing harness: waypoint-navigation test range, "
               "distributed PPO training, embedded policy deployment"};
  app.require_subcommand(1);

  CliOptions opts;
  bool serve = false;
  bool local = false;
  std::string server_override;
  std::optional<std::uint64_t> client_id_override;
  std::string model_path, out_path, script_path;
  int episodes = 100;
  int bench_iterations = 20000;
  bool strip_value = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", opts.config_path, "harness configuration file")->required();
    cmd->add_option("--seed", opts.seed, "override [run] seed");
    cmd->add_option("--steps", opts.max_steps, "override [train] max_env_steps");
    cmd->add_option("--iterations", opts.max_iterations, "override [train] max_iterations");
    cmd->add_option("--out", opts.output_dir, "override [run] output_dir");
  };

  CLI::App* train = app.add_subcommand("train", "train a policy (PPO)");
  add_common(train);
  train->add_flag("--serve", serve, "host the rollout server and train from remote clients");
  train->add_flag("--local", local, "collect rollouts from in-process environments");

  CLI::App* client = app.add_subcommand("client", "run a rollout client");
  add_common(client);
  client->add_option("--server", server_override, "server address as host:port");
  client->add_option("--client-id", client_id_override, "override [distrib] client_id");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a model with the deterministic policy");
  eval->add_option("model", model_path, "checkpoint or exported model (.apml)")->required();
  add_common(eval);
  eval->add_option("--episodes", episodes, "evaluation episodes (default 100)");

  CLI::App* exp = app.add_subcommand("export", "export a checkpoint for embedded inference");
  exp->add_option("checkpoint", model_path, "trained checkpoint (.apml)")->required();
  exp->add_option("output", out_path, "output model file")->required();
  exp->add_flag("--strip-value", strip_value, "drop the value head from the export");

  CLI::App* bench = app.add_subcommand("bench", "measure batch-1 inference latency");
  bench->add_option("model", model_path, "model file (.apml)")->required();
  bench->add_option("--iterations", bench_iterations, "timed calls (>= 10000)");

  CLI::App* lint = app.add_subcommand("lint-script", "validate an objective script");
  lint->add_option("script", script_path, "objective script file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) {
      if (serve == local)  // exactly one collection mode
        throw aprl::ValidationError("train needs exactly one of --local or --serve");
      return cmd_train(opts, serve);
    }
    if (client->parsed()) return cmd_client(opts, server_override, client_id_override);
    if (eval->parsed()) return cmd_eval(model_path, opts, episodes);
    if (exp->parsed()) return cmd_export(model_path, out_path, strip_value);
    if (bench->parsed()) return cmd_bench(model_path, bench_iterations);
    if (lint->parsed()) return cmd_lint_script(script_path);
  } catch (const aprl::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const aprl::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const aprl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
