#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aprl/env.hpp"
#include "aprl/ppo.hpp"
#include "aprl/rollout.hpp"

namespace aprl {

// SAC was evaluated alongside PPO during prototyping; its trunk size is kept
// as a configuration constant, there is no SAC trainer.
inline constexpr std::array<int, 2> kSacTrunkDims{512, 512};
inline constexpr std::array<int, 2> kPpoTrunkDims{512, 256};

// Line-oriented configuration text:
//
//   # comment
//   [section]
//   key = value            # scalars: 42, 0.5, true, names
//   vec = 1.0 2.0 3.0      # vectors: whitespace separated
//
// Every diagnostic carries file and line.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& name = "<config>");

  bool has(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  Vec3 get_vec3(const std::string& section, const std::string& key, const Vec3& fallback) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                const std::vector<int>& fallback) const;

  // required variants: missing key is a located error
  double require_double(const std::string& section, const std::string& key) const;
  std::uint64_t require_u64(const std::string& section, const std::string& key) const;

  // Keys present in the file but never read; used to reject typos.
  std::vector<std::string> unread_keys() const;
  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& msg) const;

 private:
  struct Entry {
    std::string raw;
    int line = 0;
    mutable bool read = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key) const;

  std::string name_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct DistribConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 46600;
  std::string server_host = "127.0.0.1";
  std::uint64_t client_id = 1;
  int num_processes = 1;
  int agents_per_process = 16;
};

struct ModelConfig {
  std::vector<int> hidden{kPpoTrunkDims.begin(), kPpoTrunkDims.end()};
  double log_sigma_init = kLogSigmaInit;
};

// Everything the harness needs, bound to one seed (no implicit entropy).
struct HarnessConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  EnvConfig env;
  ModelConfig model;
  PpoConfig ppo;
  long max_env_steps = 1000000;
  int max_iterations = std::numeric_limits<int>::max();
  double target_arrival_rate = 0.0;
  int checkpoint_interval = 25;
  DistribConfig distrib;

  TrainConfig train_config() const;
  PolicyModel<float> make_model(std::uint64_t model_seed) const;
};

// Loads and validates; throws ParseError (syntax/unknown keys) or
// ValidationError (module invariants).
HarnessConfig load_harness_config(const std::string& path);
HarnessConfig harness_config_from_string(const std::string& text,
                                         const std::string& name = "<config>");

}  // namespace aprl
