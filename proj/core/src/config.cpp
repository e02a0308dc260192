#include "aprl/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "aprl/errors.hpp"

namespace aprl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream stream(s);
  for (std::string tok; stream >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
  ConfigFile config;
  config.name_ = name;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']')
        throw ParseError(name, line_no, 1, "unterminated section header");
      section = trim(content.substr(1, content.size() - 2));
      if (section.empty()) throw ParseError(name, line_no, 1, "empty section name");
      continue;
    }
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos)
      throw ParseError(name, line_no, 1, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ParseError(name, line_no, 1, "empty key");
    if (section.empty())
      throw ParseError(name, line_no, 1, "key '" + key + "' outside any [section]");
    auto [it, inserted] = config.sections_[section].emplace(key, Entry{value, line_no});
    if (!inserted)
      throw ParseError(name, line_no, 1,
                       "duplicate key '" + key + "' (first at line " +
                           std::to_string(it->second.line) + ")");
  }
  return config;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) return nullptr;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return nullptr;
  it->second.read = true;
  return &it->second;
}

const ConfigFile::Entry& ConfigFile::require(const std::string& section,
                                             const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ParseError(name_, 1, 1, "missing required key [" + section + "] " + key);
  return *e;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void ConfigFile::fail(const std::string& section, const std::string& key,
                      const std::string& msg) const {
  const auto sec = sections_.find(section);
  int line = 1;
  if (sec != sections_.end()) {
    const auto it = sec->second.find(key);
    if (it != sec->second.end()) line = it->second.line;
  }
  throw ParseError(name_, line, 1, "[" + section + "] " + key + ": " + msg);
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double value = 0.0;
  const char* begin = e->raw.data();
  const char* end = begin + e->raw.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) fail(section, key, "expected a number");
  return value;
}

double ConfigFile::require_double(const std::string& section, const std::string& key) const {
  require(section, key);
  return get_double(section, key, 0.0);
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  int value = 0;
  const char* begin = e->raw.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + e->raw.size(), value);
  if (ec != std::errc{} || ptr != begin + e->raw.size())
    fail(section, key, "expected an integer");
  return value;
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  long value = 0;
  const char* begin = e->raw.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + e->raw.size(), value);
  if (ec != std::errc{} || ptr != begin + e->raw.size())
    fail(section, key, "expected an integer");
  return value;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::uint64_t value = 0;
  const char* begin = e->raw.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + e->raw.size(), value);
  if (ec != std::errc{} || ptr != begin + e->raw.size())
    fail(section, key, "expected an unsigned integer");
  return value;
}

std::uint64_t ConfigFile::require_u64(const std::string& section,
                                      const std::string& key) const {
  require(section, key);
  return get_u64(section, key, 0);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->raw == "true" || e->raw == "1") return true;
  if (e->raw == "false" || e->raw == "0") return false;
  fail(section, key, "expected true or false");
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->raw : fallback;
}

Vec3 ConfigFile::get_vec3(const std::string& section, const std::string& key,
                          const Vec3& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::vector<std::string> parts = split_ws(e->raw);
  if (parts.size() != 3) fail(section, key, "expected three numbers");
  Vec3 v;
  double* comps[3] = {&v.x, &v.y, &v.z};
  for (int i = 0; i < 3; ++i) {
    const std::string& p = parts[static_cast<std::size_t>(i)];
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), *comps[i]);
    if (ec != std::errc{} || ptr != p.data() + p.size())
      fail(section, key, "expected three numbers");
  }
  return v;
}

std::vector<int> ConfigFile::get_int_list(const std::string& section, const std::string& key,
                                          const std::vector<int>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<int> out;
  for (const std::string& p : split_ws(e->raw)) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), value);
    if (ec != std::errc{} || ptr != p.data() + p.size())
      fail(section, key, "expected integers");
    out.push_back(value);
  }
  if (out.empty()) fail(section, key, "expected at least one integer");
  return out;
}

std::vector<std::string> ConfigFile::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) {
      if (!entry.read)
        out.push_back("[" + section + "] " + key + " (line " +
                      std::to_string(entry.line) + ")");
    }
  }
  return out;
}

namespace {

ControlMode parse_control_mode(const ConfigFile& f, const std::string& raw) {
  if (raw == "helicopter") return ControlMode::Helicopter;
  if (raw == "zerog") return ControlMode::ZeroG;
  f.fail("task", "control_mode", "expected helicopter or zerog");
}

PathMode parse_path_mode(const ConfigFile& f, const std::string& raw) {
  if (raw == "ground_to_ground") return PathMode::GroundToGround;
  if (raw == "free_space") return PathMode::FreeSpace;
  f.fail("task", "path_mode", "expected ground_to_ground or free_space");
}

HarnessConfig from_config_file(const ConfigFile& f, const std::string& name) {
  HarnessConfig c;
  c.seed = f.require_u64("run", "seed");
  c.output_dir = f.get_string("run", "output_dir", c.output_dir);

  World& world = c.env.world;
  world.bounds.min = f.get_vec3("world", "bounds_min", world.bounds.min);
  world.bounds.max = f.get_vec3("world", "bounds_max", world.bounds.max);
  world.ground_height = f.get_double("world", "ground_height", world.ground_height);
  world.dt = f.get_double("world", "dt", world.dt);

  VehicleParams& vehicle = c.env.vehicle;
  vehicle.max_thrust = f.get_double("vehicle", "max_thrust", vehicle.max_thrust);
  vehicle.torque_gains.pitch = f.get_double("vehicle", "torque_pitch", vehicle.torque_gains.pitch);
  vehicle.torque_gains.yaw = f.get_double("vehicle", "torque_yaw", vehicle.torque_gains.yaw);
  vehicle.torque_gains.roll = f.get_double("vehicle", "torque_roll", vehicle.torque_gains.roll);
  vehicle.linear_drag = f.get_double("vehicle", "linear_drag", vehicle.linear_drag);
  vehicle.angular_drag = f.get_double("vehicle", "angular_drag", vehicle.angular_drag);
  vehicle.move_force = f.get_double("vehicle", "move_force", vehicle.move_force);
  vehicle.gravity = f.get_double("vehicle", "gravity", vehicle.gravity);
  vehicle.crash_speed = f.get_double("vehicle", "crash_speed", vehicle.crash_speed);

  TaskParams& task = c.env.task;
  c.env.control_mode =
      parse_control_mode(f, f.get_string("task", "control_mode", "zerog"));
  const char* default_path_mode =
      c.env.control_mode == ControlMode::Helicopter ? "ground_to_ground" : "free_space";
  task.path_mode = parse_path_mode(f, f.get_string("task", "path_mode", default_path_mode));
  task.n_waypoints = f.get_int("task", "n_waypoints", task.n_waypoints);
  task.segment_range.min = f.get_double("task", "segment_min", task.segment_range.min);
  task.segment_range.max = f.get_double("task", "segment_max", task.segment_range.max);
  task.epsilon = f.get_double("task", "epsilon", task.epsilon);
  task.max_steps = f.get_int("task", "max_steps", task.max_steps);
  if (c.env.control_mode == ControlMode::ZeroG) vehicle.gravity = 0.0;

  RewardParams& reward = c.env.reward;
  reward.alpha = f.get_double("reward", "alpha", reward.alpha);
  reward.beta = f.get_double("reward", "beta", reward.beta);
  reward.gamma = f.get_double("reward", "gamma", reward.gamma);
  reward.psi = f.get_double("reward", "psi", reward.psi);
  reward.d_l_floor = f.get_double("reward", "d_l_floor", reward.d_l_floor);
  reward.stability_penalty =
      f.get_double("reward", "stability_penalty", reward.stability_penalty);
  reward.epsilon = task.epsilon;  // one arrival threshold for task and reward

  c.model.hidden = f.get_int_list("model", "hidden", c.model.hidden);
  c.model.log_sigma_init = f.get_double("model", "log_sigma_init", c.model.log_sigma_init);

  PpoConfig& ppo = c.ppo;
  ppo.discount = f.get_double("ppo", "discount", ppo.discount);
  ppo.gae_lambda = f.get_double("ppo", "gae_lambda", ppo.gae_lambda);
  ppo.clip_range = f.get_double("ppo", "clip_range", ppo.clip_range);
  ppo.policy_lr = f.get_double("ppo", "policy_lr", ppo.policy_lr);
  ppo.value_coeff = f.get_double("ppo", "value_coeff", ppo.value_coeff);
  ppo.entropy_coeff = f.get_double("ppo", "entropy_coeff", ppo.entropy_coeff);
  ppo.epochs_per_iter = f.get_int("ppo", "epochs", ppo.epochs_per_iter);
  ppo.minibatch_size = f.get_int("ppo", "minibatch_size", ppo.minibatch_size);
  ppo.horizon = f.get_int("ppo", "horizon", ppo.horizon);
  ppo.max_grad_norm = f.get_double("ppo", "max_grad_norm", ppo.max_grad_norm);
  ppo.normalize_advantages =
      f.get_bool("ppo", "normalize_advantages", ppo.normalize_advantages);

  c.max_env_steps = f.get_long("train", "max_env_steps", c.max_env_steps);
  c.max_iterations = f.get_int("train", "max_iterations", c.max_iterations);
  c.target_arrival_rate = f.get_double("train", "target_arrival_rate", c.target_arrival_rate);
  c.checkpoint_interval = f.get_int("train", "checkpoint_interval", c.checkpoint_interval);

  DistribConfig& distrib = c.distrib;
  distrib.bind_address = f.get_string("distrib", "bind_address", distrib.bind_address);
  distrib.port = static_cast<std::uint16_t>(f.get_int("distrib", "port", distrib.port));
  distrib.server_host = f.get_string("distrib", "server_host", distrib.server_host);
  distrib.client_id = f.get_u64("distrib", "client_id", distrib.client_id);
  distrib.num_processes = f.get_int("distrib", "num_processes", distrib.num_processes);
  distrib.agents_per_process =
      f.get_int("distrib", "agents_per_process", distrib.agents_per_process);

  const std::vector<std::string> unread = f.unread_keys();
  if (!unread.empty()) {
    std::string msg = "unknown configuration keys: ";
    for (std::size_t i = 0; i < unread.size(); ++i) {
      if (i) msg += ", ";
      msg += unread[i];
    }
    throw ParseError(name, 1, 1, msg);
  }

  c.env.validate_or_throw();
  c.ppo.validate_or_throw();
  if (distrib.num_processes < 1 || distrib.agents_per_process < 1)
    throw ValidationError("distrib: process and agent counts must be >= 1");
  for (int h : c.model.hidden)
    if (h < 1) throw ValidationError("model: hidden sizes must be >= 1");
  return c;
}

}  // namespace

TrainConfig HarnessConfig::train_config() const {
  TrainConfig t;
  t.ppo = ppo;
  t.seed = seed;
  t.max_env_steps = max_env_steps;
  t.max_iterations = max_iterations;
  t.target_arrival_rate = target_arrival_rate;
  t.checkpoint_interval = checkpoint_interval;
  t.output_dir = output_dir;
  t.targets_per_episode = env.task.n_waypoints;
  return t;
}

PolicyModel<float> HarnessConfig::make_model(std::uint64_t model_seed) const {
  Rng rng(model_seed);
  PolicyModel<float> m = make_policy_model<float>(kObsVectorSize, model.hidden, kActionDim,
                                                  rng, model.log_sigma_init);
  m.mode = env.control_mode;
  m.norm.bounds_min = env.world.bounds.min;
  m.norm.bounds_max = env.world.bounds.max;
  return m;
}

HarnessConfig load_harness_config(const std::string& path) {
  return from_config_file(ConfigFile::parse_file(path), path);
}

HarnessConfig harness_config_from_string(const std::string& text, const std::string& name) {
  return from_config_file(ConfigFile::parse_string(text, name), name);
}

}  // namespace aprl
