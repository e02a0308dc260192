#pragma once

#include <cstdint>
#include <optional>

#include "aprl/rng.hpp"
#include "aprl/script.hpp"

namespace aprl {

struct ObjectiveCommand {
  enum class Kind { Idle, MoveTo, Hold, EnterVehicle } kind = Kind::Idle;
  Vec3 target;
  double radius_m = 0.0;            // Hold only
  ControlMode vehicle_mode = ControlMode::Helicopter;  // EnterVehicle only
  std::int64_t issued_tick = 0;

  bool operator==(const ObjectiveCommand&) const = default;
};

const char* to_string(ObjectiveCommand::Kind kind);

// What the interpreter can see of its bot each tick.
struct BotWorldView {
  ControlMode mode = ControlMode::OnFoot;
  Vec3 position;
  std::optional<Vec3> nav_waypoint;  // current target while volume-navigating
  bool nav_complete = false;
};

// Walks the objective graph: pass-through nodes (select_random, defend,
// move) execute immediately, timer nodes hold until their sampled deadline,
// navigate_volume holds until the bot is in the requested mode and its
// navigation finishes. The last emitted command persists between firings.
class ObjectiveInterpreter {
 public:
  ObjectiveInterpreter(const ObjectiveScript& script, std::uint64_t seed);

  ObjectiveCommand tick(const BotWorldView& view, double now_s);

  const std::string& current_node_id() const;
  const std::optional<Vec3>& selected_point() const { return selected_; }

 private:
  Vec3 resolve(const TargetRef& target) const;

  const ObjectiveScript* script_;
  Rng rng_;
  int current_ = 0;
  std::optional<Vec3> selected_;
  std::optional<double> timer_deadline_;
  ObjectiveCommand last_command_;
  std::int64_t tick_count_ = 0;
};

}  // namespace aprl
