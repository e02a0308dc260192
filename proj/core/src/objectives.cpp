#include "aprl/objectives.hpp"

namespace aprl {

const char* to_string(ObjectiveCommand::Kind kind) {
  switch (kind) {
    case ObjectiveCommand::Kind::Idle: return "idle";
    case ObjectiveCommand::Kind::MoveTo: return "move_to";
    case ObjectiveCommand::Kind::Hold: return "hold";
    case ObjectiveCommand::Kind::EnterVehicle: return "enter_vehicle";
  }
  return "?";
}

ObjectiveInterpreter::ObjectiveInterpreter(const ObjectiveScript& script,
                                           std::uint64_t seed)
    : script_(&script), rng_(seed), current_(script.index_of(script.entry)) {}

const std::string& ObjectiveInterpreter::current_node_id() const {
  return script_->node(current_).id;
}

Vec3 ObjectiveInterpreter::resolve(const TargetRef& target) const {
  if (target.kind == TargetRef::Kind::Literal) return target.literal;
  // parse-time validation guarantees a selection happened on every path here
  return selected_.value_or(Vec3{});
}

ObjectiveCommand ObjectiveInterpreter::tick(const BotWorldView& view, double now_s) {
  tick_count_ += 1;
  // a budget of one visit per node per tick stops pass-through cycles from
  // spinning forever inside a single tick
  int budget = static_cast<int>(script_->nodes.size()) + 1;
  while (budget-- > 0) {
    const ScriptNode& node = script_->node(current_);
    if (const auto* timer = std::get_if<TimerNode>(&node.body)) {
      if (!timer_deadline_)
        timer_deadline_ = now_s + rng_.uniform(timer->min_s, timer->max_s);
      if (now_s < *timer_deadline_) break;  // still waiting; command unchanged
      timer_deadline_.reset();
      current_ = script_->index_of(node.next);
      continue;
    }
    if (const auto* select = std::get_if<SelectRandomNode>(&node.body)) {
      const std::vector<Vec3>& points = script_->point_sets.at(select->set_name);
      selected_ = points[rng_.uniform_index(points.size())];
      current_ = script_->index_of(node.next);
      continue;
    }
    if (const auto* defend = std::get_if<DefendNode>(&node.body)) {
      last_command_ = {ObjectiveCommand::Kind::Hold, resolve(defend->target),
                       defend->radius_m, ControlMode::Helicopter, tick_count_};
      current_ = script_->index_of(node.next);
      continue;
    }
    if (const auto* move = std::get_if<MoveNode>(&node.body)) {
      last_command_ = {ObjectiveCommand::Kind::MoveTo, resolve(move->target), 0.0,
                       ControlMode::Helicopter, tick_count_};
      current_ = script_->index_of(node.next);
      continue;
    }
    if (const auto* nav = std::get_if<NavigateVolumeNode>(&node.body)) {
      if (view.mode != nav->mode) {
        last_command_ = {ObjectiveCommand::Kind::EnterVehicle, view.position, 0.0,
                         nav->mode, tick_count_};
        break;  // hold until the bot reports the requested mode
      }
      if (view.nav_complete) {
        current_ = script_->index_of(node.next);
        continue;
      }
      // a MoveTo stream toward the active navigation waypoint while inside
      last_command_ = {ObjectiveCommand::Kind::MoveTo,
                       view.nav_waypoint.value_or(view.position), 0.0, nav->mode,
                       tick_count_};
      break;
    }
  }
  return last_command_;
}

}  // namespace aprl
