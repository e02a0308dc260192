#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "aprl/errors.hpp"
#include "aprl/geom.hpp"
#include "aprl/sim.hpp"

namespace aprl {

// Objective-script DSL, line oriented:
//
//   # comment
//   points <name> = [(x,y,z), (x,y,z), ...]
//   entry <id>
//   node <id>: timer <min_s> <max_s> -> <next>
//   node <id>: select_random <set> -> <next>
//   node <id>: defend <target> radius <r> -> <next>
//   node <id>: move <target> -> <next>
//   node <id>: navigate_volume <helicopter|zerog> -> <next>
//
// <target> is either the literal `(x,y,z)` or `$selected`, the point most
// recently bound by a select_random node.
inline constexpr int kScriptFormatVersion = 1;

// A target reference resolved at interpretation time.
struct TargetRef {
  enum class Kind { Selected, Literal } kind = Kind::Selected;
  Vec3 literal;

  bool operator==(const TargetRef&) const = default;
};

struct TimerNode {
  double min_s = 0.0;
  double max_s = 0.0;
  bool operator==(const TimerNode&) const = default;
};

struct SelectRandomNode {
  std::string set_name;
  bool operator==(const SelectRandomNode&) const = default;
};

struct DefendNode {
  TargetRef target;
  double radius_m = 0.0;
  bool operator==(const DefendNode&) const = default;
};

struct MoveNode {
  TargetRef target;
  bool operator==(const MoveNode&) const = default;
};

struct NavigateVolumeNode {
  ControlMode mode = ControlMode::Helicopter;
  bool operator==(const NavigateVolumeNode&) const = default;
};

using NodeBody =
    std::variant<TimerNode, SelectRandomNode, DefendNode, MoveNode, NavigateVolumeNode>;

struct ScriptNode {
  std::string id;
  NodeBody body;
  std::string next;
  int line = 0;
  int column = 0;
};

struct ObjectiveScript {
  std::map<std::string, std::vector<Vec3>> point_sets;
  std::vector<ScriptNode> nodes;
  std::map<std::string, int> node_index;
  std::string entry;

  const ScriptNode& node(int index) const {
    return nodes[static_cast<std::size_t>(index)];
  }
  int index_of(const std::string& id) const { return node_index.at(id); }
};

// Parses and validates a script; every failure is a ParseError carrying the
// offending line and column. Validation covers: entry present and resolvable,
// edges and point sets resolvable, timer ranges sane, every node reachable
// from the entry, and no `$selected` use before any select_random can run.
ObjectiveScript parse_script(const std::string& text,
                             const std::string& source_name = "<script>");

ObjectiveScript parse_script_file(const std::string& path);

// Canonical text form; parse(serialize(s)) is isomorphic to s.
std::string serialize_script(const ObjectiveScript& script);

}  // namespace aprl
