#include <doctest.h>

#include "aprl/objectives.hpp"
#include "aprl/script.hpp"
#include "script_corpus.hpp"
#include "test_util.hpp"

using namespace aprl;
using testutil::kDefendScript;
using testutil::kMalformedScripts;

TEST_CASE("the defend-points pattern parses into a 3-node cycle") {
  const ObjectiveScript script = parse_script(std::string(kDefendScript));
  REQUIRE(script.nodes.size() == 3);
  CHECK(script.entry == "pick");
  CHECK(script.point_sets.at("capture").size() == 3);
  // the cycle: pick -> hold -> wait -> pick
  CHECK(script.node(script.index_of("pick")).next == "hold");
  CHECK(script.node(script.index_of("hold")).next == "wait");
  CHECK(script.node(script.index_of("wait")).next == "pick");
}

TEST_CASE("empty input reports a missing entry node") {
  CHECK_THROWS_WITH_AS(parse_script(""), doctest::Contains("missing entry"), ParseError);
}

TEST_CASE("every malformed script is rejected with a located diagnostic") {
  for (const auto& bad : kMalformedScripts) {
    CAPTURE(bad.name);
    bool threw = false;
    try {
      parse_script(std::string(bad.text), std::string(bad.name));
    } catch (const ParseError& e) {
      threw = true;
      CHECK(e.line() == bad.line);
      CHECK(e.column() >= 1);
      CHECK(std::string(e.what()).find(bad.name) != std::string::npos);  // file tag
    }
    REQUIRE(threw);
  }
}

namespace {

// Random valid scripts: a chain from the entry with a closing back-edge, so
// every node is reachable; $selected only appears after a select_random.
std::string random_script(Rng& rng) {
  const int n = 2 + static_cast<int>(rng.uniform_index(6));
  std::string text = "points set_a = [(1,2,3), (4,5,6)]\npoints set_b = [(0,0,0)]\n";
  text += "entry n0\n";
  bool selected_bound = false;
  for (int i = 0; i < n; ++i) {
    const std::string id = "n" + std::to_string(i);
    const std::string next = "n" + std::to_string((i + 1) % n);
    switch (rng.uniform_index(selected_bound ? 5 : 3)) {
      case 0:
        text += "node " + id + ": timer 2 7 -> " + next + "\n";
        break;
      case 1:
        text += "node " + id + ": select_random set_a -> " + next + "\n";
        selected_bound = true;
        break;
      case 2:
        text += "node " + id + ": move (3, 4, 5) -> " + next + "\n";
        break;
      case 3:
        text += "node " + id + ": defend $selected radius 6 -> " + next + "\n";
        break;
      default:
        text += "node " + id + ": navigate_volume zerog -> " + next + "\n";
        break;
    }
  }
  return text;
}

bool isomorphic(const ObjectiveScript& a, const ObjectiveScript& b) {
  if (a.entry != b.entry || a.point_sets != b.point_sets ||
      a.nodes.size() != b.nodes.size())
    return false;
  for (const ScriptNode& node : a.nodes) {
    if (!b.node_index.contains(node.id)) return false;
    const ScriptNode& other = b.node(b.index_of(node.id));
    if (node.next != other.next || node.body != other.body) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("serialize/parse round trip is graph-isomorphic") {
  Rng rng(606);
  for (int i = 0; i < 100; ++i) {
    const ObjectiveScript original = parse_script(random_script(rng));
    const ObjectiveScript reparsed = parse_script(serialize_script(original));
    REQUIRE(isomorphic(original, reparsed));
  }
  const ObjectiveScript fig = parse_script(std::string(kDefendScript));
  CHECK(isomorphic(fig, parse_script(serialize_script(fig))));
}

TEST_CASE("commands hold steady between timer firings") {
  const ObjectiveScript script = parse_script(std::string(kDefendScript));
  ObjectiveInterpreter interp(script, 42);
  BotWorldView view;
  const ObjectiveCommand first = interp.tick(view, 0.0);
  CHECK(first.kind == ObjectiveCommand::Kind::Hold);
  CHECK(first.radius_m == 5.0);
  // before the timer expires nothing changes (minimum interval is 10 s)
  for (double t = 0.1; t < 9.9; t += 0.1)
    CHECK(interp.tick(view, t) == first);
}

TEST_CASE("point selection is uniform") {
  const ObjectiveScript script = parse_script(std::string(kDefendScript));
  ObjectiveInterpreter interp(script, 7);
  BotWorldView view;
  std::map<double, int> counts;  // keyed by x coordinate of the held point
  double now = 0.0;
  ObjectiveCommand last = interp.tick(view, now);
  counts[last.target.x] += 1;
  const int kFirings = 10000;
  for (int i = 1; i < kFirings; ++i) {
    now += 31.0;  // beyond every possible deadline: one firing per tick
    last = interp.tick(view, now);
    counts[last.target.x] += 1;
  }
  REQUIRE(counts.size() == 3);
  double chi2 = 0.0;
  const double expected = kFirings / 3.0;
  for (const auto& [x, count] : counts)
    chi2 += (count - expected) * (count - expected) / expected;
  CHECK(aprl::testutil::chi2_pvalue_even_dof(chi2, 2) > 0.01);
}

TEST_CASE("degenerate timer fires at exactly its bound") {
  const ObjectiveScript script = parse_script(
      "points p = [(1,1,1)]\n"
      "entry s\n"
      "node s: select_random p -> w\n"
      "node w: timer 5 5 -> m\n"
      "node m: move $selected -> w\n");
  ObjectiveInterpreter interp(script, 3);
  BotWorldView view;
  // first tick: select fires, timer arms at t=0 with deadline exactly 5
  const ObjectiveCommand armed = interp.tick(view, 0.0);
  CHECK(armed.kind == ObjectiveCommand::Kind::Idle);
  CHECK(interp.tick(view, 4.999).kind == ObjectiveCommand::Kind::Idle);
  const ObjectiveCommand fired = interp.tick(view, 5.0);
  CHECK(fired.kind == ObjectiveCommand::Kind::MoveTo);
  CHECK(fired.target == Vec3{1, 1, 1});
}

TEST_CASE("interpreter streams are deterministic under a fixed seed") {
  const ObjectiveScript script = parse_script(std::string(kDefendScript));
  ObjectiveInterpreter a(script, 99), b(script, 99);
  BotWorldView view;
  for (int i = 0; i < 2000; ++i) {
    const double now = i * 0.5;
    REQUIRE(a.tick(view, now) == b.tick(view, now));
  }
}

TEST_CASE("navigate_volume holds for the vehicle, then streams move commands") {
  const ObjectiveScript script = parse_script(
      "entry fly\n"
      "node fly: navigate_volume helicopter -> after\n"
      "node after: move (9, 9, 0) -> after\n");
  ObjectiveInterpreter interp(script, 1);

  BotWorldView on_foot;
  on_foot.mode = ControlMode::OnFoot;
  const ObjectiveCommand enter = interp.tick(on_foot, 0.0);
  CHECK(enter.kind == ObjectiveCommand::Kind::EnterVehicle);
  CHECK(enter.vehicle_mode == ControlMode::Helicopter);
  CHECK(interp.tick(on_foot, 1.0).kind == ObjectiveCommand::Kind::EnterVehicle);

  BotWorldView flying;
  flying.mode = ControlMode::Helicopter;
  flying.nav_waypoint = Vec3{4, 5, 6};
  const ObjectiveCommand moving = interp.tick(flying, 2.0);
  CHECK(moving.kind == ObjectiveCommand::Kind::MoveTo);
  CHECK(moving.target == Vec3{4, 5, 6});

  flying.nav_complete = true;
  const ObjectiveCommand after = interp.tick(flying, 3.0);
  CHECK(after.kind == ObjectiveCommand::Kind::MoveTo);
  CHECK(after.target == Vec3{9, 9, 0});
}
