#pragma once

#include <array>
#include <string_view>

namespace aprl::testutil {

// The behavior-graph pattern of a point-defense bot: pick a capture point at
// random, hold it, re-pick after a random interval.
inline constexpr std::string_view kDefendScript = R"(# defend randomly selected capture points
points capture = [(10, 0, 0), (0, 10, 0), (-10, 0, 0)]
entry pick
node pick: select_random capture -> hold
node hold: defend $selected radius 5 -> wait
node wait: timer 10 30 -> pick
)";

struct MalformedCase {
  std::string_view name;
  std::string_view text;
  int line;  // expected diagnostic line
};

// Malformed inputs; each must be rejected with a located diagnostic.
inline constexpr std::array<MalformedCase, 20> kMalformedScripts{{
    {"empty file", "", 1},
    {"only comments", "# nothing here\n\n# still nothing\n", 1},
    {"missing entry", "points a = [(1,2,3)]\nnode n: move (1,2,3) -> n\n", 1},
    {"entry to unknown node", "entry ghost\nnode n: move (1,2,3) -> n\n", 1},
    {"unknown directive", "entry n\nnoode n: move (1,2,3) -> n\n", 2},
    {"duplicate entry", "entry a\nentry b\nnode a: move (0,0,0) -> a\n", 2},
    {"duplicate node id", "entry a\nnode a: move (0,0,0) -> a\nnode a: move (1,1,1) -> a\n", 3},
    {"duplicate point set", "points p = [(1,1,1)]\npoints p = [(2,2,2)]\nentry n\nnode n: move (0,0,0) -> n\n", 2},
    {"empty point set", "points p = []\nentry n\nnode n: move (0,0,0) -> n\n", 1},
    {"unterminated point list", "points p = [(1,2,3), (4,5\nentry n\nnode n: move (0,0,0) -> n\n", 1},
    {"timer min above max", "entry t\nnode t: timer 30 10 -> t\n", 2},
    {"timer zero minimum", "entry t\nnode t: timer 0 10 -> t\n", 2},
    {"timer missing bound", "entry t\nnode t: timer 10 -> t\n", 2},
    {"undefined point set", "entry s\nnode s: select_random ghosts -> s\n", 2},
    {"unknown node kind", "entry n\nnode n: wander (1,2,3) -> n\n", 2},
    {"edge to unknown node", "entry a\nnode a: move (0,0,0) -> nowhere\n", 2},
    {"unreachable node", "entry a\nnode a: move (0,0,0) -> a\nnode b: move (1,1,1) -> b\n", 3},
    {"selected before selection", "entry d\nnode d: defend $selected radius 3 -> d\n", 2},
    {"defend without radius", "points p = [(1,1,1)]\nentry s\nnode s: select_random p -> d\nnode d: defend $selected -> s\n", 4},
    {"trailing garbage", "entry n\nnode n: move (0,0,0) -> n extra\n", 2},
}};

}  // namespace aprl::testutil
