#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aprl/geom.hpp"
#include "aprl/rng.hpp"
#include "aprl/sim.hpp"

namespace aprl {

enum class PathMode : std::uint8_t { GroundToGround = 0, FreeSpace = 1 };

const char* to_string(PathMode mode);

// Ordered waypoint set. GroundToGround paths store the ground start point as
// waypoints[0] followed by n in-air targets and a final ground target, so the
// first target index is 1. FreeSpace paths store n free targets starting at
// index 0.
struct WaypointPath {
  std::vector<Vec3> waypoints;
  PathMode mode = PathMode::FreeSpace;

  int last_index() const { return static_cast<int>(waypoints.size()) - 1; }
  int first_target_index() const { return mode == PathMode::GroundToGround ? 1 : 0; }
  int target_count() const {
    return static_cast<int>(waypoints.size()) - first_target_index();
  }

  // Active waypoint for an index, clamped to the final waypoint once the
  // path is complete.
  const Vec3& waypoint_at(int index) const {
    const int last = last_index();
    const int i = index < 0 ? 0 : (index > last ? last : index);
    return waypoints[static_cast<std::size_t>(i)];
  }

  // Start of the line segment leading into waypoint `index`; degenerate
  // (equal endpoints) for a first FreeSpace target.
  const Vec3& line_start(int index) const {
    return waypoint_at(index - 1);
  }
};

struct PathProgress {
  int current_index = 0;     // may reach last_index()+1 when the path is complete
  int arrived_count = 0;
  double prev_distance = 0.0;  // meters to the current waypoint at the previous step

  bool complete(const WaypointPath& path) const {
    return current_index > path.last_index();
  }
};

enum class EpisodeStatus : std::uint8_t {
  Running = 0,
  Success = 1,
  Crashed = 2,
  TimedOut = 3,
};

const char* to_string(EpisodeStatus status);

struct SegmentRange {
  double min = 8.0;   // meters
  double max = 16.0;
};

// Stepwise procedural path construction: each waypoint at a uniform distance
// in segment_range and uniform direction from the previous, rejection-sampled
// into the world bounds. GroundToGround starts from a uniform ground point,
// keeps intermediate waypoints above ground + 5 m, and ends on the ground.
// FreeSpace chains from `chain_start` when given (the agent's spawn), so the
// first target sits one segment away; otherwise the chain roots at a uniform
// in-bounds point. Throws ValidationError when rejection sampling fails 1000
// times in a row (bounds too tight for the requested segments).
WaypointPath generate_path(Rng& rng, const World& world, PathMode mode,
                           int n_waypoints, const SegmentRange& segment_range,
                           const std::optional<Vec3>& chain_start = std::nullopt);

// Fresh progress for an agent at `position` starting on `path`.
PathProgress start_progress(const WaypointPath& path, const Vec3& position);

// Advances the waypoint index when the agent is strictly within epsilon of
// the current waypoint; updates prev_distance either way.
struct AdvanceResult {
  PathProgress progress;
  bool arrived = false;
};
AdvanceResult advance_waypoint(const PathProgress& progress, const Vec3& position,
                               const WaypointPath& path, double epsilon);

// Success requires path completion; GroundToGround additionally requires a
// survivable landed contact within epsilon of the final waypoint.
EpisodeStatus episode_status(const AgentState& state, const PathProgress& progress,
                             const WaypointPath& path, double epsilon, int steps,
                             int max_steps);

inline constexpr double kMinIntermediateClearance = 5.0;  // meters above ground

}  // namespace aprl
