#include "aprl/task.hpp"

#include <cmath>

#include "aprl/errors.hpp"

namespace aprl {

const char* to_string(PathMode mode) {
  return mode == PathMode::GroundToGround ? "ground_to_ground" : "free_space";
}

const char* to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::Running: return "running";
    case EpisodeStatus::Success: return "success";
    case EpisodeStatus::Crashed: return "crashed";
    case EpisodeStatus::TimedOut: return "timed_out";
  }
  return "?";
}

namespace {

constexpr int kMaxRejections = 1000;

// Fraction of the maximum segment length budgeted as descent per remaining
// hop; keeps a healthy acceptance window when a waypoint sits at its ceiling.
constexpr double kDescentFraction = 0.8;

[[noreturn]] void rejection_failure(const char* what) {
  throw ValidationError(std::string("generate_path: ") + what +
                        " (bounds too tight after 1000 attempts)");
}

Vec3 sample_step_from(Rng& rng, const Vec3& from, const SegmentRange& range) {
  const double dist = rng.uniform(range.min, range.max);
  double dx, dy, dz;
  rng.unit_vector(dx, dy, dz);
  return from + dist * Vec3{dx, dy, dz};
}

bool inside_shrunk(const Aabb& b, const Vec3& p, double margin) {
  return p.x >= b.min.x + margin && p.x <= b.max.x - margin &&
         p.y >= b.min.y + margin && p.y <= b.max.y - margin && p.z >= b.min.z &&
         p.z <= b.max.z;
}

}  // namespace

WaypointPath generate_path(Rng& rng, const World& world, PathMode mode,
                           int n_waypoints, const SegmentRange& segment_range,
                           const std::optional<Vec3>& chain_start) {
  if (n_waypoints < 1) throw ValidationError("generate_path: n_waypoints must be >= 1");
  if (segment_range.min <= 0.0 || segment_range.min > segment_range.max)
    throw ValidationError("generate_path: invalid segment range");
  if (segment_range.max > world.bounds.diagonal())
    throw ValidationError("generate_path: segment range exceeds bounds diameter");

  const Aabb& b = world.bounds;
  WaypointPath path;
  path.mode = mode;

  if (mode == PathMode::FreeSpace) {
    path.waypoints.reserve(static_cast<std::size_t>(n_waypoints));
    Vec3 prev;
    if (chain_start) {
      int attempts = 0;
      do {
        if (++attempts > kMaxRejections) rejection_failure("first free-space waypoint");
        prev = sample_step_from(rng, *chain_start, segment_range);
      } while (!b.contains(prev));
    } else {
      prev = {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y),
              rng.uniform(b.min.z, b.max.z)};
    }
    path.waypoints.push_back(prev);
    for (int i = 1; i < n_waypoints; ++i) {
      int attempts = 0;
      Vec3 next;
      do {
        if (++attempts > kMaxRejections) rejection_failure("free-space waypoint");
        next = sample_step_from(rng, prev, segment_range);
      } while (!b.contains(next));
      path.waypoints.push_back(next);
      prev = next;
    }
    return path;
  }

  // GroundToGround: ground start, (n-1) in-air targets, final ground target.
  const double ground = world.ground_height;
  const Vec3 start = chain_start
                         ? Vec3{chain_start->x, chain_start->y, ground}
                         : Vec3{rng.uniform(b.min.x, b.max.x),
                                rng.uniform(b.min.y, b.max.y), ground};
  path.waypoints.reserve(static_cast<std::size_t>(n_waypoints) + 1);
  path.waypoints.push_back(start);

  Vec3 prev = start;
  for (int i = 1; i < n_waypoints; ++i) {
    // cascade a height ceiling so the remaining hops (including the landing
    // leg) can always descend back to the ground within one segment each
    const int hops_left = n_waypoints - i;
    const double ceiling =
        std::min(b.max.z, ground + hops_left * kDescentFraction * segment_range.max);
    int attempts = 0;
    Vec3 next;
    do {
      if (++attempts > kMaxRejections) rejection_failure("in-air waypoint");
      next = sample_step_from(rng, prev, segment_range);
    } while (!b.contains(next) || next.z <= ground + kMinIntermediateClearance ||
             next.z > ceiling);
    path.waypoints.push_back(next);
    prev = next;
  }

  // final waypoint back on the ground at an exact segment distance
  int attempts = 0;
  for (;;) {
    if (++attempts > kMaxRejections) rejection_failure("landing waypoint");
    const double dist = rng.uniform(segment_range.min, segment_range.max);
    const double drop = prev.z - ground;
    if (drop > dist) continue;  // too high to reach the ground within one segment
    const double lateral = std::sqrt(std::max(0.0, dist * dist - drop * drop));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 landing{prev.x + lateral * std::cos(phi),
                       prev.y + lateral * std::sin(phi), ground};
    if (!inside_shrunk(b, landing, 0.0)) continue;
    path.waypoints.push_back(landing);
    break;
  }
  return path;
}

PathProgress start_progress(const WaypointPath& path, const Vec3& position) {
  PathProgress progress;
  progress.current_index = path.first_target_index();
  progress.arrived_count = 0;
  progress.prev_distance = (path.waypoint_at(progress.current_index) - position).norm();
  return progress;
}

AdvanceResult advance_waypoint(const PathProgress& progress, const Vec3& position,
                               const WaypointPath& path, double epsilon) {
  AdvanceResult result{progress, false};
  PathProgress& p = result.progress;
  if (progress.complete(path)) {
    p.prev_distance = (path.waypoint_at(p.current_index) - position).norm();
    return result;
  }
  const double dist = (path.waypoint_at(p.current_index) - position).norm();
  if (dist < epsilon) {  // strict: d == epsilon is not an arrival
    result.arrived = true;
    p.arrived_count += 1;
    p.current_index += 1;
    p.prev_distance = (path.waypoint_at(p.current_index) - position).norm();
  } else {
    p.prev_distance = dist;
  }
  return result;
}

EpisodeStatus episode_status(const AgentState& state, const PathProgress& progress,
                             const WaypointPath& path, double epsilon, int steps,
                             int max_steps) {
  if (!state.alive) return EpisodeStatus::Crashed;
  if (progress.complete(path)) {
    if (path.mode == PathMode::FreeSpace) return EpisodeStatus::Success;
    const double dist = (path.waypoints.back() - state.position).norm();
    if (state.grounded && dist < epsilon) return EpisodeStatus::Success;
  }
  if (steps >= max_steps) return EpisodeStatus::TimedOut;
  return EpisodeStatus::Running;
}

}  // namespace aprl
