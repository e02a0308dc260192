#include "aprl/observation.hpp"

#include <cmath>

#include "aprl/errors.hpp"

namespace aprl {

double point_line_distance(const Vec3& p, const Vec3& w_prev, const Vec3& w_cur) {
  const Vec3 segment = w_cur - w_prev;
  const double len = segment.norm();
  if (len < 1e-9) return (p - w_cur).norm();
  return (p - w_prev).cross(segment).norm() / len;
}

double alignment(const AgentState& state, const Vec3& w_cur) {
  Vec3 fwd = state.orientation.forward();
  Vec3 to_wp = w_cur - state.position;
  fwd.z = 0.0;
  to_wp.z = 0.0;
  const double nf = fwd.norm();
  const double nw = to_wp.norm();
  if (nf < 1e-9 || nw < 1e-9) return 0.0;
  return fwd.dot(to_wp) / (nf * nw);
}

namespace {

inline float clamped_unit(double v) {
  return static_cast<float>(clamp(v, -1.0, 1.0));
}

}  // namespace

ObsFrame encode_observation(const AgentState& state, const WaypointPath& path,
                            const PathProgress& progress, const World& world,
                            const Quat& prev_orientation) {
  if (!state.finite() || !prev_orientation.finite())
    throw ValidationError("encode_observation: non-finite inputs");

  const Vec3 extent = world.bounds.extent();
  const double diag = world.bounds.diagonal();
  const int i = progress.current_index;
  const Vec3& w_cur = path.waypoint_at(i);
  const Vec3& w_next = path.waypoint_at(i + 1);  // repeats w_N past the end
  const Vec3& w_prev = path.line_start(i);

  const Vec3 rel_cur = w_cur - state.position;
  const Vec3 rel_next = w_next - state.position;
  const double d_w = rel_cur.norm();
  const double d_l = point_line_distance(state.position, w_prev, w_cur);
  const double d_g = state.mode == ControlMode::ZeroG
                         ? 0.0
                         : state.position.z - world.ground_height;
  const Quat& q = state.orientation;

  ObsFrame f{};
  f[0] = static_cast<float>(rel_cur.x / extent.x);
  f[1] = static_cast<float>(rel_cur.y / extent.y);
  f[2] = static_cast<float>(rel_cur.z / extent.z);
  f[3] = static_cast<float>(rel_next.x / extent.x);
  f[4] = static_cast<float>(rel_next.y / extent.y);
  f[5] = static_cast<float>(rel_next.z / extent.z);
  f[6] = static_cast<float>(clamp01(d_w / diag));
  f[7] = static_cast<float>(clamp01(d_l / diag));
  f[8] = static_cast<float>(clamp01(d_g / diag));
  f[9] = clamped_unit(state.velocity.x / extent.x);
  f[10] = clamped_unit(state.velocity.y / extent.y);
  f[11] = clamped_unit(state.velocity.z / extent.z);
  f[12] = clamped_unit(state.acceleration.x / extent.x);
  f[13] = clamped_unit(state.acceleration.y / extent.y);
  f[14] = clamped_unit(state.acceleration.z / extent.z);
  f[15] = static_cast<float>(q.w);
  f[16] = static_cast<float>(q.x);
  f[17] = static_cast<float>(q.y);
  f[18] = static_cast<float>(q.z);
  f[19] = clamped_unit(q.w - prev_orientation.w);
  f[20] = clamped_unit(q.x - prev_orientation.x);
  f[21] = clamped_unit(q.y - prev_orientation.y);
  f[22] = clamped_unit(q.z - prev_orientation.z);
  f[23] = static_cast<float>(alignment(state, w_cur));
  return f;
}

}  // namespace aprl
