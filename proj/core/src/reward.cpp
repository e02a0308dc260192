#include "aprl/reward.hpp"

#include <algorithm>

namespace aprl {

double reward_line_term(double d_l_meters, const RewardParams& params) {
  return params.alpha / std::max(d_l_meters, params.d_l_floor);
}

double reward_alignment_term(double phi, const RewardParams& params) {
  return params.beta * phi;
}

double reward_progress_term(double prev_dist_m, double cur_dist_m, double bounds_diag,
                            const RewardParams& params) {
  return params.gamma * ((prev_dist_m - cur_dist_m) / bounds_diag);
}

double reward_arrival_term(bool arrived, const RewardParams& params) {
  return arrived ? params.psi : 0.0;
}

double reward_stability_term(const AgentState& state, const RewardParams& params) {
  if (state.mode != ControlMode::Helicopter) return 0.0;
  const bool tipped = state.orientation.up().dot({0.0, 0.0, 1.0}) <= 0.0;
  return tipped ? -params.stability_penalty : 0.0;
}

double compute_reward(const AgentState& prev_state, const PathProgress& prev_progress,
                      const AgentState& cur_state, bool arrived,
                      const WaypointPath& path, const World& world,
                      const RewardParams& params) {
  const int i = prev_progress.current_index;
  const Vec3& w_cur = path.waypoint_at(i);
  const Vec3& w_prev = path.line_start(i);

  const double d_l = point_line_distance(cur_state.position, w_prev, w_cur);
  const double phi = alignment(cur_state, w_cur);
  const double prev_dist = (w_cur - prev_state.position).norm();
  const double cur_dist = (w_cur - cur_state.position).norm();

  return reward_line_term(d_l, params) + reward_alignment_term(phi, params) +
         reward_progress_term(prev_dist, cur_dist, world.bounds.diagonal(), params) +
         reward_arrival_term(arrived, params) +
         reward_stability_term(cur_state, params);
}

}  // namespace aprl
