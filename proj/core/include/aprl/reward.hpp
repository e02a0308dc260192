#pragma once

#include "aprl/geom.hpp"
#include "aprl/observation.hpp"
#include "aprl/sim.hpp"
#include "aprl/task.hpp"

namespace aprl {

struct RewardParams {
  double alpha = 0.1;   // weight of the reciprocal line-distance term
  double beta = 0.5;    // weight of the XY alignment term
  double gamma = 1.0;   // weight of the per-step waypoint progress term
  double psi = 10.0;    // arrival bonus
  double epsilon = 2.0;           // meters, arrival threshold
  double d_l_floor = 0.1;         // meters, clamps the 1/d_l singularity
  double stability_penalty = 1.0; // helicopter only, applied while tipped over

  bool valid() const { return d_l_floor > 0.0 && epsilon > 0.0; }
};

// Individual terms, exposed so tests can rebuild the sum in isolation.
// Line term uses meters (the floor is a length); the progress term uses
// bounds-diagonal units like the observation encoding.
double reward_line_term(double d_l_meters, const RewardParams& params);
double reward_alignment_term(double phi, const RewardParams& params);
double reward_progress_term(double prev_dist_m, double cur_dist_m, double bounds_diag,
                            const RewardParams& params);
double reward_arrival_term(bool arrived, const RewardParams& params);
double reward_stability_term(const AgentState& state, const RewardParams& params);

// r = alpha / max(d_l, floor) + beta * phi + gamma * delta_w
//     + psi * 1(arrived) - stability_penalty * 1(helicopter tipped over)
//
// Every geometric term is evaluated against the waypoint that was active
// before any arrival this step (prev_progress.current_index), so the
// progress term compares distances to a single target.
double compute_reward(const AgentState& prev_state, const PathProgress& prev_progress,
                      const AgentState& cur_state, bool arrived,
                      const WaypointPath& path, const World& world,
                      const RewardParams& params);

}  // namespace aprl
