#pragma once

#include <vector>

namespace aprl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one time-ordered per-agent sequence:
//   delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with v_T = bootstrap_value and returns = A + v.
// Throws ValidationError on length mismatch.
GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<unsigned char>& dones,
                      double bootstrap_value, double discount, double lambda);

}  // namespace aprl
