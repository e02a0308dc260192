#include "aprl/gae.hpp"

#include "aprl/errors.hpp"

namespace aprl {

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<unsigned char>& dones,
                      double bootstrap_value, double discount, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw ValidationError("compute_gae: sequence length mismatch");

  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double not_done = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + discount * next_value * not_done - values[k];
    const double advantage = delta + discount * lambda * not_done * next_advantage;
    out.advantages[k] = advantage;
    out.returns[k] = advantage + values[k];
    next_advantage = advantage;
    next_value = values[k];
  }
  return out;
}

}  // namespace aprl
