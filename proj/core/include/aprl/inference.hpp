#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aprl/checkpoint.hpp"
#include "aprl/nn.hpp"

namespace aprl {

// Deployment-side policy runtime: immutable flat parameter arrays, scratch
// buffers provisioned per session, no allocation on the inference path.
// Deterministic by construction (action = clamp(mu); helicopter fire output
// thresholded at 0.5 rather than clamped).
class InferenceModel {
 public:
  static InferenceModel load(const std::string& path);
  static InferenceModel from_policy(const PolicyModel<float>& model);

  int input_dim() const { return input_dim_; }
  int action_dim() const { return action_dim_; }
  ControlMode mode() const { return mode_; }
  std::uint16_t obs_layout_version() const { return obs_layout_version_; }
  bool has_value_head() const { return has_value_head_; }

  // Per-caller scratch; one session per concurrent caller.
  struct Session {
    std::vector<float> a;
    std::vector<float> b;
  };
  Session make_session() const;

  // Batch-1 inference. obs must hold input_dim() floats, actions_out
  // action_dim() floats. Returns the value-head output (0 when stripped).
  // Performs no allocation.
  float infer(Session& session, const float* obs, float* actions_out) const;

  // Convenience wrapper for callers without a session.
  std::vector<float> infer(const std::vector<float>& obs) const;

 private:
  struct Layer {
    int rows = 0;
    int cols = 0;
    std::vector<float> weights;  // row-major
    std::vector<float> bias;
  };

  static InferenceModel build(const PolicyModel<float>& model);

  std::vector<Layer> trunk_;
  Layer mu_head_;
  Layer value_head_;
  bool has_value_head_ = false;
  int input_dim_ = 0;
  int action_dim_ = 0;
  int max_width_ = 0;
  ControlMode mode_ = ControlMode::Helicopter;
  std::uint16_t obs_layout_version_ = kObsLayoutVersion;
};

inline constexpr double kFireThreshold = 0.5;
inline constexpr int kFireActionIndex = 4;
inline constexpr double kInferenceLatencyBudgetUs = 100.0;

struct LatencyStats {
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
  double mean_us = 0.0;
  int iterations = 0;
};

// Wall-clock per batch-1 infer call over `iterations` calls after a warm-up;
// iterations must be at least 10^4 for stable percentiles.
LatencyStats bench_latency(const InferenceModel& model, int iterations);

}  // namespace aprl
