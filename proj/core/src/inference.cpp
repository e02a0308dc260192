#include "aprl/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "aprl/errors.hpp"
#include "aprl/kernels.hpp"

namespace aprl {

InferenceModel InferenceModel::load(const std::string& path) {
  return build(load_checkpoint(path));
}

InferenceModel InferenceModel::from_policy(const PolicyModel<float>& model) {
  return build(model);
}

InferenceModel InferenceModel::build(const PolicyModel<float>& model) {
  if (model.obs_layout_version != kObsLayoutVersion)
    throw ModelVersionError("model observation layout v" +
                            std::to_string(model.obs_layout_version) +
                            " does not match this runtime (v" +
                            std::to_string(kObsLayoutVersion) + ")");
  InferenceModel m;
  m.input_dim_ = model.input_dim;
  m.action_dim_ = model.action_dim;
  m.mode_ = model.mode;
  m.obs_layout_version_ = model.obs_layout_version;
  m.max_width_ = model.input_dim;

  const auto convert = [](const Linear<float>& l) {
    Layer out;
    out.rows = l.weight.rows;
    out.cols = l.weight.cols;
    out.weights = l.weight.data;
    out.bias = l.bias;
    return out;
  };
  for (const Linear<float>& l : model.trunk) {
    m.trunk_.push_back(convert(l));
    m.max_width_ = std::max(m.max_width_, l.out_dim());
  }
  m.mu_head_ = convert(model.mu_head);
  m.has_value_head_ = model.has_value_head;
  m.value_head_ = convert(model.value_head);
  return m;
}

InferenceModel::Session InferenceModel::make_session() const {
  Session s;
  s.a.resize(static_cast<std::size_t>(max_width_));
  s.b.resize(static_cast<std::size_t>(max_width_));
  return s;
}

float InferenceModel::infer(Session& session, const float* obs, float* actions_out) const {
  const float* x = obs;
  float* cur = session.a.data();
  float* next = session.b.data();
  for (const Layer& layer : trunk_) {
    for (int o = 0; o < layer.rows; ++o) {
      const float z =
          dot(layer.weights.data() + static_cast<std::size_t>(o) * layer.cols, x,
              layer.cols) +
          layer.bias[static_cast<std::size_t>(o)];
      cur[o] = z > 0.0f ? z : 0.0f;
    }
    x = cur;
    std::swap(cur, next);
  }
  for (int o = 0; o < mu_head_.rows; ++o) {
    const float mu =
        dot(mu_head_.weights.data() + static_cast<std::size_t>(o) * mu_head_.cols, x,
            mu_head_.cols) +
        mu_head_.bias[static_cast<std::size_t>(o)];
    actions_out[o] = mu < -1.0f ? -1.0f : (mu > 1.0f ? 1.0f : mu);
    if (mode_ == ControlMode::Helicopter && o == kFireActionIndex)
      actions_out[o] = mu >= static_cast<float>(kFireThreshold) ? 1.0f : 0.0f;
  }
  if (!has_value_head_) return 0.0f;
  return dot(value_head_.weights.data(), x, value_head_.cols) + value_head_.bias[0];
}

std::vector<float> InferenceModel::infer(const std::vector<float>& obs) const {
  if (static_cast<int>(obs.size()) != input_dim_)
    throw ValidationError("infer: observation width " + std::to_string(obs.size()) +
                          " does not match model input " + std::to_string(input_dim_));
  Session session = make_session();
  std::vector<float> actions(static_cast<std::size_t>(action_dim_));
  infer(session, obs.data(), actions.data());
  return actions;
}

LatencyStats bench_latency(const InferenceModel& model, int iterations) {
  if (iterations < 10000)
    throw ValidationError("bench_latency: need at least 10^4 iterations");
  InferenceModel::Session session = model.make_session();
  std::vector<float> obs(static_cast<std::size_t>(model.input_dim()));
  std::vector<float> actions(static_cast<std::size_t>(model.action_dim()));
  Rng rng(7);
  for (float& v : obs) v = static_cast<float>(rng.uniform(-1.0, 1.0));

  // warm-up
  float sink = 0.0f;
  for (int i = 0; i < 1000; ++i)
    sink += model.infer(session, obs.data(), actions.data());

  std::vector<double> samples(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    obs[static_cast<std::size_t>(i) % obs.size()] += 1e-6f;
    const auto start = std::chrono::steady_clock::now();
    sink += model.infer(session, obs.data(), actions.data());
    const auto stop = std::chrono::steady_clock::now();
    samples[static_cast<std::size_t>(i)] =
        std::chrono::duration<double, std::micro>(stop - start).count();
  }
  if (sink == 123.456f) std::fprintf(stderr, "%f\n", sink);

  std::sort(samples.begin(), samples.end());
  const auto percentile = [&](double p) {
    const std::size_t idx = static_cast<std::size_t>(p * (samples.size() - 1));
    return samples[idx];
  };
  LatencyStats stats;
  stats.iterations = iterations;
  stats.p50_us = percentile(0.50);
  stats.p95_us = percentile(0.95);
  stats.p99_us = percentile(0.99);
  double total = 0.0;
  for (double s : samples) total += s;
  stats.mean_us = total / static_cast<double>(samples.size());
  return stats;
}

}  // namespace aprl
