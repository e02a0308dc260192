#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "aprl/errors.hpp"
#include "aprl/geom.hpp"
#include "aprl/kernels.hpp"
#include "aprl/observation.hpp"
#include "aprl/rng.hpp"
#include "aprl/sim.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace aprl {

inline constexpr double kLogSigmaMin = -5.0;
inline constexpr double kLogSigmaMax = 2.0;
inline constexpr double kLogSigmaInit = -0.5;
inline constexpr double kMuHeadScale = 0.01;

// Row-major dense matrix.
template <typename T>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, T{}) {}

  T* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const T* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  T operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  void set_zero() { std::fill(data.begin(), data.end(), T{}); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, T{});
  }
};

// weight: (out x in), bias: (out)
template <typename T>
struct Linear {
  Matrix<T> weight;
  std::vector<T> bias;

  Linear() = default;
  Linear(int out, int in) : weight(out, in), bias(static_cast<std::size_t>(out), T{}) {}
  int out_dim() const { return weight.rows; }
  int in_dim() const { return weight.cols; }
};

struct ModelNormalization {
  Vec3 bounds_min{-30.0, -30.0, 0.0};
  Vec3 bounds_max{30.0, 30.0, 60.0};
  std::uint32_t stack_size = kObsStackSize;
  std::uint32_t frame_size = kObsFrameSize;
};

// Shared ReLU trunk with a diagonal-Gaussian policy head (state-independent
// log-sigma) and a scalar value head.
template <typename T>
struct PolicyModel {
  int input_dim = kObsVectorSize;
  int action_dim = kActionDim;
  std::vector<Linear<T>> trunk;
  Linear<T> mu_head;
  Linear<T> value_head;
  bool has_value_head = true;
  std::vector<T> log_sigma;

  ControlMode mode = ControlMode::Helicopter;
  std::uint16_t obs_layout_version = kObsLayoutVersion;
  ModelNormalization norm;

  int parameter_count() const {
    int n = 0;
    for (const auto& l : trunk) n += l.weight.rows * l.weight.cols + l.out_dim();
    n += mu_head.weight.rows * mu_head.weight.cols + mu_head.out_dim();
    n += value_head.weight.rows * value_head.weight.cols + value_head.out_dim();
    n += static_cast<int>(log_sigma.size());
    return n;
  }
};

namespace detail {

template <typename T>
void init_linear(Linear<T>& layer, Rng& rng, double scale) {
  const double limit = std::sqrt(6.0 / layer.in_dim()) * scale;
  for (T& w : layer.weight.data) w = static_cast<T>(rng.uniform(-limit, limit));
  for (T& b : layer.bias) b = T{};
}

}  // namespace detail

// Scaled uniform fan-in init; the policy head starts near zero so initial
// actions are dominated by the exploration noise.
template <typename T>
PolicyModel<T> make_policy_model(int input_dim, const std::vector<int>& hidden,
                                 int action_dim, Rng& rng,
                                 double log_sigma_init = kLogSigmaInit) {
  PolicyModel<T> m;
  m.input_dim = input_dim;
  m.action_dim = action_dim;
  int in = input_dim;
  for (int h : hidden) {
    Linear<T> layer(h, in);
    detail::init_linear(layer, rng, 1.0);
    m.trunk.push_back(std::move(layer));
    in = h;
  }
  m.mu_head = Linear<T>(action_dim, in);
  detail::init_linear(m.mu_head, rng, kMuHeadScale);
  m.value_head = Linear<T>(1, in);
  detail::init_linear(m.value_head, rng, 1.0);
  m.log_sigma.assign(static_cast<std::size_t>(action_dim), static_cast<T>(log_sigma_init));
  return m;
}

template <typename T>
inline T clamped_log_sigma(T v) {
  return v < static_cast<T>(kLogSigmaMin)
             ? static_cast<T>(kLogSigmaMin)
             : (v > static_cast<T>(kLogSigmaMax) ? static_cast<T>(kLogSigmaMax) : v);
}

template <typename T>
std::vector<T> sigma_of(const PolicyModel<T>& model) {
  std::vector<T> s(model.log_sigma.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::exp(clamped_log_sigma(model.log_sigma[i]));
  return s;
}

template <typename T>
struct PolicyOutput {
  std::vector<T> mu;
  std::vector<T> sigma;
  T value{};
};

// Single-observation forward pass.
template <typename T>
PolicyOutput<T> forward(const PolicyModel<T>& model, const T* obs, int obs_len) {
  if (obs_len != model.input_dim)
    throw ValidationError("forward: observation length " + std::to_string(obs_len) +
                          " does not match model input " + std::to_string(model.input_dim));
  std::vector<T> cur(obs, obs + obs_len);
  std::vector<T> next;
  for (const Linear<T>& layer : model.trunk) {
    next.resize(static_cast<std::size_t>(layer.out_dim()));
    for (int o = 0; o < layer.out_dim(); ++o) {
      const T z = dot(layer.weight.row(o), cur.data(), layer.in_dim()) + layer.bias[o];
      next[o] = z > T{} ? z : T{};
    }
    cur.swap(next);
  }
  PolicyOutput<T> out;
  out.mu.resize(static_cast<std::size_t>(model.action_dim));
  for (int o = 0; o < model.action_dim; ++o)
    out.mu[o] = dot(model.mu_head.weight.row(o), cur.data(), model.mu_head.in_dim()) +
                model.mu_head.bias[o];
  out.value = dot(model.value_head.weight.row(0), cur.data(), model.value_head.in_dim()) +
              model.value_head.bias[0];
  out.sigma = sigma_of(model);
  return out;
}

template <typename T>
PolicyOutput<T> forward(const PolicyModel<T>& model, const std::vector<T>& obs) {
  return forward(model, obs.data(), static_cast<int>(obs.size()));
}

// Batched activations kept for the backward pass. acts[0] is the input batch,
// acts[k] the post-ReLU output of trunk layer k-1.
template <typename T>
struct ForwardCache {
  std::vector<Matrix<T>> acts;
  Matrix<T> mu;           // rows x action_dim
  std::vector<T> value;   // rows
};

template <typename T>
void forward_batch(const PolicyModel<T>& model, const Matrix<T>& input,
                   ForwardCache<T>& cache) {
  if (input.cols != model.input_dim)
    throw ValidationError("forward_batch: input width mismatch");
  const int rows = input.rows;
  const int depth = static_cast<int>(model.trunk.size());
  cache.acts.resize(static_cast<std::size_t>(depth) + 1);
  cache.acts[0] = input;
  for (int k = 0; k < depth; ++k) {
    const Linear<T>& layer = model.trunk[static_cast<std::size_t>(k)];
    Matrix<T>& out = cache.acts[static_cast<std::size_t>(k) + 1];
    out.resize(rows, layer.out_dim());
    const Matrix<T>& in = cache.acts[static_cast<std::size_t>(k)];
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
      const T* x = in.row(r);
      T* y = out.row(r);
      for (int o = 0; o < layer.out_dim(); ++o) {
        const T z = dot(layer.weight.row(o), x, layer.in_dim()) + layer.bias[o];
        y[o] = z > T{} ? z : T{};
      }
    }
  }
  const Matrix<T>& top = cache.acts.back();
  cache.mu.resize(rows, model.action_dim);
  cache.value.assign(static_cast<std::size_t>(rows), T{});
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* x = top.row(r);
    T* mu = cache.mu.row(r);
    for (int o = 0; o < model.action_dim; ++o)
      mu[o] = dot(model.mu_head.weight.row(o), x, model.mu_head.in_dim()) +
              model.mu_head.bias[o];
    cache.value[static_cast<std::size_t>(r)] =
        dot(model.value_head.weight.row(0), x, model.value_head.in_dim()) +
        model.value_head.bias[0];
  }
}

// Diagonal-Gaussian log density of a pre-clamp action.
template <typename T>
T gaussian_log_prob(const T* mu, const T* sigma, const T* action, int n) {
  constexpr T half_log_2pi = static_cast<T>(0.5 * 1.8378770664093454836);
  T lp{};
  for (int i = 0; i < n; ++i) {
    const T z = (action[i] - mu[i]) / sigma[i];
    lp += -static_cast<T>(0.5) * z * z - std::log(sigma[i]) - half_log_2pi;
  }
  return lp;
}

template <typename T>
T gaussian_entropy(const T* sigma, int n) {
  // 0.5 * log(2*pi*e) per dimension
  constexpr T half_log_2pi_e = static_cast<T>(0.5 * 2.8378770664093454836);
  T h{};
  for (int i = 0; i < n; ++i) h += std::log(sigma[i]) + half_log_2pi_e;
  return h;
}

template <typename T>
struct ActionSample {
  std::vector<T> pre_clamp;
  std::vector<T> clamped;
  T log_prob{};
};

template <typename T>
ActionSample<T> sample_action(const std::vector<T>& mu, const std::vector<T>& sigma,
                              Rng& rng) {
  const int n = static_cast<int>(mu.size());
  ActionSample<T> s;
  s.pre_clamp.resize(static_cast<std::size_t>(n));
  s.clamped.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const T a = mu[static_cast<std::size_t>(i)] +
                sigma[static_cast<std::size_t>(i)] * static_cast<T>(rng.normal());
    s.pre_clamp[static_cast<std::size_t>(i)] = a;
    s.clamped[static_cast<std::size_t>(i)] =
        a < T{-1} ? T{-1} : (a > T{1} ? T{1} : a);
  }
  s.log_prob = gaussian_log_prob(mu.data(), sigma.data(), s.pre_clamp.data(), n);
  return s;
}

// Parameter gradients, same shapes as the model.
template <typename T>
struct Gradients {
  std::vector<Linear<T>> trunk;
  Linear<T> mu_head;
  Linear<T> value_head;
  std::vector<T> log_sigma;

  static Gradients zeros_like(const PolicyModel<T>& m) {
    Gradients g;
    for (const auto& l : m.trunk) g.trunk.emplace_back(l.out_dim(), l.in_dim());
    g.mu_head = Linear<T>(m.mu_head.out_dim(), m.mu_head.in_dim());
    g.value_head = Linear<T>(m.value_head.out_dim(), m.value_head.in_dim());
    g.log_sigma.assign(m.log_sigma.size(), T{});
    return g;
  }
};

// Visits parameter/gradient pairs in a fixed order.
template <typename T, typename Fn>
void for_each_parameter(PolicyModel<T>& model, Gradients<T>& grads, Fn&& fn) {
  for (std::size_t k = 0; k < model.trunk.size(); ++k) {
    auto& lw = model.trunk[k].weight.data;
    auto& gw = grads.trunk[k].weight.data;
    for (std::size_t i = 0; i < lw.size(); ++i) fn(lw[i], gw[i]);
    for (std::size_t i = 0; i < model.trunk[k].bias.size(); ++i)
      fn(model.trunk[k].bias[i], grads.trunk[k].bias[i]);
  }
  for (std::size_t i = 0; i < model.mu_head.weight.data.size(); ++i)
    fn(model.mu_head.weight.data[i], grads.mu_head.weight.data[i]);
  for (std::size_t i = 0; i < model.mu_head.bias.size(); ++i)
    fn(model.mu_head.bias[i], grads.mu_head.bias[i]);
  for (std::size_t i = 0; i < model.value_head.weight.data.size(); ++i)
    fn(model.value_head.weight.data[i], grads.value_head.weight.data[i]);
  for (std::size_t i = 0; i < model.value_head.bias.size(); ++i)
    fn(model.value_head.bias[i], grads.value_head.bias[i]);
  for (std::size_t i = 0; i < model.log_sigma.size(); ++i)
    fn(model.log_sigma[i], grads.log_sigma[i]);
}

// PPO composite loss configuration. surrogate_coeff exists so tests can
// isolate the value path.
struct LossSpec {
  double clip_range = 0.2;
  double surrogate_coeff = 1.0;
  double value_coeff = 0.5;
  double entropy_coeff = 0.003;
};

template <typename T>
struct MiniBatch {
  Matrix<T> obs;              // rows x input_dim
  Matrix<T> actions;          // rows x action_dim, pre-clamp
  std::vector<T> old_log_probs;
  std::vector<T> advantages;  // normalized upstream when enabled
  std::vector<T> returns;

  int rows() const { return obs.rows; }
};

template <typename T>
struct LossStats {
  T loss{};
  T surrogate{};
  T value_loss{};
  T entropy{};
  T mean_ratio{};
  T clip_fraction{};
};

namespace detail {

// Loss terms per row given the forward outputs. Shared by the scalar loss
// (finite-difference oracle target) and the analytic backward pass.
template <typename T>
struct RowTerms {
  T ratio;
  T pg;            // -min(ratio*A, clip(ratio)*A)
  T dpg_dratio;    // subgradient wrt ratio
  bool clipped;    // ratio outside [1-c, 1+c]
};

template <typename T>
RowTerms<T> surrogate_row(T new_log_prob, T old_log_prob, T advantage, T clip_range) {
  RowTerms<T> t{};
  t.ratio = std::exp(new_log_prob - old_log_prob);
  const T lo = T{1} - clip_range;
  const T hi = T{1} + clip_range;
  const T clamped = t.ratio < lo ? lo : (t.ratio > hi ? hi : t.ratio);
  const T u1 = t.ratio * advantage;
  const T u2 = clamped * advantage;
  t.clipped = t.ratio < lo || t.ratio > hi;
  if (u1 <= u2) {
    t.pg = -u1;
    t.dpg_dratio = -advantage;
  } else {
    t.pg = -u2;
    t.dpg_dratio = t.clipped ? T{} : -advantage;
  }
  return t;
}

}  // namespace detail

// Scalar PPO loss:
//   mean(-min(ratio*A, clip(ratio)*A)) + value_coeff * mean((v - R)^2)
//   - entropy_coeff * H(N(mu, sigma))
// Throws ValidationError naming the offending term if any term is non-finite.
template <typename T>
T ppo_loss(const PolicyModel<T>& model, const MiniBatch<T>& batch, const LossSpec& spec,
           LossStats<T>* stats_out = nullptr) {
  const int rows = batch.rows();
  if (rows == 0) throw ValidationError("ppo_loss: empty minibatch");
  ForwardCache<T> cache;
  forward_batch(model, batch.obs, cache);
  const std::vector<T> sigma = sigma_of(model);

  T pg_sum{}, v_sum{}, ratio_sum{}, clip_count{};
  for (int r = 0; r < rows; ++r) {
    const T lp = gaussian_log_prob(cache.mu.row(r), sigma.data(), batch.actions.row(r),
                                   model.action_dim);
    const auto terms = detail::surrogate_row(
        lp, batch.old_log_probs[static_cast<std::size_t>(r)],
        batch.advantages[static_cast<std::size_t>(r)], static_cast<T>(spec.clip_range));
    pg_sum += terms.pg;
    ratio_sum += terms.ratio;
    clip_count += terms.clipped ? T{1} : T{};
    const T dv = cache.value[static_cast<std::size_t>(r)] -
                 batch.returns[static_cast<std::size_t>(r)];
    v_sum += dv * dv;
  }
  const T inv_rows = T{1} / static_cast<T>(rows);
  const T surrogate = pg_sum * inv_rows;
  const T value_loss = v_sum * inv_rows;
  const T entropy = gaussian_entropy(sigma.data(), model.action_dim);

  if (!std::isfinite(static_cast<double>(surrogate)))
    throw ValidationError("ppo_loss: non-finite surrogate term");
  if (!std::isfinite(static_cast<double>(value_loss)))
    throw ValidationError("ppo_loss: non-finite value term");
  if (!std::isfinite(static_cast<double>(entropy)))
    throw ValidationError("ppo_loss: non-finite entropy term");

  const T loss = static_cast<T>(spec.surrogate_coeff) * surrogate +
                 static_cast<T>(spec.value_coeff) * value_loss -
                 static_cast<T>(spec.entropy_coeff) * entropy;
  if (stats_out) {
    stats_out->loss = loss;
    stats_out->surrogate = surrogate;
    stats_out->value_loss = value_loss;
    stats_out->entropy = entropy;
    stats_out->mean_ratio = ratio_sum * inv_rows;
    stats_out->clip_fraction = clip_count * inv_rows;
  }
  return loss;
}

// Analytic reverse-mode gradients of ppo_loss for every parameter.
template <typename T>
Gradients<T> ppo_gradients(const PolicyModel<T>& model, const MiniBatch<T>& batch,
                           const LossSpec& spec, LossStats<T>* stats_out = nullptr) {
  const int rows = batch.rows();
  if (rows == 0) throw ValidationError("ppo_gradients: empty minibatch");
  ForwardCache<T> cache;
  forward_batch(model, batch.obs, cache);
  const std::vector<T> sigma = sigma_of(model);
  const int adim = model.action_dim;
  const T inv_rows = T{1} / static_cast<T>(rows);
  const T s_coeff = static_cast<T>(spec.surrogate_coeff);
  const T v_coeff = static_cast<T>(spec.value_coeff);

  Gradients<T> grads = Gradients<T>::zeros_like(model);

  // dL/dmu per row, dL/dvalue per row, dL/dlog_sigma accumulated
  Matrix<T> dmu(rows, adim);
  std::vector<T> dvalue(static_cast<std::size_t>(rows), T{});
  T pg_sum{}, v_sum{}, ratio_sum{}, clip_count{};

  for (int r = 0; r < rows; ++r) {
    const T* mu = cache.mu.row(r);
    const T* act = batch.actions.row(r);
    const T lp = gaussian_log_prob(mu, sigma.data(), act, adim);
    const auto terms = detail::surrogate_row(
        lp, batch.old_log_probs[static_cast<std::size_t>(r)],
        batch.advantages[static_cast<std::size_t>(r)], static_cast<T>(spec.clip_range));
    pg_sum += terms.pg;
    ratio_sum += terms.ratio;
    clip_count += terms.clipped ? T{1} : T{};

    // d(loss)/d(log p_new) = s_coeff * dpg/dratio * ratio / rows
    const T dlp = s_coeff * terms.dpg_dratio * terms.ratio * inv_rows;
    T* dmu_r = dmu.row(r);
    for (int d = 0; d < adim; ++d) {
      const T z = (act[d] - mu[d]) / sigma[static_cast<std::size_t>(d)];
      dmu_r[d] = dlp * z / sigma[static_cast<std::size_t>(d)];
      // d(log p)/d(log sigma_d) = z^2 - 1  (through sigma = exp(log sigma))
      grads.log_sigma[static_cast<std::size_t>(d)] += dlp * (z * z - T{1});
    }

    const T dv = cache.value[static_cast<std::size_t>(r)] -
                 batch.returns[static_cast<std::size_t>(r)];
    v_sum += dv * dv;
    dvalue[static_cast<std::size_t>(r)] = v_coeff * T{2} * dv * inv_rows;
  }

  // entropy bonus: dH/dlog_sigma_d = 1
  for (int d = 0; d < adim; ++d)
    grads.log_sigma[static_cast<std::size_t>(d)] -= static_cast<T>(spec.entropy_coeff);
  // clamp mask: no gradient outside the active log-sigma range
  for (int d = 0; d < adim; ++d) {
    const T ls = model.log_sigma[static_cast<std::size_t>(d)];
    if (ls <= static_cast<T>(kLogSigmaMin) || ls >= static_cast<T>(kLogSigmaMax))
      grads.log_sigma[static_cast<std::size_t>(d)] = T{};
  }

  const T surrogate = pg_sum * inv_rows;
  const T value_loss = v_sum * inv_rows;
  const T entropy = gaussian_entropy(sigma.data(), adim);
  if (!std::isfinite(static_cast<double>(surrogate)))
    throw ValidationError("ppo_gradients: non-finite surrogate term");
  if (!std::isfinite(static_cast<double>(value_loss)))
    throw ValidationError("ppo_gradients: non-finite value term");

  if (stats_out) {
    stats_out->loss = s_coeff * surrogate + v_coeff * value_loss -
                      static_cast<T>(spec.entropy_coeff) * entropy;
    stats_out->surrogate = surrogate;
    stats_out->value_loss = value_loss;
    stats_out->entropy = entropy;
    stats_out->mean_ratio = ratio_sum * inv_rows;
    stats_out->clip_fraction = clip_count * inv_rows;
  }

  // backprop through the heads into the trunk top activation
  const Matrix<T>& top = cache.acts.back();
  const int top_dim = model.mu_head.in_dim();
  Matrix<T> dtop(rows, top_dim);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    T* dt = dtop.row(r);
    const T* dmu_r = dmu.row(r);
    for (int d = 0; d < adim; ++d)
      axpy(dt, model.mu_head.weight.row(d), dmu_r[d], top_dim);
    axpy(dt, model.value_head.weight.row(0), dvalue[static_cast<std::size_t>(r)], top_dim);
  }
  // head weight/bias gradients: dW[o][i] = sum_r dOut[r][o] * top[r][i]
#pragma omp parallel for schedule(static)
  for (int d = 0; d < adim; ++d) {
    T* gw = grads.mu_head.weight.row(d);
    T gb{};
    for (int r = 0; r < rows; ++r) {
      const T g = dmu(r, d);
      gb += g;
      axpy(gw, top.row(r), g, top_dim);
    }
    grads.mu_head.bias[static_cast<std::size_t>(d)] = gb;
  }
  {
    T* gw = grads.value_head.weight.row(0);
    T gb{};
    for (int r = 0; r < rows; ++r) {
      const T g = dvalue[static_cast<std::size_t>(r)];
      gb += g;
      axpy(gw, top.row(r), g, top_dim);
    }
    grads.value_head.bias[0] = gb;
  }

  // trunk backward, deepest layer first
  Matrix<T> delta = std::move(dtop);
  for (int k = static_cast<int>(model.trunk.size()) - 1; k >= 0; --k) {
    const Linear<T>& layer = model.trunk[static_cast<std::size_t>(k)];
    const Matrix<T>& input = cache.acts[static_cast<std::size_t>(k)];
    const Matrix<T>& output = cache.acts[static_cast<std::size_t>(k) + 1];
    const int out_dim = layer.out_dim();
    const int in_dim = layer.in_dim();

    // ReLU mask on the pre-activation sign (post-activation > 0)
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
      T* d = delta.row(r);
      const T* a = output.row(r);
      for (int o = 0; o < out_dim; ++o)
        if (a[o] <= T{}) d[o] = T{};
    }

    Linear<T>& g = grads.trunk[static_cast<std::size_t>(k)];
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_dim; ++o) {
      T* gw = g.weight.row(o);
      T gb{};
      for (int r = 0; r < rows; ++r) {
        const T dr = delta(r, o);
        if (dr != T{}) axpy(gw, input.row(r), dr, in_dim);
        gb += dr;
      }
      g.bias[static_cast<std::size_t>(o)] = gb;
    }

    if (k > 0) {
      Matrix<T> dinput(rows, in_dim);
#pragma omp parallel for schedule(static)
      for (int r = 0; r < rows; ++r) {
        T* di = dinput.row(r);
        const T* d = delta.row(r);
        for (int o = 0; o < out_dim; ++o)
          if (d[o] != T{}) axpy(di, layer.weight.row(o), d[o], in_dim);
      }
      delta = std::move(dinput);
    }
  }
  return grads;
}

// Global-norm gradient clipping; returns the pre-clip norm.
template <typename T>
double clip_gradients(PolicyModel<T>& model, Gradients<T>& grads, double max_norm) {
  double sq = 0.0;
  for_each_parameter(model, grads, [&](T&, T& g) { sq += static_cast<double>(g) * g; });
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for_each_parameter(model, grads, [&](T&, T& g) { g *= scale; });
  }
  return norm;
}

// Adam with bias correction; log-sigma is projected back into its bounds
// after the step so sigma always stays in [exp(-5), exp(2)].
template <typename T>
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
void adam_update(PolicyModel<T>& model, Gradients<T>& grads, AdamState<T>& state,
                 double lr) {
  const std::size_t n = static_cast<std::size_t>(model.parameter_count());
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::size_t i = 0;
  for_each_parameter(model, grads, [&](T& p, T& g) {
    double& m = state.m[i];
    double& v = state.v[i];
    const double gd = static_cast<double>(g);
    m = state.beta1 * m + (1.0 - state.beta1) * gd;
    v = state.beta2 * v + (1.0 - state.beta2) * gd * gd;
    const double mh = m / bc1;
    const double vh = v / bc2;
    p -= static_cast<T>(lr * mh / (std::sqrt(vh) + state.eps));
    ++i;
  });
  for (T& ls : model.log_sigma)
    ls = static_cast<T>(clamp(static_cast<double>(ls), kLogSigmaMin, kLogSigmaMax));
}

}  // namespace aprl
