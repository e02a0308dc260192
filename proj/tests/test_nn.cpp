#include <doctest.h>

#include <cmath>

#include "aprl/nn.hpp"
#include "test_util.hpp"

using namespace aprl;

namespace {

// Independent finite-difference gradient of ppo_loss, central differences.
template <typename T>
double fd_gradient(PolicyModel<T>& model, const MiniBatch<T>& batch,
                   const LossSpec& spec, T& param, double h) {
  const T saved = param;
  param = saved + static_cast<T>(h);
  const double hi = static_cast<double>(ppo_loss(model, batch, spec));
  param = saved - static_cast<T>(h);
  const double lo = static_cast<double>(ppo_loss(model, batch, spec));
  param = saved;
  return (hi - lo) / (2.0 * h);
}

template <typename T>
MiniBatch<T> random_batch(const PolicyModel<T>& model, int rows, Rng& rng) {
  MiniBatch<T> b;
  b.obs.resize(rows, model.input_dim);
  b.actions.resize(rows, model.action_dim);
  for (T& v : b.obs.data) v = static_cast<T>(rng.uniform(-1.0, 1.0));
  for (T& v : b.actions.data) v = static_cast<T>(rng.uniform(-1.5, 1.5));
  const std::vector<T> sigma = sigma_of(model);
  ForwardCache<T> cache;
  forward_batch(model, b.obs, cache);
  for (int r = 0; r < rows; ++r) {
    const T lp = gaussian_log_prob(cache.mu.row(r), sigma.data(), b.actions.row(r),
                                   model.action_dim);
    // old log-probs near but not equal to the fresh ones: ratios straddle 1
    b.old_log_probs.push_back(lp + static_cast<T>(rng.uniform(-0.3, 0.3)));
    b.advantages.push_back(static_cast<T>(rng.uniform(-2.0, 2.0)));
    b.returns.push_back(static_cast<T>(rng.uniform(-1.0, 1.0)));
  }
  return b;
}

}  // namespace

TEST_CASE("zero model produces zero mu and value, sigma from the init") {
  PolicyModel<double> m;
  m.input_dim = 6;
  m.action_dim = 3;
  m.trunk = {Linear<double>(4, 6)};
  m.mu_head = Linear<double>(3, 4);
  m.value_head = Linear<double>(1, 4);
  m.log_sigma.assign(3, kLogSigmaInit);
  const std::vector<double> obs(6, 0.7);
  const auto out = forward(m, obs);
  for (double v : out.mu) CHECK(v == 0.0);
  CHECK(out.value == 0.0);
  for (double s : out.sigma) CHECK(s == doctest::Approx(std::exp(kLogSigmaInit)));
}

TEST_CASE("seeded init and forward are bit-deterministic") {
  Rng r1(123), r2(123);
  const auto m1 = make_policy_model<float>(72, {32, 16}, 5, r1);
  const auto m2 = make_policy_model<float>(72, {32, 16}, 5, r2);
  std::vector<float> obs(72);
  Rng ro(5);
  for (float& v : obs) v = static_cast<float>(ro.uniform(-1, 1));
  const auto o1 = forward(m1, obs);
  const auto o2 = forward(m2, obs);
  CHECK(o1.mu == o2.mu);
  CHECK(o1.value == o2.value);
}

TEST_CASE("tiny net forward matches hand-computed matrix algebra") {
  // 4 -> 3 -> 2 with fixed weights, checked against literal arithmetic
  PolicyModel<double> m;
  m.input_dim = 4;
  m.action_dim = 2;
  Linear<double> l1(3, 4);
  l1.weight.data = {0.1, -0.2, 0.3, 0.0,   // row 0
                    0.5, 0.1, -0.1, 0.2,   // row 1
                    -0.4, 0.3, 0.2, -0.3}; // row 2
  l1.bias = {0.05, -0.1, 0.2};
  m.trunk = {l1};
  m.mu_head = Linear<double>(2, 3);
  m.mu_head.weight.data = {1.0, -1.0, 0.5, 0.2, 0.3, -0.2};
  m.mu_head.bias = {0.1, -0.05};
  m.value_head = Linear<double>(1, 3);
  m.value_head.weight.data = {0.7, -0.6, 0.1};
  m.value_head.bias = {0.25};
  m.log_sigma = {0.0, 0.0};

  const std::vector<double> x{1.0, 2.0, -1.0, 0.5};
  // hidden pre-activations, written out longhand
  const double z0 = 0.1 * 1.0 + -0.2 * 2.0 + 0.3 * -1.0 + 0.0 * 0.5 + 0.05;  // -0.55
  const double z1 = 0.5 * 1.0 + 0.1 * 2.0 + -0.1 * -1.0 + 0.2 * 0.5 + -0.1;  //  0.8
  const double z2 = -0.4 * 1.0 + 0.3 * 2.0 + 0.2 * -1.0 + -0.3 * 0.5 + 0.2;  //  0.05
  const double h0 = z0 > 0 ? z0 : 0, h1 = z1 > 0 ? z1 : 0, h2 = z2 > 0 ? z2 : 0;
  const double mu0 = 1.0 * h0 + -1.0 * h1 + 0.5 * h2 + 0.1;
  const double mu1 = 0.2 * h0 + 0.3 * h1 + -0.2 * h2 + -0.05;
  const double val = 0.7 * h0 + -0.6 * h1 + 0.1 * h2 + 0.25;

  const auto out = forward(m, x);
  CHECK(out.mu[0] == doctest::Approx(mu0).epsilon(1e-15));
  CHECK(out.mu[1] == doctest::Approx(mu1).epsilon(1e-15));
  CHECK(out.value == doctest::Approx(val).epsilon(1e-15));
}

TEST_CASE("forward rejects mismatched observation width") {
  Rng rng(1);
  const auto m = make_policy_model<double>(8, {4}, 2, rng);
  const std::vector<double> wrong(7, 0.0);
  CHECK_THROWS_AS(forward(m, wrong), ValidationError);
}

TEST_CASE("sampling at minimum sigma collapses to the mean") {
  const std::vector<double> mu{0.4, -0.9, 1.4, 0.0, -0.2};
  const std::vector<double> sigma(5, std::exp(kLogSigmaMin));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto s = sample_action(mu, sigma, rng);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(s.clamped[i] - clamp(mu[i], -1.0, 1.0)) < 0.05);
      CHECK(s.clamped[i] >= -1.0);
      CHECK(s.clamped[i] <= 1.0);
    }
  }
}

TEST_CASE("log-prob at the mode and symmetry") {
  const std::vector<double> mu{0.1, -0.3, 0.7};
  const std::vector<double> sigma{0.5, 1.0, 2.0};
  double expected = 0.0;
  for (double s : sigma) expected += -std::log(s * std::sqrt(2.0 * std::numbers::pi));
  CHECK(gaussian_log_prob(mu.data(), sigma.data(), mu.data(), 3) ==
        doctest::Approx(expected).epsilon(1e-12));

  std::vector<double> plus = mu, minus = mu;
  plus[1] += 0.37;
  minus[1] -= 0.37;
  CHECK(gaussian_log_prob(mu.data(), sigma.data(), plus.data(), 3) ==
        doctest::Approx(gaussian_log_prob(mu.data(), sigma.data(), minus.data(), 3)));
}

TEST_CASE("sampled log-prob agrees with the density evaluation") {
  const std::vector<double> mu{0.2, -0.5, 0.0, 1.0, -1.2};
  const std::vector<double> sigma{0.3, 0.9, 1.5, 0.2, 0.6};
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_action(mu, sigma, rng);
    const double direct =
        gaussian_log_prob(mu.data(), sigma.data(), s.pre_clamp.data(), 5);
    CHECK(std::abs(s.log_prob - direct) < 1e-12);
  }
}

TEST_CASE("sample moments match the configured gaussian") {
  const std::vector<double> mu(5, 0.0);
  const std::vector<double> sigma(5, 1.0);
  Rng rng(23);
  const int n = 100000;
  std::vector<double> sum(5, 0.0), sq(5, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto s = sample_action(mu, sigma, rng);
    for (int d = 0; d < 5; ++d) {
      sum[d] += s.pre_clamp[d];
      sq[d] += s.pre_clamp[d] * s.pre_clamp[d];
    }
  }
  for (int d = 0; d < 5; ++d) {
    const double mean = sum[d] / n;
    const double var = sq[d] / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(2024);
  auto model = make_policy_model<double>(6, {8, 6}, 3, rng);
  const MiniBatch<double> batch = random_batch(model, 16, rng);
  LossSpec spec;
  spec.entropy_coeff = 0.01;

  auto grads = ppo_gradients(model, batch, spec);
  const double h = 1e-4;
  int checked = 0;
  double max_rel = 0.0;
  for_each_parameter(model, grads, [&](double& p, double& g) {
    // spot-check a deterministic subset to keep the unit suite quick
    if ((checked++ % 7) != 0) return;
    const double fd = fd_gradient(model, batch, spec, p, h);
    const double denom = std::max({std::abs(fd), std::abs(g), 1e-3});
    max_rel = std::max(max_rel, std::abs(fd - g) / denom);
  });
  CHECK(max_rel < 1e-4);
}

TEST_CASE("constant loss yields all-zero gradients") {
  Rng rng(9);
  auto model = make_policy_model<double>(5, {6}, 2, rng);
  MiniBatch<double> batch;
  const int rows = 8;
  batch.obs.resize(rows, 5);
  batch.actions.resize(rows, 2);
  for (double& v : batch.obs.data) v = rng.uniform(-1, 1);
  for (double& v : batch.actions.data) v = rng.uniform(-1, 1);
  ForwardCache<double> cache;
  forward_batch(model, batch.obs, cache);
  const auto sigma = sigma_of(model);
  for (int r = 0; r < rows; ++r) {
    batch.old_log_probs.push_back(gaussian_log_prob(cache.mu.row(r), sigma.data(),
                                                    batch.actions.row(r), 2));
    batch.advantages.push_back(0.0);                 // no policy signal
    batch.returns.push_back(cache.value[static_cast<std::size_t>(r)]);  // no value error
  }
  LossSpec spec;
  spec.entropy_coeff = 0.0;
  auto grads = ppo_gradients(model, batch, spec);
  for_each_parameter(model, grads, [&](double&, double& g) { CHECK(g == 0.0); });
}

TEST_CASE("value-only loss leaves the policy head untouched") {
  Rng rng(31);
  auto model = make_policy_model<double>(5, {6}, 2, rng);
  const MiniBatch<double> batch = random_batch(model, 8, rng);
  LossSpec spec;
  spec.surrogate_coeff = 0.0;
  spec.entropy_coeff = 0.0;
  auto grads = ppo_gradients(model, batch, spec);
  for (double g : grads.mu_head.weight.data) CHECK(g == 0.0);
  for (double g : grads.mu_head.bias) CHECK(g == 0.0);
  for (double g : grads.log_sigma) CHECK(g == 0.0);
  // but the value path must be live
  double value_norm = 0.0;
  for (double g : grads.value_head.weight.data) value_norm += g * g;
  CHECK(value_norm > 0.0);
}

TEST_CASE("sigma bounds survive adam updates") {
  Rng rng(3);
  auto model = make_policy_model<float>(4, {4}, 2, rng);
  model.log_sigma = {-100.0f, 100.0f};  // deliberately out of range
  AdamState<float> adam;
  auto grads = Gradients<float>::zeros_like(model);
  adam_update(model, grads, adam, 1e-3);
  for (float ls : model.log_sigma) {
    CHECK(ls >= static_cast<float>(kLogSigmaMin));
    CHECK(ls <= static_cast<float>(kLogSigmaMax));
  }
  const auto sigma = sigma_of(model);
  for (float s : sigma) {
    CHECK(s >= std::exp(kLogSigmaMin) - 1e-7);
    CHECK(s <= std::exp(kLogSigmaMax) + 1e-3);
  }
}

TEST_CASE("batched forward equals per-row forward") {
  Rng rng(41);
  const auto model = make_policy_model<float>(12, {16, 8}, 4, rng);
  Matrix<float> batch(10, 12);
  for (float& v : batch.data) v = static_cast<float>(rng.uniform(-1, 1));
  ForwardCache<float> cache;
  forward_batch(model, batch, cache);
  for (int r = 0; r < batch.rows; ++r) {
    const auto single = forward(model, batch.row(r), 12);
    for (int d = 0; d < 4; ++d) REQUIRE(cache.mu(r, d) == single.mu[static_cast<std::size_t>(d)]);
    REQUIRE(cache.value[static_cast<std::size_t>(r)] == single.value);
  }
}
