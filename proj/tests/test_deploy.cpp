#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <new>

#include "aprl/inference.hpp"

using namespace aprl;

// Global allocation counter for the zero-allocation instrumenting below.
namespace {
std::atomic<long> g_allocations{0};
}

void* operator new(std::size_t size) {
  g_allocations.fetch_add(1, std::memory_order_relaxed);
  if (void* p = std::malloc(size)) return p;
  throw std::bad_alloc();
}

void* operator new[](std::size_t size) { return ::operator new(size); }

void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

namespace {

PolicyModel<float> trained_like_model(ControlMode mode, std::uint64_t seed) {
  Rng rng(seed);
  auto m = make_policy_model<float>(kObsVectorSize, {64, 32}, kActionDim, rng);
  m.mode = mode;
  // push some mu outputs outside [-1, 1] so the clamp path is exercised
  for (float& b : m.mu_head.bias) b = static_cast<float>(rng.uniform(-2.0, 2.0));
  return m;
}

std::vector<float> random_obs(Rng& rng, int n) {
  std::vector<float> obs(static_cast<std::size_t>(n));
  for (float& v : obs) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return obs;
}

}  // namespace

TEST_CASE("export/load parity with the trainer forward pass") {
  const auto policy = trained_like_model(ControlMode::ZeroG, 12);
  const std::string path =
      (std::filesystem::temp_directory_path() / "aprl_deploy_parity.apml").string();
  save_checkpoint(policy, path);
  const InferenceModel runtime = InferenceModel::load(path);
  std::remove(path.c_str());

  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const std::vector<float> obs = random_obs(rng, kObsVectorSize);
    const std::vector<float> deployed = runtime.infer(obs);
    const PolicyOutput<float> reference = forward(policy, obs);
    for (int d = 0; d < kActionDim; ++d) {
      const float expected =
          static_cast<float>(clamp(reference.mu[static_cast<std::size_t>(d)], -1.0, 1.0));
      REQUIRE(deployed[static_cast<std::size_t>(d)] == expected);  // same kernel: bit-equal
    }
  }
}

TEST_CASE("helicopter fire output is a 0.5 threshold on mu") {
  PolicyModel<float> policy;
  policy.input_dim = 8;
  policy.action_dim = kActionDim;
  policy.mode = ControlMode::Helicopter;
  policy.trunk = {Linear<float>(4, 8)};
  policy.mu_head = Linear<float>(kActionDim, 4);
  policy.value_head = Linear<float>(1, 4);
  policy.log_sigma.assign(kActionDim, -0.5f);

  const std::vector<float> obs(8, 0.0f);
  policy.mu_head.bias[kFireActionIndex] = 0.49f;
  CHECK(InferenceModel::from_policy(policy).infer(obs)[kFireActionIndex] == 0.0f);
  policy.mu_head.bias[kFireActionIndex] = 0.51f;
  CHECK(InferenceModel::from_policy(policy).infer(obs)[kFireActionIndex] == 1.0f);
  policy.mu_head.bias[kFireActionIndex] = 0.5f;
  CHECK(InferenceModel::from_policy(policy).infer(obs)[kFireActionIndex] == 1.0f);

  // zero-g models keep all five outputs continuous
  policy.mode = ControlMode::ZeroG;
  policy.mu_head.bias[kFireActionIndex] = 0.51f;
  CHECK(InferenceModel::from_policy(policy).infer(obs)[kFireActionIndex] ==
        doctest::Approx(0.51f));
}

TEST_CASE("outputs outside the unit range are clamped") {
  const auto policy = trained_like_model(ControlMode::ZeroG, 13);
  const InferenceModel runtime = InferenceModel::from_policy(policy);
  Rng rng(3);
  bool saw_clamp = false;
  for (int i = 0; i < 50; ++i) {
    const std::vector<float> actions = runtime.infer(random_obs(rng, kObsVectorSize));
    for (float a : actions) {
      REQUIRE(a >= -1.0f);
      REQUIRE(a <= 1.0f);
      saw_clamp |= (a == 1.0f || a == -1.0f);
    }
  }
  CHECK(saw_clamp);  // the biased heads must actually hit the clamp
}

TEST_CASE("deployment inference is deterministic") {
  const auto policy = trained_like_model(ControlMode::ZeroG, 14);
  const InferenceModel runtime = InferenceModel::from_policy(policy);
  Rng rng(9);
  const std::vector<float> obs = random_obs(rng, kObsVectorSize);
  CHECK(runtime.infer(obs) == runtime.infer(obs));
}

TEST_CASE("stripped exports shed the value head but keep the policy") {
  const auto policy = trained_like_model(ControlMode::ZeroG, 15);
  const std::string full_path =
      (std::filesystem::temp_directory_path() / "aprl_full.apml").string();
  const std::string lean_path =
      (std::filesystem::temp_directory_path() / "aprl_lean.apml").string();
  save_checkpoint(policy, full_path, /*strip_value_head=*/false);
  save_checkpoint(policy, lean_path, /*strip_value_head=*/true);
  CHECK(std::filesystem::file_size(lean_path) < std::filesystem::file_size(full_path));

  const InferenceModel full = InferenceModel::load(full_path);
  const InferenceModel lean = InferenceModel::load(lean_path);
  CHECK(full.has_value_head());
  CHECK(!lean.has_value_head());
  Rng rng(4);
  const std::vector<float> obs = random_obs(rng, kObsVectorSize);
  CHECK(full.infer(obs) == lean.infer(obs));
  std::remove(full_path.c_str());
  std::remove(lean_path.c_str());
}

TEST_CASE("the inference path performs no allocations") {
  const auto policy = trained_like_model(ControlMode::ZeroG, 16);
  const InferenceModel runtime = InferenceModel::from_policy(policy);
  InferenceModel::Session session = runtime.make_session();
  std::vector<float> obs(kObsVectorSize, 0.25f);
  std::vector<float> actions(kActionDim);
  runtime.infer(session, obs.data(), actions.data());  // settle any lazy init

  const long before = g_allocations.load();
  for (int i = 0; i < 1000; ++i)
    runtime.infer(session, obs.data(), actions.data());
  CHECK(g_allocations.load() == before);
}

TEST_CASE("latency percentiles scale with model size") {
  Rng rng(21);
  auto tiny_policy = make_policy_model<float>(4, {4}, 2, rng);
  tiny_policy.mode = ControlMode::ZeroG;
  auto full_policy = make_policy_model<float>(kObsVectorSize, {512, 256}, kActionDim, rng);
  full_policy.mode = ControlMode::ZeroG;
  const InferenceModel tiny = InferenceModel::from_policy(tiny_policy);
  const InferenceModel full = InferenceModel::from_policy(full_policy);

  const LatencyStats tiny_stats = bench_latency(tiny, 10000);
  const LatencyStats full_stats = bench_latency(full, 10000);
  CHECK(tiny_stats.p50_us > 0.0);
  CHECK(tiny_stats.p99_us >= tiny_stats.p50_us);
  CHECK(full_stats.p50_us > tiny_stats.p50_us);
  CHECK_THROWS_AS(bench_latency(tiny, 100), ValidationError);
}

TEST_CASE("an observation-layout mismatch is rejected at load time") {
  auto policy = trained_like_model(ControlMode::ZeroG, 17);
  policy.obs_layout_version = 99;
  CHECK_THROWS_AS(InferenceModel::from_policy(policy), ModelVersionError);
}
