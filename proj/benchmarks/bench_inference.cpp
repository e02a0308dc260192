#include <benchmark/benchmark.h>

#include "aprl/inference.hpp"
#include "aprl/kernels.hpp"

namespace {

aprl::InferenceModel make_model(int input, std::vector<int> hidden, int actions) {
  aprl::Rng rng(11);
  auto policy = aprl::make_policy_model<float>(input, hidden, actions, rng);
  policy.mode = aprl::ControlMode::ZeroG;
  return aprl::InferenceModel::from_policy(policy);
}

void BM_InferFull(benchmark::State& state) {
  const aprl::InferenceModel model = make_model(72, {512, 256}, 5);
  aprl::InferenceModel::Session session = model.make_session();
  std::vector<float> obs(72, 0.3f);
  std::vector<float> actions(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.infer(session, obs.data(), actions.data()));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_InferFull);

void BM_InferTiny(benchmark::State& state) {
  const aprl::InferenceModel model = make_model(4, {4}, 2);
  aprl::InferenceModel::Session session = model.make_session();
  std::vector<float> obs(4, 0.3f);
  std::vector<float> actions(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.infer(session, obs.data(), actions.data()));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_InferTiny);

void BM_DotKernel(benchmark::State& state) {
  std::vector<float> a(static_cast<std::size_t>(state.range(0)), 1.5f);
  std::vector<float> b(a.size(), 0.5f);
  for (auto _ : state)
    benchmark::DoNotOptimize(aprl::dot(a.data(), b.data(), static_cast<int>(a.size())));
}
BENCHMARK(BM_DotKernel)->Arg(72)->Arg(512)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
