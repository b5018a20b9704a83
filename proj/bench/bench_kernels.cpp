// Serial reference against OpenMP kernels. Both paths produce identical
// results; only wall time differs. Arg 0 is serial, 1 is parallel.
#include <benchmark/benchmark.h>

#include "ccorl/baselines.hpp"
#include "ccorl/nn/tape.hpp"
#include "ccorl/policy.hpp"
#include "ccorl/trainer.hpp"

using namespace ccorl;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_TrainEpochJsp(benchmark::State& state) {
  policy::NetConfig net_cfg;
  net_cfg.embed = 16;
  net_cfg.hidden = 16;
  net_cfg.dec1 = 32;
  net_cfg.dec2 = 16;
  policy::JspPolicyNet net(6, 6, 99, net_cfg, 1);
  train::TrainConfig cfg;
  cfg.B = 8;
  cfg.N = 16;
  std::vector<JspInstance> pool;
  for (int i = 0; i < 16; ++i) pool.push_back(gen_jsp(6, 6, 1, 99, 100 + i));
  train::Trainer<policy::JspPolicyNet> tr(net, cfg, pool);
  for (auto _ : state) benchmark::DoNotOptimize(tr.run_epoch(exec_of(state)).mean_L);
}
BENCHMARK(BM_TrainEpochJsp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainEpochVrap(benchmark::State& state) {
  policy::VrapPolicyNet net({}, policy::vrap_net_config(), 2);
  train::TrainConfig cfg;
  cfg.dataset = train::DatasetMode::fresh;
  cfg.objective.lambda = 1;
  train::Trainer<policy::VrapPolicyNet> tr(net, cfg, [](std::uint64_t s) { return gen_vrap(4, 8, 4, s); });
  for (auto _ : state) benchmark::DoNotOptimize(tr.run_epoch(exec_of(state)).mean_L);
}
BENCHMARK(BM_TrainEpochVrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaJsp(benchmark::State& state) {
  const auto inst = gen_jsp(10, 10, 1, 99, 3);
  baselines::GaConfig cfg;
  cfg.generations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(baselines::ga_jsp(inst, cfg, {}, exec_of(state)).objective);
}
BENCHMARK(BM_GaJsp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaVrap(benchmark::State& state) {
  const auto inst = gen_vrap(10, 8, 8, 4);
  baselines::GaConfig cfg;
  cfg.generations = 20;
  for (auto _ : state) benchmark::DoNotOptimize(baselines::ga_vrap(inst, cfg, {}, exec_of(state)).objective);
}
BENCHMARK(BM_GaVrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  nn::Tensor a(n, n), b(n, n), out;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1, 1), b[i] = rng.uniform(-1, 1);
  for (auto _ : state) {
    nn::matmul_kernel(a, b, out);
    benchmark::DoNotOptimize(out[0]);
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
