#include <benchmark/benchmark.h>

#include <vector>

#include "qcdet/consensus.hpp"
#include "qcdet/detect.hpp"
#include "qcdet/experiments.hpp"
#include "qcdet/graph.hpp"
#include "qcdet/models.hpp"

namespace {

std::vector<double> llr_data(int n, std::uint64_t seed) {
  const auto model = qcdet::HypothesisModel::gaussian(1.0, -1.0, 10.0);
  const auto obs = model.sample(qcdet::Hypothesis::kH1, n, seed);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = model.llr(obs[i]);
  return r;
}

void BM_Advance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qcdet::Graph g = qcdet::random_connected(n, 3LL * n, 1);
  const qcdet::DeltaQuantizer q(-1.0, 2.0, 1.0);
  const auto r = llr_data(n, 2);
  auto s = qcdet::init(g, r, q, 1.0 / (4.0 * g.edge_count()));
  for (auto _ : state) {
    qcdet::advance(s, g, q);
    benchmark::DoNotOptimize(s.x().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Advance)->Arg(10)->Arg(100)->Arg(1000);

void BM_RunStarPractical(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qcdet::Graph g = qcdet::star(n);
  const qcdet::DeltaQuantizer q(-1.0, 2.0, 1.0);
  const auto r = llr_data(n, 3);
  std::int64_t iterations = 0;
  for (auto _ : state) {
    const auto out = qcdet::run(g, r, q, qcdet::practical_rho(g.edge_count()));
    iterations += out.iterations;
    benchmark::DoNotOptimize(out.level);
  }
  state.counters["consensus_iters"] = benchmark::Counter(static_cast<double>(iterations), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_RunStarPractical)->Arg(10)->Arg(40)->Arg(100);

void BM_RunStarStrict(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qcdet::Graph g = qcdet::star(n);
  const auto cfg = qcdet::map_config(n, g.edge_count(), 0.5, 0.5, false);
  const auto r = llr_data(n, 4);
  for (auto _ : state) {
    const auto out = qcdet::run(g, r, cfg.quantizer, cfg.rho);
    benchmark::DoNotOptimize(out.level);
  }
}
BENCHMARK(BM_RunStarStrict)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_RateFunction(benchmark::State& state) {
  const auto model = qcdet::HypothesisModel::discrete({0.5, 0.3, 0.2}, {0.2, 0.3, 0.5});
  double tau = -0.1;
  for (auto _ : state) benchmark::DoNotOptimize(model.rate_function(tau));
}
BENCHMARK(BM_RateFunction);

void BM_RandomConnected(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto g = qcdet::random_connected(n, 2LL * n, ++seed);
    benchmark::DoNotOptimize(g.edge_count());
  }
}
BENCHMARK(BM_RandomConnected)->Arg(50)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
