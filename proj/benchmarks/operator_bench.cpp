#include <benchmark/benchmark.h>

#include "cfstat/spectral.hpp"

using namespace cfstat;

namespace {

TransferOperator make(const MapDescriptor& map, int grid, std::int64_t jmax) {
  OperatorConfig c;
  c.grid = grid;
  c.jmax = jmax;
  return TransferOperator(map, TargetSet::parse(map, map.algorithm() == Algorithm::jacobi_perron ? "0:1" : "1"), c);
}

void apply_loop(benchmark::State& state, const TransferOperator& op) {
  auto f = op.make_function(1.0);
  auto g = op.make_function();
  const std::vector<double> t(op.target_count(), 0.0);
  for (auto _ : state) {
    op.apply(f, 1.0, t, g);
    benchmark::DoNotOptimize(g.raw().data());
  }
}

}  // namespace

static void BM_ApplyGauss(benchmark::State& state) {
  const auto op = make(MapDescriptor::gauss(), static_cast<int>(state.range(0)), 10000);
  apply_loop(state, op);
}
BENCHMARK(BM_ApplyGauss)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_ApplyBrun2(benchmark::State& state) {
  const auto op = make(MapDescriptor::brun(2), static_cast<int>(state.range(0)), 512);
  apply_loop(state, op);
}
BENCHMARK(BM_ApplyBrun2)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ApplyJacobiPerron(benchmark::State& state) {
  const auto op = make(MapDescriptor::jacobi_perron(), static_cast<int>(state.range(0)), 64);
  apply_loop(state, op);
}
BENCHMARK(BM_ApplyJacobiPerron)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LeadingEigenvalueGauss(benchmark::State& state) {
  const auto op = make(MapDescriptor::gauss(), 1024, 10000);
  for (auto _ : state) benchmark::DoNotOptimize(leading_eigenvalue(op, 1.0, std::vector<double>{0.0}).eigenvalue);
}
BENCHMARK(BM_LeadingEigenvalueGauss)->Unit(benchmark::kSecond)->Iterations(1);
