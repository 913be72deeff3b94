#include <benchmark/benchmark.h>

#include "distdyk/analysis.hpp"
#include "distdyk/schedule.hpp"

using namespace distdyk;

namespace {

Engine star_engine(Family fam, Treatment treat, std::size_t dim) {
  Instance inst = with_treatment(generate(fam, 1, 5, dim), treat);
  SubspaceSet set = SubspaceSet::full_edges(inst.graph, dim);
  Schedule s = star_schedule(set);
  return Engine(std::move(inst), std::move(set), std::move(s));
}

void BM_StarCycle(benchmark::State& state) {
  const auto fam = state.range(0) ? Family::Nonsmooth : Family::Smooth;
  const auto treat = state.range(1) ? Treatment::Subdiff : Treatment::Prox;
  Engine e = star_engine(fam, treat, static_cast<std::size_t>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(e.run(1));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StarCycle)->ArgsProduct({{0, 1}, {0, 1}, {4, 32}})->ArgNames({"nonsmooth", "subdiff", "m"});

void BM_RingTimeVarying(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  Instance inst = with_treatment(gen_nonsmooth(1, nodes, 4, GraphShape::Ring), Treatment::Subdiff);
  SubspaceSet set = SubspaceSet::full_edges(inst.graph, 4);
  Schedule s = time_varying_schedule(set, inst.classes(), 1, 1.0 / static_cast<double>(nodes), 64);
  Engine e(std::move(inst), std::move(set), std::move(s));
  for (auto _ : state) benchmark::DoNotOptimize(e.run(1));
}
BENCHMARK(BM_RingTimeVarying)->Arg(6)->Arg(24)->Arg(96);

void BM_Decompose(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 4;
  const Graph g = Graph::ring(nodes);
  const SubspaceSet set = SubspaceSet::full_edges(g, dim);
  Rng rng(3);
  StackedVector v(nodes, dim);
  Vec sum = Vec::Zero(dim);
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    v.block(i) = Vec::NullaryExpr(dim, [&] { return rng.uniform(-1, 1); });
    sum += v.block(i);
  }
  v.block(nodes - 1) = -sum;
  std::vector<std::size_t> active;
  for (std::size_t id = 1; id < set.size(); ++id) active.push_back(id);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_edge_duals(v, active, set));
}
BENCHMARK(BM_Decompose)->Arg(8)->Arg(64)->Arg(512);

void BM_ProxMaxTwoQuadratics(benchmark::State& state) {
  const Instance inst = gen_nonsmooth(1, 2, static_cast<std::size_t>(state.range(0)));
  const NodeFunction& f = inst.functions[0];
  Rng rng(5);
  const Vec p = Vec::NullaryExpr(static_cast<Eigen::Index>(inst.dim), [&] { return rng.uniform(-3, 3); });
  for (auto _ : state) benchmark::DoNotOptimize(prox(f, p));
}
BENCHMARK(BM_ProxMaxTwoQuadratics)->Arg(4)->Arg(32);

void BM_FitRate(benchmark::State& state) {
  std::vector<double> g;
  for (int n = 1; n <= state.range(0); ++n) g.push_back(std::pow(0.97, n));
  for (auto _ : state) benchmark::DoNotOptimize(fit_rate(g, RateModel::Linear));
}
BENCHMARK(BM_FitRate)->Arg(200)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
