// Parallel kernels against their serial references. The second argument of
// the parallel variants is the thread count.

#include <benchmark/benchmark.h>

#include "voronoigram/estimators.hpp"
#include "voronoigram/experiments.hpp"
#include "voronoigram/parallel.hpp"
#include "voronoigram/reference/serial.hpp"

using namespace voronoigram;

namespace {

std::vector<Point2> design(std::int64_t n) {
  return sample_design(SamplingModel::Uniform, static_cast<std::size_t>(n), 12345);
}

void BM_Voronoi(benchmark::State& state) {
  const auto pts = design(state.range(0));
  par::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(voronoi(pts));
  state.SetComplexityN(state.range(0));
}

void BM_VoronoiBruteForce(benchmark::State& state) {
  const auto pts = design(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::voronoi_bruteforce(pts));
}

void BM_EpsGraph(benchmark::State& state) {
  const auto pts = design(state.range(0));
  const double eps = experiments::eps_radius(pts.size(), experiments::kDefaultC2);
  par::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_eps_graph(pts, eps));
}

void BM_EpsGraphBruteForce(benchmark::State& state) {
  const auto pts = design(state.range(0));
  const double eps = experiments::eps_radius(pts.size(), experiments::kDefaultC2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::eps_graph_bruteforce(pts, eps));
}

void BM_KnnGraph(benchmark::State& state) {
  const auto pts = design(state.range(0));
  par::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(pts, 6));
}

void BM_KnnGraphBruteForce(benchmark::State& state) {
  const auto pts = design(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::knn_graph_bruteforce(pts, 6));
}

void BM_DiscreteTv(benchmark::State& state) {
  const auto pts = design(state.range(0));
  const auto g = build_voronoi_graph(voronoi(pts), ExactVoronoi{});
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f0_indicator_ball(pts[i]);
  par::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(discrete_tv(g, v));
}

void BM_DiscreteTvSerial(benchmark::State& state) {
  const auto pts = design(state.range(0));
  const auto g = build_voronoi_graph(voronoi(pts), ExactVoronoi{});
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f0_indicator_ball(pts[i]);
  for (auto _ : state) benchmark::DoNotOptimize(reference::discrete_tv_serial(g, v));
}

PiecewiseConstantFn risk_fit() {
  const auto data = simulate_dataset(SamplingModel::Uniform, 2000, 1.0, 7);
  return PiecewiseConstantFn(data.points, data.y);
}

void BM_MonteCarloRisk(benchmark::State& state) {
  const auto fn = risk_fit();
  const auto fhat = [&](const Point2& p) { return fn(p); };
  par::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(l2_p_error(fhat, f0_indicator_ball, SamplingModel::Uniform,
                                        static_cast<std::size_t>(state.range(0)), 1));
}

void BM_MonteCarloRiskSerial(benchmark::State& state) {
  const auto fn = risk_fit();
  const auto fhat = [&](const Point2& p) { return fn(p); };
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::l2_p_error_serial(
        fhat, f0_indicator_ball, SamplingModel::Uniform, static_cast<std::size_t>(state.range(0)), 1));
}

const int kMaxThreads = par::max_threads();

void thread_args(benchmark::internal::Benchmark* b, std::initializer_list<std::int64_t> sizes) {
  for (const auto n : sizes)
    for (int t = 1; t <= kMaxThreads; t *= 2) b->Args({n, t});
}

}  // namespace

BENCHMARK(BM_Voronoi)->Apply([](auto* b) { thread_args(b, {1000, 20000}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VoronoiBruteForce)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EpsGraph)->Apply([](auto* b) { thread_args(b, {2000, 50000}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EpsGraphBruteForce)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnGraph)->Apply([](auto* b) { thread_args(b, {2000, 50000}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnGraphBruteForce)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiscreteTv)->Apply([](auto* b) { thread_args(b, {20000}); })->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DiscreteTvSerial)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarloRisk)->Apply([](auto* b) { thread_args(b, {100000}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloRiskSerial)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
