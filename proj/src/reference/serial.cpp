#include "voronoigram/reference/serial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "voronoigram/errors.hpp"

namespace voronoigram::reference {

VoronoiDiagram voronoi_bruteforce(std::span<const Point2> points) {
  if (points.size() < 2) throw DegenerateInput("voronoi: need at least 2 points");
  require_in_open_unit_square(points);
  const auto n = static_cast<std::int32_t>(points.size());
  std::vector<CellPolygon> cells(points.size());
  std::vector<std::int32_t> others;
  for (std::int32_t i = 0; i < n; ++i) {
    others.clear();
    for (std::int32_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    cells[i] = clip_cell(points, i, others);
  }
  return VoronoiDiagram(std::vector<Point2>(points.begin(), points.end()), std::move(cells));
}

WeightedGraph eps_graph_bruteforce(std::span<const Point2> points, double eps) {
  if (!(eps >= 0.0)) throw BadConfig("eps graph needs eps >= 0");
  std::vector<Edge> edges;
  const auto n = static_cast<std::int32_t>(points.size());
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j)
      if (squared_distance(points[i], points[j]) <= eps * eps) edges.push_back({i, j, 1.0});
  return WeightedGraph(points.size(), std::move(edges));
}

WeightedGraph knn_graph_bruteforce(std::span<const Point2> points, int k) {
  const auto n = static_cast<std::int32_t>(points.size());
  if (k < 1 || k >= n) throw BadConfig("kNN graph needs 1 <= k < n");
  std::vector<double> radius2(points.size());
  std::vector<std::pair<double, std::int32_t>> d;
  for (std::int32_t i = 0; i < n; ++i) {
    d.clear();
    for (std::int32_t j = 0; j < n; ++j)
      if (j != i) d.emplace_back(squared_distance(points[i], points[j]), j);
    std::sort(d.begin(), d.end());
    radius2[i] = d[k - 1].first;
  }
  std::vector<Edge> edges;
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(points[i], points[j]);
      if (d2 <= radius2[i] || d2 <= radius2[j]) edges.push_back({i, j, 1.0});
    }
  }
  return WeightedGraph(points.size(), std::move(edges));
}

double discrete_tv_serial(const WeightedGraph& graph, std::span<const double> values) {
  if (values.size() != graph.num_nodes()) throw ShapeMismatch("discrete_tv: size mismatch");
  double s = 0.0;
  for (const auto& e : graph.edges()) s += e.w * std::abs(values[e.i] - values[e.j]);
  return s;
}

std::int32_t nearest_linear(std::span<const Point2> points, const Point2& q) {
  std::int32_t best = -1;
  double best_d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared_distance(points[i], q);
    if (best < 0 || d < best_d) {
      best = static_cast<std::int32_t>(i);
      best_d = d;
    }
  }
  return best;
}

MonteCarloEstimate l2_p_error_serial(const std::function<double(const Point2&)>& fhat,
                                     const std::function<double(const Point2&)>& truth,
                                     SamplingModel model, std::size_t samples,
                                     std::uint64_t seed) {
  if (samples < 2) throw BadConfig("l2_p_error needs at least 2 samples");
  constexpr std::size_t kBlock = 4096;
  double s = 0.0, s2 = 0.0;
  for (std::size_t lo = 0, b = 0; lo < samples; lo += kBlock, ++b) {
    const auto pts = sample_design(model, std::min(kBlock, samples - lo), stream_seed(seed, {b}));
    double bs = 0.0, bs2 = 0.0;
    for (const auto& p : pts) {
      const double e = fhat(p) - truth(p);
      bs += e * e;
      bs2 += e * e * e * e;
    }
    s += bs;
    s2 += bs2;
  }
  const double nn = static_cast<double>(samples);
  const double mean = s / nn;
  const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

}  // namespace voronoigram::reference
