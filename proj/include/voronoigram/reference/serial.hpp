#pragma once

// Serial, brute-force counterparts of the parallel kernels. Quadratic where
// the fast versions are not; used as test oracles and benchmark baselines.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "voronoigram/estimators.hpp"
#include "voronoigram/geometry.hpp"
#include "voronoigram/graph.hpp"

namespace voronoigram::reference {

/// Each cell clipped by the bisectors of all other sites, one after another.
VoronoiDiagram voronoi_bruteforce(std::span<const Point2> points);

WeightedGraph eps_graph_bruteforce(std::span<const Point2> points, double eps);

/// Sorts all distances per point with index tie-breaking.
WeightedGraph knn_graph_bruteforce(std::span<const Point2> points, int k);

double discrete_tv_serial(const WeightedGraph& graph, std::span<const double> values);

/// Lowest index among the closest points.
std::int32_t nearest_linear(std::span<const Point2> points, const Point2& q);

/// Same blocks and streams as l2_p_error, accumulated in one thread.
MonteCarloEstimate l2_p_error_serial(const std::function<double(const Point2&)>& fhat,
                                     const std::function<double(const Point2&)>& truth,
                                     SamplingModel model, std::size_t samples,
                                     std::uint64_t seed);

}  // namespace voronoigram::reference
