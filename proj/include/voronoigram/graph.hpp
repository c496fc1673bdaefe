#pragma once

// Weighted graphs over design points: Voronoi adjacency (exact, clipped and
// unit weights), epsilon-neighborhood and symmetrized kNN graphs, the edge
// incidence operator and the discrete TV functional.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "voronoigram/geometry.hpp"

namespace voronoigram {

struct Edge {
  std::int32_t i = 0;  ///< i < j
  std::int32_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph with strictly positive weights. Edges are kept sorted by
/// (i, j) without duplicates or self-loops; the constructor canonicalizes
/// (i > j is swapped) and throws std::invalid_argument otherwise.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  double mean_weight() const;
  double min_weight() const;
  /// Number of connected components (isolated nodes count as components).
  std::size_t num_components() const;
  /// Component label per node, numbered by first appearance.
  std::vector<std::int32_t> component_labels() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

struct ExactVoronoi {};
struct ClippedVoronoi {
  double c0 = 1.0;
};
struct UnitVoronoi {};
struct Epsilon {
  double eps = 0.0;
};
struct Knn {
  int k = 1;
};

using VoronoiWeights = std::variant<ExactVoronoi, ClippedVoronoi, UnitVoronoi>;
using WeightScheme = std::variant<ExactVoronoi, ClippedVoronoi, UnitVoronoi, Epsilon, Knn>;

std::string scheme_name(const WeightScheme& scheme);

/// max{c0 * n^{-(d-1)/d}, length}.
double clipped_weight(double length, double c0, std::size_t n, int d = 2);

WeightedGraph build_voronoi_graph(const VoronoiDiagram& diagram, const VoronoiWeights& scheme);

/// Edge (i, j, 1) iff ||x_i - x_j|| <= eps (boundary inclusive). Neighbor
/// search runs per point in parallel over a uniform bucket grid.
WeightedGraph build_eps_graph(std::span<const Point2> points, double eps);

/// Symmetrized kNN graph: (i, j, 1) iff ||x_i - x_j|| <= max(r_k(i), r_k(j)).
/// Requires 1 <= k < n.
WeightedGraph build_knn_graph(std::span<const Point2> points, int k);

/// Per-node distance to the k-th nearest other point.
std::vector<double> kth_neighbor_distances(std::span<const Point2> points, int k);

/// Edge incidence operator D: row l for edge (i, j, w) has +w at i and -w at
/// j. A view over the graph; never materialized densely.
class IncidenceOperator {
 public:
  explicit IncidenceOperator(const WeightedGraph& graph) : graph_(&graph) {}

  std::size_t rows() const { return graph_->num_edges(); }
  std::size_t cols() const { return graph_->num_nodes(); }

  /// out = D * theta
  void apply(std::span<const double> theta, std::span<double> out) const;
  /// out = D^T * s
  void apply_transpose(std::span<const double> s, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> theta) const;
  std::vector<double> apply_transpose(std::span<const double> s) const;

  const WeightedGraph& graph() const { return *graph_; }

 private:
  const WeightedGraph* graph_;
};

inline IncidenceOperator incidence(const WeightedGraph& graph) { return IncidenceOperator(graph); }

/// Sum over edges of w * |theta_i - theta_j|. Throws ShapeMismatch.
double discrete_tv(const WeightedGraph& graph, std::span<const double> values);

/// Text format: header "n m", then one "i j w" line per edge, 1-based, with
/// weights written in shortest round-trip form.
void save_graph(std::ostream& os, const WeightedGraph& graph);
WeightedGraph load_graph(std::istream& is);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace voronoigram
