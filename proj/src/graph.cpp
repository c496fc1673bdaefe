#include "voronoigram/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "voronoigram/errors.hpp"
#include "voronoigram/kdtree.hpp"
#include "voronoigram/parallel.hpp"
#include "voronoigram/union_find.hpp"

namespace voronoigram {

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j) throw std::invalid_argument("graph: self-loop at node " + std::to_string(e.i));
    if (e.i < 0 || static_cast<std::size_t>(e.j) >= n_) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (!(e.w > 0.0) || !std::isfinite(e.w)) {
      throw std::invalid_argument("graph: weights must be finite and strictly positive");
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j) {
      throw std::invalid_argument("graph: duplicate edge");
    }
  }
}

double WeightedGraph::mean_weight() const {
  if (edges_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : edges_) s += e.w;
  return s / static_cast<double>(edges_.size());
}

double WeightedGraph::min_weight() const {
  double m = edges_.empty() ? 0.0 : edges_.front().w;
  for (const auto& e : edges_) m = std::min(m, e.w);
  return m;
}

std::vector<std::int32_t> WeightedGraph::component_labels() const {
  UnionFind uf(n_);
  for (const auto& e : edges_) uf.unite(e.i, e.j);
  return uf.labels();
}

std::size_t WeightedGraph::num_components() const {
  UnionFind uf(n_);
  for (const auto& e : edges_) uf.unite(e.i, e.j);
  return uf.count();
}

std::string scheme_name(const WeightScheme& scheme) {
  struct {
    std::string operator()(const ExactVoronoi&) const { return "voronoi"; }
    std::string operator()(const ClippedVoronoi&) const { return "voronoi-clipped"; }
    std::string operator()(const UnitVoronoi&) const { return "voronoi-unit"; }
    std::string operator()(const Epsilon&) const { return "eps"; }
    std::string operator()(const Knn&) const { return "knn"; }
  } visitor;
  return std::visit(visitor, scheme);
}

double clipped_weight(double length, double c0, std::size_t n, int d) {
  const double floor_w =
      c0 * std::pow(static_cast<double>(n), -static_cast<double>(d - 1) / static_cast<double>(d));
  return std::max(floor_w, length);
}

WeightedGraph build_voronoi_graph(const VoronoiDiagram& diagram, const VoronoiWeights& scheme) {
  std::vector<Edge> edges;
  edges.reserve(diagram.facets().size());
  const std::size_t n = diagram.size();
  for (const auto& f : diagram.facets()) {
    double w = f.length;
    if (const auto* c = std::get_if<ClippedVoronoi>(&scheme)) {
      if (!(c->c0 > 0.0)) throw BadConfig("clipped Voronoi weights need c0 > 0");
      w = clipped_weight(f.length, c->c0, n);
    } else if (std::holds_alternative<UnitVoronoi>(scheme)) {
      w = 1.0;
    }
    edges.push_back({f.i, f.j, w});
  }
  return WeightedGraph(n, std::move(edges));
}

WeightedGraph build_eps_graph(std::span<const Point2> points, double eps) {
  if (!(eps >= 0.0)) throw BadConfig("eps graph needs eps >= 0");
  const std::size_t n = points.size();
  // Bucket side >= eps so only the 3x3 block around a point needs scanning.
  const double cap = std::max(1.0, std::floor(2.0 * std::sqrt(static_cast<double>(n))));
  const std::int32_t side =
      static_cast<std::int32_t>(eps > 0.0 ? std::clamp(std::floor(1.0 / eps), 1.0, cap) : cap);
  auto cell_of = [side](double v) {
    return std::clamp(static_cast<std::int32_t>(v * side), 0, side - 1);
  };
  const std::size_t ncells = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  std::vector<std::size_t> start(ncells + 1, 0);
  std::vector<std::size_t> cell(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = static_cast<std::size_t>(cell_of(points[i].y)) * side + cell_of(points[i].x);
    ++start[cell[i] + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::int32_t> members(n);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) members[fill[cell[i]]++] = static_cast<std::int32_t>(i);
  }

  const double eps2 = eps * eps;
  std::vector<std::vector<std::int32_t>> adj(n);
#pragma omp parallel for schedule(dynamic, 512)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::int32_t>(ii);
    const std::int32_t cx = cell_of(points[i].x);
    const std::int32_t cy = cell_of(points[i].y);
    auto& out = adj[i];
    for (std::int32_t y = std::max(0, cy - 1); y <= std::min(side - 1, cy + 1); ++y) {
      for (std::int32_t x = std::max(0, cx - 1); x <= std::min(side - 1, cx + 1); ++x) {
        const std::size_t c = static_cast<std::size_t>(y) * side + x;
        for (std::size_t t = start[c]; t < start[c + 1]; ++t) {
          const std::int32_t j = members[t];
          if (j > i && squared_distance(points[i], points[j]) <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }
  std::vector<Edge> edges;
  std::size_t total = 0;
  for (const auto& a : adj) total += a.size();
  edges.reserve(total);
  for (std::size_t i = 0; i < n; ++i)
    for (const std::int32_t j : adj[i]) edges.push_back({static_cast<std::int32_t>(i), j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

std::vector<double> kth_neighbor_distances(std::span<const Point2> points, int k) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw BadConfig("kNN graph needs 1 <= k < n");
  const KdTree tree(points);
  std::vector<double> r2(n);
#pragma omp parallel for schedule(dynamic, 512)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const auto nb = tree.knn(points[i], static_cast<std::size_t>(k), static_cast<std::int32_t>(i));
    r2[i] = nb.back().first;
  }
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::sqrt(r2[i]);
  return r;
}

WeightedGraph build_knn_graph(std::span<const Point2> points, int k) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw BadConfig("kNN graph needs 1 <= k < n");
  const KdTree tree(points);
  std::vector<std::vector<std::int32_t>> adj(n);
#pragma omp parallel for schedule(dynamic, 512)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::int32_t>(ii);
    const auto nb = tree.knn(points[i], static_cast<std::size_t>(k), i);
    // Everything within the k-th distance, including exact distance ties.
    for (const std::int32_t j : tree.within(points[i], nb.back().first)) {
      if (j != i) adj[i].push_back(j);
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::int32_t j : adj[i]) {
      const auto a = static_cast<std::int32_t>(i);
      edges.push_back({std::min(a, j), std::max(a, j), 1.0});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return WeightedGraph(n, std::move(edges));
}

void IncidenceOperator::apply(std::span<const double> theta, std::span<double> out) const {
  if (theta.size() != cols() || out.size() != rows()) throw ShapeMismatch("D*theta: shape mismatch");
  const auto edges = graph_->edges();
  for (std::size_t l = 0; l < edges.size(); ++l) {
    out[l] = edges[l].w * (theta[edges[l].i] - theta[edges[l].j]);
  }
}

void IncidenceOperator::apply_transpose(std::span<const double> s, std::span<double> out) const {
  if (s.size() != rows() || out.size() != cols()) throw ShapeMismatch("D^T*s: shape mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const auto edges = graph_->edges();
  for (std::size_t l = 0; l < edges.size(); ++l) {
    out[edges[l].i] += edges[l].w * s[l];
    out[edges[l].j] -= edges[l].w * s[l];
  }
}

std::vector<double> IncidenceOperator::apply(std::span<const double> theta) const {
  std::vector<double> out(rows());
  apply(theta, out);
  return out;
}

std::vector<double> IncidenceOperator::apply_transpose(std::span<const double> s) const {
  std::vector<double> out(cols());
  apply_transpose(s, out);
  return out;
}

double discrete_tv(const WeightedGraph& graph, std::span<const double> values) {
  if (values.size() != graph.num_nodes()) {
    throw ShapeMismatch("discrete_tv: " + std::to_string(values.size()) + " values for " +
                        std::to_string(graph.num_nodes()) + " nodes");
  }
  const auto edges = graph.edges();
  return par::ordered_block_sum(edges.size(), [&](std::size_t l) {
    return edges[l].w * std::abs(values[edges[l].i] - values[edges[l].j]);
  });
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void save_graph(std::ostream& os, const WeightedGraph& graph) {
  os << graph.num_nodes() << ' ' << graph.num_edges() << '\n';
  for (const auto& e : graph.edges()) {
    os << (e.i + 1) << ' ' << (e.j + 1) << ' ' << format_double(e.w) << '\n';
  }
  if (!os) throw IoError("failed writing graph");
}

WeightedGraph load_graph(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw IoError("graph file: missing 'n m' header");
  std::vector<Edge> edges;
  edges.reserve(m);
  std::string token;
  for (std::size_t l = 0; l < m; ++l) {
    std::int64_t i = 0, j = 0;
    if (!(is >> i >> j >> token)) throw IoError("graph file: truncated at edge " + std::to_string(l + 1));
    double w = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), w);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw IoError("graph file: bad weight '" + token + "'");
    }
    if (i < 1 || j < 1) throw IoError("graph file: indices are 1-based");
    edges.push_back({static_cast<std::int32_t>(i - 1), static_cast<std::int32_t>(j - 1), w});
  }
  try {
    return WeightedGraph(n, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("graph file: ") + e.what());
  }
}

}  // namespace voronoigram
