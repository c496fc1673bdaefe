#pragma once

// Planar Delaunay triangulation and Voronoi diagrams clipped to the unit
// square.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace voronoigram {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Throws DegenerateInput unless every point lies strictly inside (0,1)^2.
void require_in_open_unit_square(std::span<const Point2> points);

namespace predicates {

/// Sign of the orientation determinant: +1 if (a,b,c) turn counterclockwise,
/// -1 if clockwise, 0 if collinear. Exact.
int orient2d(const Point2& a, const Point2& b, const Point2& c);

/// +1 if d lies strictly inside the circle through counterclockwise (a,b,c),
/// -1 if strictly outside, 0 if cocircular. Exact.
int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// incircle() with cocircular ties resolved by a symbolic lift perturbation
/// that raises lower-index points more: the result is never 0 for four
/// distinct points no three of which are collinear.
int incircle_perturbed(const Point2& a, const Point2& b, const Point2& c, const Point2& d,
                       std::int64_t ia, std::int64_t ib, std::int64_t ic, std::int64_t id);

/// Number of calls that fell through the floating-point filter to exact
/// arithmetic (process-wide, approximate under concurrency).
std::uint64_t exact_fallback_count();

}  // namespace predicates

/// A Delaunay triangulation. Triangles are counterclockwise vertex triples;
/// `adjacency[t][k]` is the triangle across the edge opposite vertex k, or -1
/// on the convex hull.
struct Triangulation {
  std::vector<Point2> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;
  std::vector<std::array<std::int32_t, 3>> adjacency;

  std::size_t hull_size() const;
  /// Sorted Delaunay neighbors of every vertex.
  std::vector<std::vector<std::int32_t>> vertex_neighbors() const;
};

/// Incremental Bowyer-Watson over a Hilbert-sorted insertion order with exact
/// predicates. Cocircular ties follow incircle_perturbed(): among four
/// cocircular points the lowest-index one is lifted, so e.g. the square
/// {0:(.25,.25), 1:(.75,.25), 2:(.25,.75), 3:(.75,.75)} gets diagonal (1,2).
/// Throws DegenerateInput for n < 3, all-collinear input or duplicates.
Triangulation delaunay(std::span<const Point2> points);

/// Neighbor lists of the Voronoi adjacency candidates: Delaunay neighbors,
/// or consecutive points along the line when the input is collinear/n == 2.
std::vector<std::vector<std::int32_t>> voronoi_candidate_neighbors(
    std::span<const Point2> points);

struct Facet {
  std::int32_t i = 0;  ///< i < j
  std::int32_t j = 0;
  Point2 a;
  Point2 b;
  double length = 0.0;
};

/// Edge label used in clipped cells for the four sides of the square.
enum : std::int32_t {
  kBottomSide = -1,
  kRightSide = -2,
  kTopSide = -3,
  kLeftSide = -4,
};

/// A convex counterclockwise polygon whose edge k runs from vertex k to
/// vertex k+1 and is labelled with the neighbor whose bisector produced it
/// (or a negative side label).
struct CellPolygon {
  std::vector<Point2> vertices;
  std::vector<std::int32_t> edge_labels;

  double area() const;
  bool contains(const Point2& q, double tol = 0.0) const;
};

/// Clips the unit square by the bisector half-planes of `neighbors` around
/// `site`. Degenerate (sub-1e-14) edges are removed.
CellPolygon clip_cell(std::span<const Point2> points, std::int32_t site,
                      std::span<const std::int32_t> neighbors);

/// Minimum facet length treated as a shared boundary of positive measure.
inline constexpr double kFacetTolerance = 1e-12;

/// Voronoi diagram of points in (0,1)^2 intersected with the closed square.
/// Immutable after construction.
class VoronoiDiagram {
 public:
  VoronoiDiagram() = default;
  VoronoiDiagram(std::vector<Point2> points, std::vector<CellPolygon> cells);

  std::size_t size() const { return points_.size(); }
  std::span<const Point2> points() const { return points_; }
  const CellPolygon& cell(std::size_t i) const { return cells_[i]; }
  std::span<const CellPolygon> cells() const { return cells_; }
  /// Facets sorted by (i, j), one per adjacent pair.
  std::span<const Facet> facets() const { return facets_; }

  double facet_length(std::int32_t i, std::int32_t j) const;
  const Facet* find_facet(std::int32_t i, std::int32_t j) const;
  double cell_area(std::size_t i) const { return cells_[i].area(); }

  /// Perimeter functional sum over facets of length * |v_i - v_j|.
  double boundary_functional(std::span<const double> values) const;

  /// Index of the cell containing q; points on shared boundaries go to the
  /// lowest index.
  std::int32_t locate(const Point2& q) const;

 private:
  std::vector<Point2> points_;
  std::vector<CellPolygon> cells_;
  std::vector<Facet> facets_;
  std::vector<std::size_t> row_start_;  // CSR over both (i,j) and (j,i)
  std::vector<std::int32_t> col_;
  std::vector<std::size_t> facet_of_;
};

/// Voronoi diagram clipped to [0,1]^2. Cells are computed independently and in
/// parallel (one task per site) from the Delaunay neighbor lists.
/// Throws DegenerateInput for n < 2.
VoronoiDiagram voronoi(std::span<const Point2> points);

void write_diagram_json(std::ostream& os, const VoronoiDiagram& diagram);
void write_diagram_svg(std::ostream& os, const VoronoiDiagram& diagram, double size_px = 800);

}  // namespace voronoigram
