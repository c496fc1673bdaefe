#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "voronoigram/errors.hpp"
#include "voronoigram/geometry.hpp"

namespace voronoigram {
namespace {

constexpr double kDegenerateEdge = 1e-14;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

void drop_degenerate_edges(CellPolygon& poly) {
  auto& v = poly.vertices;
  auto& l = poly.edge_labels;
  bool changed = true;
  while (changed && v.size() > 2) {
    changed = false;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::size_t next = (k + 1) % v.size();
      if (std::sqrt(squared_distance(v[k], v[next])) < kDegenerateEdge) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(k));
        l.erase(l.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
}

// Sutherland-Hodgman step against {z : (z - m) . d <= 0}, carrying edge labels.
void clip_halfplane(CellPolygon& poly, const Point2& site, const Point2& other,
                    std::int32_t label, CellPolygon& scratch) {
  const double dx = other.x - site.x;
  const double dy = other.y - site.y;
  const double mx = 0.5 * (site.x + other.x);
  const double my = 0.5 * (site.y + other.y);
  auto f = [&](const Point2& p) { return (p.x - mx) * dx + (p.y - my) * dy; };

  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  bool any_out = false;
  for (const auto& p : v) any_out |= f(p) > 0.0;
  if (!any_out) return;

  scratch.vertices.clear();
  scratch.edge_labels.clear();
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& a = v[k];
    const Point2& b = v[(k + 1) % n];
    const double fa = f(a);
    const double fb = f(b);
    const bool a_in = fa <= 0.0;
    const bool b_in = fb <= 0.0;
    if (a_in) {
      scratch.vertices.push_back(a);
      if (b_in) {
        scratch.edge_labels.push_back(poly.edge_labels[k]);
      } else {
        scratch.edge_labels.push_back(poly.edge_labels[k]);
        const double t = fa / (fa - fb);
        scratch.vertices.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        scratch.edge_labels.push_back(label);
      }
    } else if (b_in) {
      const double t = fa / (fa - fb);
      scratch.vertices.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      scratch.edge_labels.push_back(poly.edge_labels[k]);
    }
  }
  std::swap(poly.vertices, scratch.vertices);
  std::swap(poly.edge_labels, scratch.edge_labels);
  drop_degenerate_edges(poly);
}

}  // namespace

void require_in_open_unit_square(std::span<const Point2> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) {
      throw DegenerateInput("point " + std::to_string(i) + " is outside the open unit square");
    }
  }
}

double CellPolygon::area() const {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& a = vertices[k];
    const Point2& b = vertices[(k + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool CellPolygon::contains(const Point2& q, double tol) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (cross(vertices[k], vertices[(k + 1) % n], q) < -tol) return false;
  }
  return true;
}

CellPolygon clip_cell(std::span<const Point2> points, std::int32_t site,
                      std::span<const std::int32_t> neighbors) {
  CellPolygon poly;
  poly.vertices = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  poly.edge_labels = {kBottomSide, kRightSide, kTopSide, kLeftSide};
  CellPolygon scratch;
  const Point2& s = points[site];
  for (const std::int32_t j : neighbors) {
    if (j == site) continue;
    clip_halfplane(poly, s, points[j], j, scratch);
    if (poly.vertices.size() < 3) break;
  }
  return poly;
}

std::vector<std::vector<std::int32_t>> voronoi_candidate_neighbors(
    std::span<const Point2> points) {
  const std::size_t n = points.size();
  try {
    if (n >= 3) return delaunay(points).vertex_neighbors();
  } catch (const DegenerateInput& e) {
    if (std::string(e.what()).find("collinear") == std::string::npos) throw;
  }
  // Collinear (or two-point) input: cells are slabs between consecutive points.
  Point2 dir{points[1].x - points[0].x, points[1].y - points[0].y};
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = points[i].x * dir.x + points[i].y * dir.y;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) { return proj[a] < proj[b]; });
  std::vector<std::vector<std::int32_t>> nbrs(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (points[order[k]] == points[order[k + 1]]) throw DegenerateInput("voronoi: duplicate points");
    nbrs[order[k]].push_back(order[k + 1]);
    nbrs[order[k + 1]].push_back(order[k]);
  }
  for (auto& l : nbrs) std::sort(l.begin(), l.end());
  return nbrs;
}

VoronoiDiagram::VoronoiDiagram(std::vector<Point2> points, std::vector<CellPolygon> cells)
    : points_(std::move(points)), cells_(std::move(cells)) {
  const std::size_t n = points_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& poly = cells_[i];
    const std::size_t m = poly.vertices.size();
    std::vector<Facet> local;
    for (std::size_t k = 0; k < m; ++k) {
      const std::int32_t j = poly.edge_labels[k];
      if (j <= static_cast<std::int32_t>(i)) continue;
      const Point2& a = poly.vertices[k];
      const Point2& b = poly.vertices[(k + 1) % m];
      const double len = std::sqrt(squared_distance(a, b));
      if (len > kFacetTolerance) local.push_back({static_cast<std::int32_t>(i), j, a, b, len});
    }
    std::sort(local.begin(), local.end(),
              [](const Facet& x, const Facet& y) { return x.j < y.j; });
    facets_.insert(facets_.end(), local.begin(), local.end());
  }
  std::vector<std::size_t> degree(n + 1, 0);
  for (const auto& f : facets_) {
    ++degree[f.i];
    ++degree[f.j];
  }
  row_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_start_[i + 1] = row_start_[i] + degree[i];
  col_.resize(row_start_[n]);
  facet_of_.resize(row_start_[n]);
  std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    const auto& fc = facets_[f];
    col_[fill[fc.i]] = fc.j;
    facet_of_[fill[fc.i]++] = f;
    col_[fill[fc.j]] = fc.i;
    facet_of_[fill[fc.j]++] = f;
  }
}

const Facet* VoronoiDiagram::find_facet(std::int32_t i, std::int32_t j) const {
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= size() ||
      static_cast<std::size_t>(j) >= size()) {
    return nullptr;
  }
  for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
    if (col_[k] == j) return &facets_[facet_of_[k]];
  }
  return nullptr;
}

double VoronoiDiagram::facet_length(std::int32_t i, std::int32_t j) const {
  const Facet* f = find_facet(i, j);
  return f ? f->length : 0.0;
}

double VoronoiDiagram::boundary_functional(std::span<const double> values) const {
  if (values.size() != size()) throw ShapeMismatch("boundary_functional: value count mismatch");
  double total = 0.0;
  for (const auto& f : facets_) total += f.length * std::abs(values[f.i] - values[f.j]);
  return total;
}

std::int32_t VoronoiDiagram::locate(const Point2& q) const {
  std::int32_t best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = squared_distance(points_[i], q);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::int32_t>(i);
    }
  }
  return best;
}

VoronoiDiagram voronoi(std::span<const Point2> points) {
  if (points.size() < 2) throw DegenerateInput("voronoi: need at least 2 points");
  require_in_open_unit_square(points);
  const auto nbrs = voronoi_candidate_neighbors(points);
  const std::int64_t n = static_cast<std::int64_t>(points.size());
  std::vector<CellPolygon> cells(points.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    cells[i] = clip_cell(points, static_cast<std::int32_t>(i), nbrs[i]);
  }
  return VoronoiDiagram(std::vector<Point2>(points.begin(), points.end()), std::move(cells));
}

void write_diagram_json(std::ostream& os, const VoronoiDiagram& diagram) {
  nlohmann::json doc;
  auto& pts = doc["points"] = nlohmann::json::array();
  for (const auto& p : diagram.points()) pts.push_back({p.x, p.y});
  auto& cells = doc["cells"] = nlohmann::json::array();
  for (const auto& c : diagram.cells()) {
    nlohmann::json loop = nlohmann::json::array();
    for (const auto& v : c.vertices) loop.push_back({v.x, v.y});
    cells.push_back(std::move(loop));
  }
  auto& facets = doc["facets"] = nlohmann::json::array();
  for (const auto& f : diagram.facets()) facets.push_back({f.i, f.j, f.length});
  os << doc.dump() << '\n';
}

void write_diagram_svg(std::ostream& os, const VoronoiDiagram& diagram, double size_px) {
  auto X = [&](double x) { return x * size_px; };
  auto Y = [&](double y) { return (1.0 - y) * size_px; };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
     << size_px << "\" viewBox=\"0 0 " << size_px << ' ' << size_px << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << size_px << "\" height=\"" << size_px
     << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& f : diagram.facets()) {
    os << "<line x1=\"" << X(f.a.x) << "\" y1=\"" << Y(f.a.y) << "\" x2=\"" << X(f.b.x)
       << "\" y2=\"" << Y(f.b.y) << "\" stroke=\"#555\" stroke-width=\"0.6\"/>\n";
  }
  for (const auto& p : diagram.points()) {
    os << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y) << "\" r=\"1.5\" fill=\"#1f4e9c\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace voronoigram
