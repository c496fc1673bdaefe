#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "voronoigram/errors.hpp"
#include "voronoigram/geometry.hpp"

namespace voronoigram {
namespace {

using predicates::incircle_perturbed;
using predicates::orient2d;

constexpr std::int32_t kGhost = -1;

// Position along a 2^16 x 2^16 Hilbert curve.
std::uint64_t hilbert_index(double x, double y) {
  constexpr std::uint32_t side = 1u << 16;
  auto clamp_cell = [](double v) {
    const double s = std::floor(v * side);
    return static_cast<std::uint32_t>(std::clamp(s, 0.0, static_cast<double>(side - 1)));
  };
  std::uint32_t hx = clamp_cell(x);
  std::uint32_t hy = clamp_cell(y);
  std::uint64_t d = 0;
  for (std::uint32_t s = side / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (hx & s) ? 1 : 0;
    const std::uint32_t ry = (hy & s) ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        hx = side - 1 - hx;
        hy = side - 1 - hy;
      }
      std::swap(hx, hy);
    }
  }
  return d;
}

struct Tri {
  std::array<std::int32_t, 3> v;
  std::array<std::int32_t, 3> nb;
  bool alive = true;
};

class Builder {
 public:
  explicit Builder(std::span<const Point2> pts) : pts_(pts) {}

  Triangulation run();

 private:
  bool is_ghost(const Tri& t) const { return t.v[0] < 0 || t.v[1] < 0 || t.v[2] < 0; }
  bool in_conflict(const Tri& t, std::int32_t p) const;
  std::int32_t locate(std::int32_t p);
  void insert(std::int32_t p);
  std::int32_t new_tri(std::int32_t a, std::int32_t b, std::int32_t c);
  static int edge_index(const Tri& t, std::int32_t u, std::int32_t w);

  std::span<const Point2> pts_;
  std::vector<Tri> tris_;
  std::vector<std::int32_t> free_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::int32_t last_ = 0;
  std::uint32_t walk_counter_ = 0;

  // scratch for insert()
  std::vector<std::int32_t> cavity_;
  std::vector<std::int32_t> stack_;
  struct BoundaryEdge {
    std::int32_t u, w, outside, old;
  };
  std::vector<BoundaryEdge> boundary_;
};

bool Builder::in_conflict(const Tri& t, std::int32_t p) const {
  const Point2& q = pts_[p];
  for (int k = 0; k < 3; ++k) {
    if (t.v[k] != kGhost) continue;
    const Point2& a = pts_[t.v[(k + 1) % 3]];
    const Point2& b = pts_[t.v[(k + 2) % 3]];
    const int o = orient2d(a, b, q);
    if (o > 0) return true;
    if (o < 0) return false;
    // Collinear with the hull edge: conflict only strictly inside the segment.
    if (a.x != b.x) return std::min(a.x, b.x) < q.x && q.x < std::max(a.x, b.x);
    return std::min(a.y, b.y) < q.y && q.y < std::max(a.y, b.y);
  }
  return incircle_perturbed(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], q, t.v[0], t.v[1], t.v[2],
                            p) > 0;
}

std::int32_t Builder::new_tri(std::int32_t a, std::int32_t b, std::int32_t c) {
  Tri t{{a, b, c}, {-1, -1, -1}, true};
  if (!free_.empty()) {
    const std::int32_t id = free_.back();
    free_.pop_back();
    tris_[id] = t;
    return id;
  }
  tris_.push_back(t);
  stamp_.push_back(0);
  return static_cast<std::int32_t>(tris_.size() - 1);
}

int Builder::edge_index(const Tri& t, std::int32_t u, std::int32_t w) {
  for (int k = 0; k < 3; ++k) {
    const std::int32_t a = t.v[(k + 1) % 3];
    const std::int32_t b = t.v[(k + 2) % 3];
    if ((a == u && b == w) || (a == w && b == u)) return k;
  }
  return -1;
}

std::int32_t Builder::locate(std::int32_t p) {
  const Point2& q = pts_[p];
  std::int32_t cur = last_;
  if (!tris_[cur].alive) {
    cur = 0;
    while (!tris_[cur].alive) ++cur;
  }
  if (is_ghost(tris_[cur])) {
    const Tri& g = tris_[cur];
    for (int k = 0; k < 3; ++k)
      if (g.v[k] == kGhost) cur = g.nb[k];
  }
  const std::size_t max_steps = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Tri& t = tris_[cur];
    if (is_ghost(t)) return cur;
    const int start = static_cast<int>(walk_counter_++ % 3);
    bool moved = false;
    for (int e = 0; e < 3; ++e) {
      const int k = (start + e) % 3;
      const Point2& a = pts_[t.v[(k + 1) % 3]];
      const Point2& b = pts_[t.v[(k + 2) % 3]];
      if (orient2d(a, b, q) < 0) {
        cur = t.nb[k];
        moved = true;
        break;
      }
    }
    if (!moved) return cur;
  }
  // Fallback: exhaustive search for any conflicting triangle.
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (tris_[t].alive && in_conflict(tris_[t], p)) return static_cast<std::int32_t>(t);
  }
  throw DegenerateInput("delaunay: point location failed");
}

void Builder::insert(std::int32_t p) {
  const std::int32_t start = locate(p);
  {
    const Tri& t = tris_[start];
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] != kGhost && pts_[t.v[k]] == pts_[p]) {
        throw DegenerateInput("delaunay: duplicate points " + std::to_string(t.v[k]) + " and " +
                              std::to_string(p));
      }
    }
  }
  if (!in_conflict(tris_[start], p)) throw DegenerateInput("delaunay: inconsistent location");

  ++epoch_;
  cavity_.clear();
  stack_.clear();
  boundary_.clear();
  stack_.push_back(start);
  stamp_[start] = epoch_;
  while (!stack_.empty()) {
    const std::int32_t t = stack_.back();
    stack_.pop_back();
    cavity_.push_back(t);
    for (int k = 0; k < 3; ++k) {
      const std::int32_t o = tris_[t].nb[k];
      const std::int32_t u = tris_[t].v[(k + 1) % 3];
      const std::int32_t w = tris_[t].v[(k + 2) % 3];
      if (stamp_[o] == epoch_) continue;
      if (in_conflict(tris_[o], p)) {
        stamp_[o] = epoch_;
        stack_.push_back(o);
      } else {
        boundary_.push_back({u, w, o, t});
      }
    }
  }
  // Boundary edges that touch an in-cavity triangle from both sides cannot
  // happen for a valid cavity; the stamp check above covers shared edges.
  for (const std::int32_t t : cavity_) {
    tris_[t].alive = false;
    free_.push_back(t);
  }

  // Link the fan of new triangles (u, w, p).
  std::vector<std::pair<std::int32_t, std::int32_t>> by_start;  // u -> new tri
  by_start.reserve(boundary_.size());
  std::vector<std::int32_t> created;
  created.reserve(boundary_.size());
  for (const auto& e : boundary_) {
    const std::int32_t id = new_tri(e.u, e.w, p);
    tris_[id].nb[2] = e.outside;
    Tri& out = tris_[e.outside];
    const int k = edge_index(out, e.u, e.w);
    out.nb[k] = id;
    by_start.emplace_back(e.u, id);
    created.push_back(id);
  }
  auto find_start = [&](std::int32_t v) {
    for (const auto& [s, id] : by_start)
      if (s == v) return id;
    return std::int32_t{-1};
  };
  for (std::size_t c = 0; c < created.size(); ++c) {
    Tri& t = tris_[created[c]];
    const std::int32_t u = t.v[0];
    const std::int32_t w = t.v[1];
    // Edge (w, p) opposite u is shared with the triangle starting at w;
    // edge (p, u) opposite w with the triangle that ends at u.
    const std::int32_t next = find_start(w);
    t.nb[0] = next;
    tris_[next].nb[1] = created[c];
    (void)u;
  }
  last_ = created.front();
  for (const std::int32_t id : created) {
    if (!is_ghost(tris_[id])) {
      last_ = id;
      break;
    }
  }
}

Triangulation Builder::run() {
  const std::int32_t n = static_cast<std::int32_t>(pts_.size());
  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  {
    std::vector<std::uint64_t> key(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) key[i] = hilbert_index(pts_[i].x, pts_[i].y);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int32_t a, std::int32_t b) { return key[a] < key[b]; });
  }

  const std::int32_t a = order[0];
  std::int32_t b = -1;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (!(pts_[order[k]] == pts_[a])) {
      b = order[k];
      break;
    }
  }
  std::int32_t c = -1;
  if (b >= 0) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const std::int32_t cand = order[k];
      if (cand == b) continue;
      if (orient2d(pts_[a], pts_[b], pts_[cand]) != 0) {
        c = cand;
        break;
      }
    }
  }
  if (c < 0) throw DegenerateInput("delaunay: all points are collinear");

  std::int32_t v0 = a, v1 = b, v2 = c;
  if (orient2d(pts_[v0], pts_[v1], pts_[v2]) < 0) std::swap(v1, v2);
  // Real triangle 0 and ghosts across each of its edges.
  const std::int32_t t0 = new_tri(v0, v1, v2);
  const std::int32_t g0 = new_tri(v2, v1, kGhost);  // across edge (v1,v2), opposite v0
  const std::int32_t g1 = new_tri(v0, v2, kGhost);  // across edge (v2,v0)
  const std::int32_t g2 = new_tri(v1, v0, kGhost);  // across edge (v0,v1)
  tris_[t0].nb = {g0, g1, g2};
  // Ghost (x, y, G): nb[2] is the real triangle; nb[0] across (y, G); nb[1] across (G, x).
  tris_[g0].nb = {g2, g1, t0};  // (v2,v1,G): across (v1,G) is g2=(v1,v0,G); across (G,v2) is g1
  tris_[g1].nb = {g0, g2, t0};  // (v0,v2,G): across (v2,G) is g0; across (G,v0) is g2
  tris_[g2].nb = {g1, g0, t0};  // (v1,v0,G): across (v0,G) is g1; across (G,v1) is g0
  last_ = t0;

  for (const std::int32_t p : order) {
    if (p == v0 || p == v1 || p == v2) continue;
    insert(p);
  }

  Triangulation out;
  out.vertices.assign(pts_.begin(), pts_.end());
  std::vector<std::int32_t> remap(tris_.size(), -1);
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (tris_[t].alive && !is_ghost(tris_[t])) {
      remap[t] = static_cast<std::int32_t>(out.triangles.size());
      out.triangles.push_back(tris_[t].v);
    }
  }
  out.adjacency.resize(out.triangles.size());
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (remap[t] < 0) continue;
    auto& adj = out.adjacency[static_cast<std::size_t>(remap[t])];
    for (int k = 0; k < 3; ++k) adj[k] = remap[tris_[t].nb[k]];
  }
  return out;
}

}  // namespace

std::size_t Triangulation::hull_size() const {
  std::size_t h = 0;
  for (const auto& adj : adjacency)
    for (const std::int32_t t : adj) h += (t < 0);
  return h;  // hull edges == hull vertices on a closed hull
}

std::vector<std::vector<std::int32_t>> Triangulation::vertex_neighbors() const {
  std::vector<std::vector<std::int32_t>> nbrs(vertices.size());
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      nbrs[t[k]].push_back(t[(k + 1) % 3]);
      nbrs[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbrs;
}

Triangulation delaunay(std::span<const Point2> points) {
  if (points.size() < 3) throw DegenerateInput("delaunay: need at least 3 points");
  Builder builder(points);
  return builder.run();
}

}  // namespace voronoigram
