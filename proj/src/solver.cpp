#include "voronoigram/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "voronoigram/errors.hpp"
#include "voronoigram/union_find.hpp"

namespace voronoigram {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Weighted Laplacian D^T D (entries w^2) over a subset of edges, in CSR form.
struct Laplacian {
  std::size_t n = 0;
  std::vector<std::size_t> start;
  std::vector<std::int32_t> col;
  std::vector<double> w2;
  std::vector<double> degree;

  Laplacian(const WeightedGraph& g, const std::vector<char>* keep = nullptr) : n(g.num_nodes()) {
    const auto edges = g.edges();
    std::vector<std::size_t> count(n + 1, 0);
    for (std::size_t l = 0; l < edges.size(); ++l) {
      if (keep && !(*keep)[l]) continue;
      ++count[edges[l].i + 1];
      ++count[edges[l].j + 1];
    }
    start.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + count[i + 1];
    col.resize(start[n]);
    w2.resize(start[n]);
    degree.assign(n, 0.0);
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t l = 0; l < edges.size(); ++l) {
      if (keep && !(*keep)[l]) continue;
      const auto& e = edges[l];
      const double ww = e.w * e.w;
      col[fill[e.i]] = e.j;
      w2[fill[e.i]++] = ww;
      col[fill[e.j]] = e.i;
      w2[fill[e.j]++] = ww;
      degree[e.i] += ww;
      degree[e.j] += ww;
    }
  }

  // out = alpha x + beta L x
  void apply(double alpha, double beta, std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = degree[i] * x[i];
      for (std::size_t k = start[i]; k < start[i + 1]; ++k) acc -= w2[k] * x[col[k]];
      out[i] = alpha * x[i] + beta * acc;
    }
  }
};

struct CgWork {
  std::vector<double> r, z, p, q;
  void resize(std::size_t n) {
    r.resize(n);
    z.resize(n);
    p.resize(n);
    q.resize(n);
  }
};

// Jacobi-preconditioned CG for (alpha I + beta L) x = b, warm-started from x.
int conjugate_gradient(const Laplacian& L, double alpha, double beta, std::span<const double> b,
                       std::span<double> x, double rel_tol, int max_iter, CgWork& w) {
  const std::size_t n = L.n;
  w.resize(n);
  L.apply(alpha, beta, x, w.q);
  for (std::size_t i = 0; i < n; ++i) w.r[i] = b[i] - w.q[i];
  const double bnorm = std::max(norm2(b), 1e-300);
  double rnorm = norm2(w.r);
  if (rnorm <= rel_tol * bnorm) return 0;
  auto precond = [&](std::size_t i) {
    const double d = alpha + beta * L.degree[i];
    return d > 0.0 ? 1.0 / d : 1.0;
  };
  for (std::size_t i = 0; i < n; ++i) w.z[i] = precond(i) * w.r[i];
  w.p = w.z;
  double rz = dot(w.r, w.z);
  int it = 0;
  while (it < max_iter) {
    ++it;
    L.apply(alpha, beta, w.p, w.q);
    const double pq = dot(w.p, w.q);
    if (!(pq > 0.0)) break;
    const double step = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * w.p[i];
      w.r[i] -= step * w.q[i];
    }
    rnorm = norm2(w.r);
    if (rnorm <= rel_tol * bnorm) break;
    for (std::size_t i = 0; i < n; ++i) w.z[i] = precond(i) * w.r[i];
    const double rz_next = dot(w.r, w.z);
    const double beta_cg = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) w.p[i] = w.z[i] + beta_cg * w.p[i];
  }
  return it;
}

// Dinic max-flow on real capacities, used to find a feasible fused-edge flow.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), next_(nodes) {}

  // Arc u->v with capacity cap_uv paired with v->u of capacity cap_vu.
  std::size_t add(std::int32_t u, std::int32_t v, double cap_uv, double cap_vu) {
    adj_[u].push_back({v, static_cast<std::int32_t>(adj_[v].size()), cap_uv});
    adj_[v].push_back({u, static_cast<std::int32_t>(adj_[u].size() - 1), cap_vu});
    return adj_[u].size() - 1;
  }

  double residual(std::int32_t u, std::size_t arc) const { return adj_[u][arc].cap; }

  double run(std::int32_t source, std::int32_t sink, double eps, int max_phases) {
    double total = 0.0;
    for (int phase = 0; phase < max_phases && bfs(source, sink, eps); ++phase) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double pushed = dfs(source, sink, std::numeric_limits<double>::infinity(), eps);
        if (pushed <= eps) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  struct Arc {
    std::int32_t to;
    std::int32_t rev;
    double cap;
  };

  bool bfs(std::int32_t source, std::int32_t sink, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::int32_t> queue{source};
    level_[source] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::int32_t u = queue[h];
      for (const Arc& a : adj_[u]) {
        if (a.cap > eps && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double dfs(std::int32_t u, std::int32_t sink, double limit, double eps) {
    if (u == sink) return limit;
    for (std::size_t& k = next_[u]; k < adj_[u].size(); ++k) {
      Arc& a = adj_[u][k];
      if (a.cap <= eps || level_[a.to] != level_[u] + 1) continue;
      const double got = dfs(a.to, sink, std::min(limit, a.cap), eps);
      if (got > eps) {
        a.cap -= got;
        adj_[a.to][a.rev].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<std::int32_t> level_;
  std::vector<std::size_t> next_;
};

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Exact minimizer on a fixed fused partition with fixed signs across the cut.
std::vector<double> active_set_solve(const WeightedGraph& graph, std::span<const double> y,
                                     double lambda, std::span<const double> edge_dir,
                                     const std::vector<char>& fused) {
  const std::size_t n = graph.num_nodes();
  const auto edges = graph.edges();
  UnionFind uf(n);
  for (std::size_t l = 0; l < edges.size(); ++l)
    if (fused[l]) uf.unite(edges[l].i, edges[l].j);
  const auto labels = uf.labels();
  std::vector<double> sum(uf.count(), 0.0);
  std::vector<double> size(uf.count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[labels[i]] += y[i];
    size[labels[i]] += 1.0;
  }
  for (std::size_t l = 0; l < edges.size(); ++l) {
    if (fused[l]) continue;
    const double s = static_cast<double>(sign(edge_dir[l]));
    sum[labels[edges[l].i]] -= lambda * edges[l].w * s;
    sum[labels[edges[l].j]] += lambda * edges[l].w * s;
  }
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = sum[labels[i]] / size[labels[i]];
  return theta;
}

void fill_components(TvFit& fit, const WeightedGraph& graph, std::span<const double> y,
                     double fuse_tol) {
  const auto comps = extract_components(graph, fit.theta, fuse_tol);
  fit.labels = comps.labels;
  fit.num_components = comps.count;
  fit.component_stats.assign(comps.count, {});
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& st = fit.component_stats[comps.labels[i]];
    ++st.size;
    st.mean_y += y[i];
  }
  std::vector<double> shrink(comps.count, 0.0);
  for (const auto& e : graph.edges()) {
    if (comps.labels[e.i] == comps.labels[e.j]) continue;
    const double s = static_cast<double>(sign(fit.theta[e.i] - fit.theta[e.j]));
    shrink[comps.labels[e.i]] += fit.lambda * e.w * s;
    shrink[comps.labels[e.j]] -= fit.lambda * e.w * s;
  }
  for (std::size_t k = 0; k < comps.count; ++k) {
    auto& st = fit.component_stats[k];
    st.mean_y /= static_cast<double>(st.size);
    st.shrinkage = shrink[k] / static_cast<double>(st.size);
  }
}

}  // namespace

double default_fuse_tol(std::span<const double> y) {
  if (y.empty()) return 1e-7;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  return range > 0.0 ? 1e-7 * range : 1e-7;
}

double tv_objective(const WeightedGraph& graph, std::span<const double> y, double lambda,
                    std::span<const double> theta) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) loss += 0.5 * (y[i] - theta[i]) * (y[i] - theta[i]);
  return loss + lambda * discrete_tv(graph, theta);
}

Components extract_components(const WeightedGraph& graph, std::span<const double> theta,
                              double fuse_tol) {
  if (theta.size() != graph.num_nodes()) throw ShapeMismatch("extract_components: size mismatch");
  UnionFind uf(graph.num_nodes());
  for (const auto& e : graph.edges()) {
    if (std::abs(theta[e.i] - theta[e.j]) <= fuse_tol) uf.unite(e.i, e.j);
  }
  Components out;
  out.count = uf.count();
  out.labels = uf.labels();
  return out;
}

KktCertificate kkt_certificate(const WeightedGraph& graph, std::span<const double> y,
                               double lambda, std::span<const double> theta, double fuse_tol,
                               std::span<const double> dual_hint) {
  const std::size_t n = graph.num_nodes();
  if (y.size() != n || theta.size() != n) throw ShapeMismatch("kkt: size mismatch");
  const auto edges = graph.edges();
  const std::size_t m = edges.size();

  KktCertificate cert;
  cert.dual.assign(m, 0.0);
  std::vector<char> fused(m, 0);
  // r = y - theta - lambda D_A^T s_A must be produced by fused-edge flows.
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - theta[i];
  bool any_fused = false;
  for (std::size_t l = 0; l < m; ++l) {
    const auto& e = edges[l];
    const double diff = theta[e.i] - theta[e.j];
    if (std::abs(diff) <= fuse_tol) {
      fused[l] = 1;
      any_fused = true;
      continue;
    }
    const double s = static_cast<double>(sign(diff));
    cert.dual[l] = s;
    r[e.i] -= lambda * e.w * s;
    r[e.j] += lambda * e.w * s;
  }
  if (lambda <= 0.0 || !any_fused) {
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    cert.residual = worst;
    return cert;
  }

  const Laplacian lap(graph, &fused);
  UnionFind uf(n);
  for (std::size_t l = 0; l < m; ++l)
    if (fused[l]) uf.unite(edges[l].i, edges[l].j);
  const auto labels = uf.labels();
  // Target b: r / lambda with each component's mean removed (flows cannot
  // change a component's total).
  std::vector<double> b(n), mean(uf.count(), 0.0), count(uf.count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mean[labels[i]] += r[i] / lambda;
    count[labels[i]] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) b[i] = r[i] / lambda - mean[labels[i]] / count[labels[i]];

  // Residual of a fused-edge dual after clipping it into the box.
  std::vector<double> res(n);
  auto residual_of = [&](std::vector<double>& s_f) {
    res = r;
    for (std::size_t l = 0; l < m; ++l) {
      if (!fused[l]) continue;
      s_f[l] = std::clamp(s_f[l], -1.0, 1.0);
      res[edges[l].i] -= lambda * edges[l].w * s_f[l];
      res[edges[l].j] += lambda * edges[l].w * s_f[l];
    }
    double worst = 0.0;
    for (double v : res) worst = std::max(worst, std::abs(v));
    return worst;
  };
  cert.residual = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<double> s_f) {
    const double value = residual_of(s_f);
    if (value < cert.residual) {
      cert.residual = value;
      for (std::size_t l = 0; l < m; ++l)
        if (fused[l]) cert.dual[l] = s_f[l];
    }
  };

  // Start from the hint (or zero) and add the least-squares flow correction.
  std::vector<double> s_f(m, 0.0);
  std::vector<double> deficit = b;
  if (dual_hint.size() == m) {
    for (std::size_t l = 0; l < m; ++l) {
      if (!fused[l]) continue;
      s_f[l] = std::clamp(dual_hint[l], -1.0, 1.0);
      deficit[edges[l].i] -= edges[l].w * s_f[l];
      deficit[edges[l].j] += edges[l].w * s_f[l];
    }
    consider(s_f);
  }
  CgWork work;
  const int cg_iters = static_cast<int>(std::min<std::size_t>(20 * n + 100, 200000));
  std::vector<double> phi(n, 0.0);
  conjugate_gradient(lap, 0.0, 1.0, deficit, phi, 1e-14, cg_iters, work);
  for (std::size_t l = 0; l < m; ++l)
    if (fused[l]) s_f[l] += edges[l].w * (phi[edges[l].i] - phi[edges[l].j]);

  auto max_violation = [&](const std::vector<double>& s) {
    double v = 0.0;
    for (std::size_t l = 0; l < m; ++l)
      if (fused[l]) v = std::max(v, std::abs(s[l]) - 1.0);
    return v;
  };
  consider(s_f);
  if (max_violation(s_f) > 0.0 && cert.residual > 0.0) {
    // The least-squares flow leaves the box: look for any feasible flow
    // f = w s with |f| <= w by max-flow from surplus to deficit nodes.
    const auto source = static_cast<std::int32_t>(n);
    const auto sink = static_cast<std::int32_t>(n + 1);
    MaxFlow flow(n + 2);
    std::vector<std::size_t> arc(m, 0);
    double supply = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(b[i]));
    for (std::size_t l = 0; l < m; ++l) {
      if (fused[l]) arc[l] = flow.add(edges[l].i, edges[l].j, edges[l].w, edges[l].w);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (b[i] > 0.0) {
        flow.add(source, static_cast<std::int32_t>(i), b[i], 0.0);
        supply += b[i];
      } else if (b[i] < 0.0) {
        flow.add(static_cast<std::int32_t>(i), sink, -b[i], 0.0);
      }
    }
    const int phases = 100 + static_cast<int>(4.0 * std::sqrt(static_cast<double>(n)));
    flow.run(source, sink, 1e-15 * std::max(scale, 1e-300), phases);
    std::vector<double> s(m, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      if (fused[l]) s[l] = (edges[l].w - flow.residual(edges[l].i, arc[l])) / edges[l].w;
    }
    consider(s);
  }
  return cert;
}

double kkt_residual(const WeightedGraph& graph, std::span<const double> y, double lambda,
                    std::span<const double> theta, double fuse_tol,
                    std::span<const double> dual_hint) {
  return kkt_certificate(graph, y, lambda, theta, fuse_tol, dual_hint).residual;
}

TvFit tv_denoise(const WeightedGraph& graph, std::span<const double> y, double lambda,
                 const SolverOptions& opts, WarmStart* warm) {
  const std::size_t n = graph.num_nodes();
  if (y.size() != n) throw ShapeMismatch("tv_denoise: y has wrong length");
  if (!(lambda >= 0.0)) throw BadConfig("tv_denoise: lambda must be >= 0");
  const double fuse_tol = opts.fuse_tol > 0.0 ? opts.fuse_tol : default_fuse_tol(y);

  TvFit fit;
  fit.lambda = lambda;
  fit.diagnostics.fuse_tol = fuse_tol;
  const auto edges = graph.edges();
  const std::size_t m = edges.size();

  if (lambda == 0.0 || m == 0) {
    fit.theta.assign(y.begin(), y.end());
    fit.diagnostics.converged = true;
    fill_components(fit, graph, y, fuse_tol);
    fit.diagnostics.kkt_residual = kkt_residual(graph, y, lambda, fit.theta, fuse_tol);
    fit.diagnostics.objective = tv_objective(graph, y, lambda, fit.theta);
    return fit;
  }

  const IncidenceOperator D(graph);
  const Laplacian lap(graph);
  double y_inf = 0.0;
  for (double v : y) y_inf = std::max(y_inf, std::abs(v));
  const double kkt_target = opts.kkt_tol * std::max(1.0, y_inf);

  double rho = opts.rho > 0.0 ? opts.rho : lambda * graph.mean_weight();
  std::vector<double> theta(y.begin(), y.end());
  std::vector<double> z(m), u(m, 0.0);
  if (warm && warm->theta.size() == n && warm->z.size() == m && warm->u.size() == m &&
      warm->rho > 0.0) {
    theta = warm->theta;
    z = warm->z;
    rho = warm->rho;
    u = warm->u;
    // rho * u estimates lambda * s; keep s when lambda changes.
    if (warm->lambda > 0.0) {
      for (double& v : u) v *= lambda / warm->lambda;
    }
  } else {
    D.apply(theta, z);
  }

  std::vector<double> rhs(n), dtheta(m), z_old(m), diffz(m), tmp_n(n), hint(m);
  CgWork work;
  double primal = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();
  double eps_pri = 0.0, eps_dual = 0.0;
  bool done = false;
  int it = 0;
  int polish_gap = std::max(1, opts.polish_every);
  int next_polish = polish_gap;
  int certify_gap = 10;
  int next_certify = 0;
  auto try_polish = [&]() -> bool {
    std::vector<char> fused(m, 0);
    for (std::size_t l = 0; l < m; ++l) {
      fused[l] = z[l] == 0.0 || std::abs(theta[edges[l].i] - theta[edges[l].j]) <= fuse_tol;
    }
    auto candidate = active_set_solve(graph, y, lambda, z, fused);
    for (std::size_t l = 0; l < m; ++l) {
      const double diff = candidate[edges[l].i] - candidate[edges[l].j];
      if (fused[l] ? std::abs(diff) > fuse_tol : (diff * z[l] <= 0.0 || std::abs(diff) <= fuse_tol))
        return false;
    }
    for (std::size_t l = 0; l < m; ++l) hint[l] = rho * u[l] / lambda;
    const double kkt = kkt_residual(graph, y, lambda, candidate, fuse_tol, hint);
    if (kkt <= kkt_target) {
      theta = std::move(candidate);
      fit.diagnostics.polished = true;
      fit.diagnostics.kkt_residual = kkt;
      return true;
    }
    return false;
  };

  for (it = 1; it <= opts.max_iterations; ++it) {
    // theta-update: (I + rho D^T D) theta = y + rho D^T (z - u)
    for (std::size_t l = 0; l < m; ++l) diffz[l] = z[l] - u[l];
    D.apply_transpose(diffz, tmp_n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i] + rho * tmp_n[i];
    // Inexact inner solves: tighten with the outer residuals, but never past
    // what the stopping test can resolve.
    const double cg_tol =
        std::isfinite(primal)
            ? std::clamp(1e-2 * std::min(std::max(primal, eps_pri), std::max(dual, eps_dual)),
                         1e-15, 1e-4)
            : 1e-4;
    conjugate_gradient(lap, 1.0, rho, rhs, theta, cg_tol, opts.cg_max_iterations, work);

    D.apply(theta, dtheta);
    z_old = z;
    const double thresh = lambda / rho;
    const double a = opts.relaxation;
    for (std::size_t l = 0; l < m; ++l) {
      const double relaxed = a * dtheta[l] + (1.0 - a) * z_old[l];
      z[l] = soft_threshold(relaxed + u[l], thresh);
      u[l] += relaxed - z[l];
    }

    double r2 = 0.0;
    for (std::size_t l = 0; l < m; ++l) r2 += (dtheta[l] - z[l]) * (dtheta[l] - z[l]);
    primal = std::sqrt(r2);
    for (std::size_t l = 0; l < m; ++l) diffz[l] = z[l] - z_old[l];
    D.apply_transpose(diffz, tmp_n);
    dual = rho * norm2(tmp_n);

    eps_pri = std::sqrt(static_cast<double>(m)) * opts.abs_tol +
                           opts.rel_tol * std::max(norm2(dtheta), norm2(z));
    D.apply_transpose(u, tmp_n);
    eps_dual = std::sqrt(static_cast<double>(n)) * opts.abs_tol +
                            opts.rel_tol * rho * norm2(tmp_n);
    const bool admm_converged = primal <= eps_pri && dual <= eps_dual && it >= next_certify;

    if (opts.polish && (admm_converged || it >= next_polish)) {
      if (try_polish()) {
        done = true;
        break;
      }
      // Failed attempts are expensive on large fused sets; back off.
      polish_gap = std::min(2 * polish_gap, 4 * opts.polish_every);
      next_polish = it + polish_gap;
    }
    if (admm_converged) {
      // Small residuals do not pin down the fused pattern; certify first.
      for (std::size_t l = 0; l < m; ++l) hint[l] = rho * u[l] / lambda;
      const double kkt = kkt_residual(graph, y, lambda, theta, fuse_tol, hint);
      if (kkt <= opts.kkt_accept * std::max(1.0, y_inf)) {
        fit.diagnostics.kkt_residual = kkt;
        done = true;
        break;
      }
      next_certify = it + certify_gap;
      certify_gap = std::min(2 * certify_gap, 160);
    }
    if (it % 10 == 0) {
      if (primal > opts.balance_ratio * dual) {
        rho *= 2.0;
        for (double& v : u) v *= 0.5;
      } else if (dual > opts.balance_ratio * primal) {
        rho *= 0.5;
        for (double& v : u) v *= 2.0;
      }
    }
  }

  fit.theta = std::move(theta);
  fit.diagnostics.iterations = std::min(it, opts.max_iterations);
  fit.diagnostics.primal_residual = primal;
  fit.diagnostics.dual_residual = dual;
  fit.diagnostics.rho = rho;
  fit.diagnostics.converged = done;
  if (!done) {
    for (std::size_t l = 0; l < m; ++l) hint[l] = rho * u[l] / lambda;
    fit.diagnostics.kkt_residual = kkt_residual(graph, y, lambda, fit.theta, fuse_tol, hint);
  }
  fit.diagnostics.objective = tv_objective(graph, y, lambda, fit.theta);
  fill_components(fit, graph, y, fuse_tol);
  if (warm) {
    warm->theta = fit.theta;
    warm->z = std::move(z);
    warm->u = std::move(u);
    warm->rho = rho;
    warm->lambda = lambda;
  }
  return fit;
}

double shrunken_average_check(const TvFit& fit, const WeightedGraph& graph,
                              std::span<const double> y, double lambda) {
  const std::size_t n = graph.num_nodes();
  if (fit.theta.size() != n || y.size() != n) throw ShapeMismatch("shrunken_average_check");
  const auto cert = kkt_certificate(graph, y, lambda, fit.theta, fit.diagnostics.fuse_tol);
  const std::size_t K = fit.num_components;
  std::vector<double> mean_y(K, 0.0), shrink(K, 0.0), size(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mean_y[fit.labels[i]] += y[i];
    size[fit.labels[i]] += 1.0;
  }
  const auto edges = graph.edges();
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const auto& e = edges[l];
    if (fit.labels[e.i] == fit.labels[e.j]) continue;  // fused: cancels within a component
    shrink[fit.labels[e.i]] += lambda * e.w * cert.dual[l];
    shrink[fit.labels[e.j]] -= lambda * e.w * cert.dual[l];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = fit.labels[i];
    const double predicted = mean_y[k] / size[k] - shrink[k] / size[k];
    worst = std::max(worst, std::abs(fit.theta[i] - predicted));
  }
  return worst;
}

void write_fit_json(std::ostream& os, const TvFit& fit) {
  nlohmann::json doc;
  doc["lambda"] = fit.lambda;
  doc["theta"] = fit.theta;
  doc["labels"] = fit.labels;
  doc["K"] = fit.num_components;
  doc["kkt_residual"] = fit.diagnostics.kkt_residual;
  doc["iterations"] = fit.diagnostics.iterations;
  doc["converged"] = fit.diagnostics.converged;
  doc["polished"] = fit.diagnostics.polished;
  doc["objective"] = fit.diagnostics.objective;
  doc["fuse_tol"] = fit.diagnostics.fuse_tol;
  os << doc.dump(1) << '\n';
}

}  // namespace voronoigram
