#pragma once

// Graph TV denoising: minimize 1/2 ||y - theta||^2 + lambda ||D theta||_1 for
// the edge incidence operator D of a weighted graph.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "voronoigram/graph.hpp"

namespace voronoigram {

struct SolverOptions {
  /// Initial splitting parameter; <= 0 selects lambda * mean edge weight.
  double rho = 0.0;
  int max_iterations = 20000;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  /// Fusion tolerance for component extraction; <= 0 selects 1e-7 * range(y).
  double fuse_tol = 0.0;
  /// Attempt an exact active-set solve every `polish_every` iterations and
  /// accept it when its KKT residual is below kkt_tol * max(1, |y|_inf).
  bool polish = true;
  int polish_every = 20;
  double kkt_tol = 1e-10;
  /// Residual-converged ADMM iterates are accepted only with a KKT residual
  /// below kkt_accept * max(1, |y|_inf); otherwise iteration continues.
  double kkt_accept = 1e-7;
  /// Rebalance rho when one residual exceeds `balance_ratio` times the other.
  double balance_ratio = 10.0;
  /// Over-relaxation factor in [1, 2); 1 is plain ADMM.
  double relaxation = 1.6;
  int cg_max_iterations = 2000;
};

struct SolverDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double kkt_residual = 0.0;
  double objective = 0.0;
  double rho = 0.0;
  double fuse_tol = 0.0;
  bool converged = false;
  bool polished = false;
};

struct ComponentStats {
  std::size_t size = 0;
  double mean_y = 0.0;     ///< average response over the component
  double shrinkage = 0.0;  ///< average of lambda * (D_A^T s)_i over the component
};

struct TvFit {
  std::vector<double> theta;
  double lambda = 0.0;
  std::vector<std::int32_t> labels;  ///< fused component of each node
  std::size_t num_components = 0;    ///< K-hat
  std::vector<ComponentStats> component_stats;
  SolverDiagnostics diagnostics;
};

/// ADMM state carried between fits along a lambda path.
struct WarmStart {
  std::vector<double> theta;
  std::vector<double> z;
  std::vector<double> u;  ///< scaled dual
  double rho = 0.0;
  double lambda = 0.0;
};

/// Solves the TV denoising problem. lambda == 0 returns theta = y directly.
/// When residual targets are not met within max_iterations the best iterate
/// is returned with diagnostics.converged == false. If `warm` is non-null it
/// seeds the iteration and receives the final state.
TvFit tv_denoise(const WeightedGraph& graph, std::span<const double> y, double lambda,
                 const SolverOptions& opts = {}, WarmStart* warm = nullptr);

double tv_objective(const WeightedGraph& graph, std::span<const double> y, double lambda,
                    std::span<const double> theta);

double default_fuse_tol(std::span<const double> y);

struct Components {
  std::vector<std::int32_t> labels;
  std::size_t count = 0;
};

/// Connected components of the subgraph of edges with |theta_i - theta_j| <= tol.
Components extract_components(const WeightedGraph& graph, std::span<const double> theta,
                              double fuse_tol);

struct KktCertificate {
  double residual = 0.0;
  std::vector<double> dual;  ///< s in [-1, 1]^m, one entry per edge
};

/// Smallest ||theta - y + lambda D^T s||_inf found over duals with
/// s_l = sign((D theta)_l) on edges with |difference| > fuse_tol and
/// s_l in [-1, 1] on fused edges. Fused duals come from the minimum-norm flow
/// on each fused component; when clamping that flow to the box leaves a
/// residual, a capped max-flow over the fused edges is tried as well. A
/// `dual_hint` of length m (e.g. the solver's scaled dual) is also tried as a
/// starting point.
KktCertificate kkt_certificate(const WeightedGraph& graph, std::span<const double> y,
                               double lambda, std::span<const double> theta, double fuse_tol,
                               std::span<const double> dual_hint = {});

double kkt_residual(const WeightedGraph& graph, std::span<const double> y, double lambda,
                    std::span<const double> theta, double fuse_tol,
                    std::span<const double> dual_hint = {});

/// Unbiased degrees-of-freedom estimate: the number of fused components.
inline std::size_t df_estimate(const TvFit& fit) { return fit.num_components; }

/// Max over nodes of |theta_i - (mean_y_k - shrinkage_k)| for the node's
/// component, with the shrinkage recomputed from active-edge signs.
double shrunken_average_check(const TvFit& fit, const WeightedGraph& graph,
                              std::span<const double> y, double lambda);

/// {lambda, theta[], labels[], K, kkt_residual, iterations, ...}
void write_fit_json(std::ostream& os, const TvFit& fit);

}  // namespace voronoigram
