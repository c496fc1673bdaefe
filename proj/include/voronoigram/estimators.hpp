#pragma once

// Regression estimators: the Voronoigram, epsilon/kNN graph TV denoising with
// 1NN extrapolation, and Haar wavelet hard thresholding.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "voronoigram/geometry.hpp"
#include "voronoigram/graph.hpp"
#include "voronoigram/kdtree.hpp"
#include "voronoigram/sampling.hpp"
#include "voronoigram/solver.hpp"

namespace voronoigram {

struct RegressionDataset {
  std::vector<Point2> points;
  std::vector<double> y;
  double sigma = std::numeric_limits<double>::quiet_NaN();  ///< NaN when unknown
  std::function<double(const Point2&)> truth;               ///< empty when unknown

  /// Throws ShapeMismatch / DegenerateInput.
  void validate() const;
};

/// Draws a design from `model`, responses f0(x) + N(0, sigma^2) with
/// sigma = noise_sigma(model, snr), all from `seed`.
RegressionDataset simulate_dataset(SamplingModel model, std::size_t n, double snr,
                                   std::uint64_t seed);

/// Values attached to design points, extended to the plane by nearest-point
/// lookup (ties to the lowest index).
class PiecewiseConstantFn {
 public:
  PiecewiseConstantFn() = default;
  PiecewiseConstantFn(std::vector<Point2> points, std::vector<double> values);

  double operator()(const Point2& x) const { return evaluate(x); }
  double evaluate(const Point2& x) const;
  std::int32_t owner(const Point2& x) const { return tree_.nearest(x); }

  std::span<const Point2> points() const { return tree_.points(); }
  std::span<const double> values() const { return values_; }

 private:
  KdTree tree_;
  std::vector<double> values_;
};

struct EstimatorFit {
  TvFit fit;
  PiecewiseConstantFn fn;
};

using GeometricGraph = std::variant<Epsilon, Knn>;

/// TV denoising on the Voronoi adjacency graph with the chosen weights.
/// The graph (and diagram) can be supplied to reuse across a lambda path.
EstimatorFit fit_voronoigram(const RegressionDataset& data, double lambda,
                             const VoronoiWeights& scheme, const SolverOptions& opts = {});

/// TV denoising on an epsilon or kNN graph followed by 1NN extrapolation.
EstimatorFit fit_graph_tvd(const RegressionDataset& data, const GeometricGraph& kind,
                           double lambda, const SolverOptions& opts = {});

/// Fit on an already-built graph over data.points.
EstimatorFit fit_on_graph(const RegressionDataset& data, const WeightedGraph& graph,
                          double lambda, const SolverOptions& opts = {},
                          WarmStart* warm = nullptr);

WeightedGraph build_graph(std::span<const Point2> points, const WeightScheme& scheme,
                          const VoronoiDiagram* diagram = nullptr);

/// Connected regions of the 1NN extrapolant: components of the Voronoi
/// adjacency graph after dropping facets whose two values differ by more than
/// `tol`.
std::size_t extrapolant_region_count(const VoronoiDiagram& diagram, std::span<const double> values,
                                     double tol);

/// Continuum TV of the piecewise-constant extension over Voronoi cells:
/// sum over facets of length * |v_i - v_j|.
double extrapolant_tv(const VoronoiDiagram& diagram, std::span<const double> values);

/// Theory-driven lambda:
///   ClippedVoronoi: c sigma n^{(d-1)/d} (log n)^{1/2 + alpha}
///   UnitVoronoi:    c sigma (log n)^{1/2 + alpha}
///   Epsilon / Knn:  c sigma (log n)^{1/2 - alpha}
/// Throws BadConfig for ExactVoronoi, n < 2 or alpha <= 1.
double lambda_theory(const WeightScheme& scheme, std::size_t n, double sigma, double alpha,
                     double c, int d = 2);

// ---------------------------------------------------------------------------
// Haar wavelets on (0,1)^d.

/// psi(u) = 1 on (0, 1/2], -1 on (1/2, 1), 0 elsewhere.
double haar_psi(double u);

/// Psi^i_{lk}(x) = 2^{ld/2} prod_m psi^{i_m}(2^l x_m - k_m) with psi^0 the
/// indicator of (0,1). `mask` bit m selects psi for coordinate m.
double haar_basis(int level, std::span<const std::int64_t> k, std::uint32_t mask,
                  std::span<const double> x);

struct WaveletCoefficient {
  int level = 0;
  std::vector<std::int64_t> k;
  std::uint32_t mask = 0;
  double value = 0.0;
};

class WaveletFit {
 public:
  int dimension() const { return d_; }
  double ybar() const { return ybar_; }
  double threshold() const { return threshold_; }
  int max_level() const { return max_level_; }
  std::size_t num_coefficients() const;
  /// Stored coefficients ordered by (level, cell, mask).
  std::vector<WaveletCoefficient> coefficients() const;

  double evaluate(std::span<const double> x) const;
  double evaluate(const Point2& p) const;

 private:
  friend WaveletFit fit_wavelet(std::span<const double>, std::span<const double>, int, double,
                                int);
  int d_ = 2;
  double ybar_ = 0.0;
  double threshold_ = 0.0;
  int max_level_ = 0;
  // Per level: (flat cell index << d | mask) -> value.
  std::vector<std::unordered_map<std::uint64_t, double>> levels_;
};

/// floor(log2(n) / d), computed exactly on integers.
int wavelet_max_level(std::size_t n, int d);
/// 8 n^{-1/2} ln^{3/2}(2n/delta).
double wavelet_threshold(std::size_t n, double delta);

/// Hard thresholding: keeps empirical coefficients with |value| >= threshold
/// at levels 0..max_level. `coords` is row-major n x d.
WaveletFit fit_wavelet(std::span<const double> coords, std::span<const double> y, int d,
                       double threshold, int max_level);
WaveletFit fit_wavelet(const RegressionDataset& data, double delta);
WaveletFit fit_wavelet(const RegressionDataset& data, double threshold, int max_level);

/// Population coefficient of the ball indicator against Psi^i_{lk} in 2D,
/// by adaptive quadrature of disc/rectangle overlaps.
double ball_haar_coefficient(const asymptotics::BallIndicator& ball, int level, std::int64_t kx,
                             std::int64_t ky, std::uint32_t mask);

// ---------------------------------------------------------------------------
// Risk.

/// Mean of (theta_i - truth_i)^2.
double l2_pn_error(std::span<const double> theta, std::span<const double> truth);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

inline constexpr std::size_t kDefaultMcSamples = 100000;
inline constexpr std::uint64_t kDefaultMcSeed = 20210501;

/// E_P (fhat - f0)^2 by Monte Carlo over draws from `model`. Samples are
/// generated in fixed blocks with their own streams, so the estimate does not
/// depend on the thread count.
MonteCarloEstimate l2_p_error(const std::function<double(const Point2&)>& fhat,
                              const std::function<double(const Point2&)>& truth,
                              SamplingModel model, std::size_t samples = kDefaultMcSamples,
                              std::uint64_t seed = kDefaultMcSeed);

// ---------------------------------------------------------------------------
// Export.

/// {"points": [[x,y],...], "values": [...], "labels": [...]}
void write_function_json(std::ostream& os, const PiecewiseConstantFn& fn,
                         std::span<const std::int32_t> labels = {});

struct RenderSummary {
  std::size_t regions = 0;     ///< connected constant regions of the extrapolant
  std::size_t components = 0;  ///< K-hat of the fit
};

/// Voronoi cells filled by value on a blue-white-red scale, with facets
/// between differing regions stroked, and a caption comparing region count
/// with K-hat.
RenderSummary render_fit_svg(std::ostream& os, const VoronoiDiagram& diagram, const TvFit& fit,
                             double size_px = 800);

}  // namespace voronoigram
