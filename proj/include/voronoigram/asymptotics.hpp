#pragma once

// Limit constants for discrete TV over Voronoi, epsilon and kNN graphs.

#include <functional>
#include <variant>
#include <vector>

#include "voronoigram/quadrature.hpp"

namespace voronoigram::asymptotics {

/// eta_m = H^m(S^m) = 2 pi^{(m+1)/2} / Gamma((m+1)/2).
double unit_sphere_measure(int m);
/// omega_d = pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// K_Vor(t) = int_0^inf exp(-omega_d (t^2/4 + s^2)^{d/2}) s^{d-2} ds. The
/// s-range is cut where the integrand has dropped below 1e-22 of its value at
/// s = 0.
quad::Result voronoi_kernel(double t, int d);

/// c_d = eta_{d-2}^2/(d-1) int_0^inf int_0^inf t^d s^{d-2}
///       exp(-omega_d (t^2/4 + s^2)^{d/2}) ds dt, by nested quadrature.
quad::Result voronoi_constant(int d, double rel_tol = 1e-12);

/// sigma_K = 2 eta_{d-2}/(d-1) int_0^inf K(t) t^d dt.
/// Throws DivergentIntegral when the tail does not settle.
quad::Result sigma_k(const std::function<double(double)>& kernel, int d, double rel_tol = 1e-12);

/// c_d computed a second way: (eta_{d-2}/2) sigma_K with K = K_Vor.
quad::Result voronoi_constant_via_sigma(int d, double rel_tol = 1e-12);

struct LimitConstants {
  int d = 2;
  double eta_dm2 = 0.0;
  double leb_d = 0.0;
  double c_d = 0.0;
  double c_d_error = 0.0;
  double sigma_eps = 0.0;  ///< sigma_K / 2 for K = 1{t <= 1}
  double sigma_eps_error = 0.0;
};

/// Cached per dimension; safe to call concurrently.
const LimitConstants& limit_constants(int d);

// Descriptors for closed-form truth and densities.

struct BallIndicator {
  std::vector<double> center{0.5, 0.5};
  double radius = 0.25;
};

struct UniformDensity {};

/// p_in on the annulus r_in <= |x - center| <= r_out, constant elsewhere on
/// the unit square so that p integrates to 1. Two-dimensional.
struct AnnulusDensity {
  double cx = 0.5;
  double cy = 0.5;
  double r_in = 0.15;
  double r_out = 0.35;
  double p_in = 1.0;

  double area() const;
  double p_out() const;
  double operator()(double x, double y) const;
};

using DensityDescriptor = std::variant<UniformDensity, AnnulusDensity>;

enum class GraphKind { Voronoi, Epsilon, Knn };

struct Prediction {
  double value = 0.0;
  double error = 0.0;
  /// True when the constant is a heuristic rather than an established limit.
  bool heuristic = false;
};

/// Voronoi: c_d * perimeter(B) (for every density).
/// Epsilon: limit of DTV / (n^2 eps^{d+1}) = (sigma_1/2) * int_{dB} p^2.
/// Knn: limit of DTV / (n^2 (k/n)^{(d+1)/d}) approximated by
///   (sigma_1/2) omega_d^{-(d+1)/d} * int_{dB} p^{1-1/d}
/// which treats the kNN radius as (k / (n p omega_d))^{1/d}; flagged heuristic.
/// Throws UnsupportedDescriptor when the ball leaves the open unit cube, when
/// an annulus density is paired with d != 2, or when the ball boundary is not
/// a level set of the density (non-concentric ball, or radius equal to an
/// annulus radius).
Prediction limit_prediction(GraphKind kind, const BallIndicator& f0,
                            const DensityDescriptor& density, int d);

/// H^{d-1} of the boundary sphere of the ball.
double ball_perimeter(const BallIndicator& f0, int d);

}  // namespace voronoigram::asymptotics
