#include "voronoigram/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>

#include "voronoigram/errors.hpp"

namespace voronoigram::asymptotics {
namespace {

constexpr double kTruncLog = 50.66;  // ln(1e22)

void require_dimension(int d) {
  if (d < 2 || d > 16) throw BadConfig("dimension must be in [2, 16], got " + std::to_string(d));
}

}  // namespace

double unit_sphere_measure(int m) {
  if (m < 0) throw BadConfig("sphere dimension must be >= 0");
  const double a = 0.5 * (m + 1);
  return 2.0 * std::pow(std::numbers::pi, a) / std::tgamma(a);
}

double unit_ball_volume(int d) {
  if (d < 1) throw BadConfig("ball dimension must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

quad::Result voronoi_kernel(double t, int d) {
  require_dimension(d);
  if (!(t >= 0.0)) throw BadConfig("voronoi_kernel needs t >= 0");
  const double omega = unit_ball_volume(d);
  const double half_d = 0.5 * d;
  const double base = omega * std::pow(0.25 * t * t, half_d);
  // (a + b)^{d/2} >= a^{d/2} + b^{d/2}, so beyond s_max the integrand is
  // below exp(-kTruncLog) times its value at s = 0, up to the s^{d-2} factor.
  double s_max = 1.0;
  for (int it = 0; it < 20; ++it) {
    s_max = std::pow((kTruncLog + (d - 2) * std::log(std::max(s_max, 1.0))) / omega, 1.0 / d);
  }
  auto f = [&](double s) {
    const double r = omega * std::pow(0.25 * t * t + s * s, half_d);
    return std::exp(-(r - base)) * (d == 2 ? 1.0 : std::pow(s, d - 2));
  };
  auto res = quad::integrate(f, 0.0, s_max, 1e-13);
  const double scale = std::exp(-base);
  res.value *= scale;
  res.error *= scale;
  return res;
}

quad::Result voronoi_constant(int d, double rel_tol) {
  require_dimension(d);
  const double eta = unit_sphere_measure(d - 2);
  const double omega = unit_ball_volume(d);
  // t^d exp(-omega (t/2)^d) is below exp(-kTruncLog) past t_max.
  const double t_max = 2.0 * std::pow((kTruncLog + d * std::log(4.0 * d)) / omega, 1.0 / d);
  double inner_rel = 0.0;
  auto f = [&](double t) {
    const auto k = voronoi_kernel(t, d);
    if (k.value > 0.0) inner_rel = std::max(inner_rel, k.error / k.value);
    return std::pow(t, d) * k.value;
  };
  auto res = quad::integrate(f, 0.0, t_max, rel_tol);
  const double factor = eta * eta / (d - 1);
  res.error = factor * (res.error + inner_rel * std::abs(res.value));
  res.value *= factor;
  return res;
}

quad::Result sigma_k(const std::function<double(double)>& kernel, int d, double rel_tol) {
  require_dimension(d);
  const double factor = 2.0 * unit_sphere_measure(d - 2) / (d - 1);
  auto res = quad::integrate_half_line([&](double t) { return kernel(t) * std::pow(t, d); }, rel_tol);
  res.value *= factor;
  res.error *= factor;
  return res;
}

quad::Result voronoi_constant_via_sigma(int d, double rel_tol) {
  const double eta = unit_sphere_measure(d - 2);
  auto s = sigma_k([d](double t) { return voronoi_kernel(t, d).value; }, d, rel_tol);
  s.value *= 0.5 * eta;
  s.error *= 0.5 * eta;
  return s;
}

const LimitConstants& limit_constants(int d) {
  require_dimension(d);
  static std::mutex mu;
  static std::array<std::optional<LimitConstants>, 17> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[static_cast<std::size_t>(d)];
  if (!slot) {
    LimitConstants c;
    c.d = d;
    c.eta_dm2 = unit_sphere_measure(d - 2);
    c.leb_d = unit_ball_volume(d);
    const auto cd = voronoi_constant(d);
    c.c_d = cd.value;
    c.c_d_error = cd.error;
    const auto se = sigma_k([](double t) { return t <= 1.0 ? 1.0 : 0.0; }, d);
    c.sigma_eps = 0.5 * se.value;
    c.sigma_eps_error = 0.5 * se.error;
    slot = c;
  }
  return *slot;
}

double AnnulusDensity::area() const {
  return std::numbers::pi * (r_out * r_out - r_in * r_in);
}

double AnnulusDensity::p_out() const { return (1.0 - p_in * area()) / (1.0 - area()); }

double AnnulusDensity::operator()(double x, double y) const {
  const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
  return (r2 >= r_in * r_in && r2 <= r_out * r_out) ? p_in : p_out();
}

double ball_perimeter(const BallIndicator& f0, int d) {
  return unit_sphere_measure(d - 1) * std::pow(f0.radius, d - 1);
}

Prediction limit_prediction(GraphKind kind, const BallIndicator& f0,
                            const DensityDescriptor& density, int d) {
  require_dimension(d);
  if (static_cast<int>(f0.center.size()) != d) {
    throw UnsupportedDescriptor("ball center has " + std::to_string(f0.center.size()) +
                                " coordinates for d = " + std::to_string(d));
  }
  if (!(f0.radius > 0.0)) throw UnsupportedDescriptor("ball radius must be positive");
  for (double c : f0.center) {
    if (c - f0.radius <= 0.0 || c + f0.radius >= 1.0) {
      throw UnsupportedDescriptor("ball must lie inside the open unit cube");
    }
  }
  const auto& lc = limit_constants(d);
  const double perimeter = ball_perimeter(f0, d);

  // Density on the ball boundary, where it must be constant.
  double p_boundary = 1.0;
  if (const auto* a = std::get_if<AnnulusDensity>(&density)) {
    if (d != 2) throw UnsupportedDescriptor("annulus densities are two-dimensional");
    if (f0.center[0] != a->cx || f0.center[1] != a->cy) {
      throw UnsupportedDescriptor("ball must be concentric with the density annulus");
    }
    if (f0.radius == a->r_in || f0.radius == a->r_out) {
      throw UnsupportedDescriptor("ball boundary coincides with a density discontinuity");
    }
    p_boundary = (f0.radius > a->r_in && f0.radius < a->r_out) ? a->p_in : a->p_out();
  }

  Prediction out;
  switch (kind) {
    case GraphKind::Voronoi:
      out.value = lc.c_d * perimeter;
      out.error = lc.c_d_error * perimeter;
      break;
    case GraphKind::Epsilon:
      out.value = lc.sigma_eps * perimeter * p_boundary * p_boundary;
      out.error = lc.sigma_eps_error * perimeter * p_boundary * p_boundary;
      break;
    case GraphKind::Knn: {
      const double scale = std::pow(lc.leb_d, -(d + 1.0) / d);
      const double weight = std::pow(p_boundary, 1.0 - 1.0 / d);
      out.value = lc.sigma_eps * scale * perimeter * weight;
      out.error = lc.sigma_eps_error * scale * perimeter * weight;
      out.heuristic = true;
      break;
    }
  }
  return out;
}

}  // namespace voronoigram::asymptotics
