#pragma once

// Adaptive 15-point Gauss-Kronrod integration (GSL QAG) behind a
// std::function interface, plus a dyadic-panel rule for [0, inf).

#include <functional>

namespace voronoigram::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  ///< absolute error estimate
};

using Integrand = std::function<double(double)>;

/// Integral of f over [a, b] to max(abs_tol, rel_tol * |I|).
/// Throws NonConvergence if the subdivision limit is hit.
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 0.0);

/// Integral of f over [0, inf) as a sum of panels [0,1], [1,2], [2,4], ...
/// Summation stops once two consecutive panels each contribute less than
/// rel_tol of the running total in absolute value (or are exactly zero
/// beyond the first panel). Throws DivergentIntegral if the panels have not
/// settled by 2^max_doublings.
Result integrate_half_line(const Integrand& f, double rel_tol = 1e-12, int max_doublings = 60);

}  // namespace voronoigram::quad
