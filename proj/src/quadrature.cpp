#include "voronoigram/quadrature.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "voronoigram/errors.hpp"

namespace voronoigram::quad {
namespace {

constexpr std::size_t kLimit = 4000;

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

double trampoline(double x, void* params) { return (*static_cast<const Integrand*>(params))(x); }

const bool kHandlerOff = [] {
  gsl_set_error_handler_off();
  return true;
}();

}  // namespace

Result integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
  (void)kHandlerOff;
  if (a == b) return {};
  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(kLimit));
  gsl_function gf;
  gf.function = &trampoline;
  gf.params = const_cast<Integrand*>(&f);
  Result r;
  const int status = gsl_integration_qag(&gf, a, b, abs_tol, rel_tol, kLimit, GSL_INTEG_GAUSS15,
                                         ws.get(), &r.value, &r.error);
  // Roundoff-limited results are still the best available and carry an honest
  // error estimate; only a hard failure is reported.
  if (status != GSL_SUCCESS && status != GSL_EROUND) {
    throw NonConvergence("quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "]: " + gsl_strerror(status));
  }
  if (!std::isfinite(r.value)) throw DivergentIntegral("quadrature produced a non-finite value");
  return r;
}

Result integrate_half_line(const Integrand& f, double rel_tol, int max_doublings) {
  Result total = integrate(f, 0.0, 1.0, rel_tol);
  int quiet = 0;
  double lo = 1.0;
  for (int k = 0; k < max_doublings; ++k) {
    const double hi = 2.0 * lo;
    const Result panel = integrate(f, lo, hi, rel_tol, 1e-300);
    total.value += panel.value;
    total.error += panel.error;
    const bool small = panel.value == 0.0 || std::abs(panel.value) <= rel_tol * std::abs(total.value);
    quiet = small ? quiet + 1 : 0;
    if (quiet >= 2) return total;
    lo = hi;
  }
  throw DivergentIntegral("integral over [0, inf) did not settle by 2^" +
                          std::to_string(max_doublings));
}

}  // namespace voronoigram::quad
