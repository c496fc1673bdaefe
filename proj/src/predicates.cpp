#include <algorithm>
#include <atomic>
#include <cmath>

#include <gmpxx.h>

#include "voronoigram/geometry.hpp"

namespace voronoigram::predicates {
namespace {

// Static filter bounds for the plain double evaluations below (Shewchuk).
constexpr double kEps = 0x1p-53;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

std::atomic<std::uint64_t> g_fallbacks{0};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }
int sign_of(const mpq_class& v) { return sgn(v); }

int orient_exact(const Point2& a, const Point2& b, const Point2& c) {
  g_fallbacks.fetch_add(1, std::memory_order_relaxed);
  const mpq_class ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const mpq_class det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return sign_of(det);
}

int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  g_fallbacks.fetch_add(1, std::memory_order_relaxed);
  const mpq_class dx(d.x), dy(d.y);
  const mpq_class adx = mpq_class(a.x) - dx, ady = mpq_class(a.y) - dy;
  const mpq_class bdx = mpq_class(b.x) - dx, bdy = mpq_class(b.y) - dy;
  const mpq_class cdx = mpq_class(c.x) - dx, cdy = mpq_class(c.y) - dy;
  const mpq_class alift = adx * adx + ady * ady;
  const mpq_class blift = bdx * bdx + bdy * bdy;
  const mpq_class clift = cdx * cdx + cdy * cdy;
  const mpq_class det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                        clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return sign_of(det);
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return sign_of(det);
    detsum = -detleft - detright;
  } else {
    return sign_of(det) != 0 ? sign_of(det) : orient_exact(a, b, c);
  }
  if (std::abs(det) > kOrientBound * detsum) return sign_of(det);
  return orient_exact(a, b, c);
}

int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  if (std::abs(det) > kInCircleBound * permanent) return sign_of(det);
  return incircle_exact(a, b, c, d);
}

int incircle_perturbed(const Point2& a, const Point2& b, const Point2& c, const Point2& d,
                       std::int64_t ia, std::int64_t ib, std::int64_t ic, std::int64_t id) {
  const int s = incircle(a, b, c, d);
  if (s != 0) return s;
  // Lifted heights z_p += delta_p with delta strictly decreasing in index; the
  // lowest-index point's cofactor decides the sign.
  const std::int64_t lowest = std::min({ia, ib, ic, id});
  if (lowest == ia) return orient2d(b, c, d);
  if (lowest == ib) return -orient2d(a, c, d);
  if (lowest == ic) return orient2d(a, b, d);
  return -orient2d(a, b, c);
}

std::uint64_t exact_fallback_count() { return g_fallbacks.load(std::memory_order_relaxed); }

}  // namespace voronoigram::predicates
