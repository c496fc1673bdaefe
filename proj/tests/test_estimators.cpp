#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "test_util.hpp"
#include "voronoigram/errors.hpp"
#include "voronoigram/estimators.hpp"
#include "voronoigram/reference/serial.hpp"

using namespace voronoigram;

namespace {

RegressionDataset dataset(std::vector<Point2> pts, std::vector<double> y) {
  RegressionDataset d;
  d.points = std::move(pts);
  d.y = std::move(y);
  return d;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("piecewise constant evaluation follows the nearest site") {
  const auto pts = testutil::uniform_points(300, 1);
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const PiecewiseConstantFn fn(pts, v);
  for (const auto& q : testutil::uniform_points(1000, 2))
    CHECK(fn(q) == v[reference::nearest_linear(pts, q)]);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(fn(pts[i]) == v[i]);
  // Equidistant query goes to the lower index.
  const PiecewiseConstantFn two(std::vector<Point2>{{0.25, 0.5}, {0.75, 0.5}}, {1.0, 2.0});
  CHECK(two({0.5, 0.3}) == 1.0);
  CHECK(two({0.3, 0.5}) == 1.0);
  CHECK(two({0.9, 0.1}) == 2.0);
}

TEST_CASE("voronoigram with lambda zero interpolates") {
  const auto data = simulate_dataset(SamplingModel::Uniform, 200, 1.0, 3);
  const auto est = fit_voronoigram(data, 0.0, ExactVoronoi{});
  CHECK(est.fit.theta == data.y);
  for (std::size_t i = 0; i < data.points.size(); ++i) CHECK(est.fn(data.points[i]) == data.y[i]);
}

TEST_CASE("constant data is a fixed point") {
  const auto pts = testutil::uniform_points(150, 4);
  const auto data = dataset(pts, std::vector<double>(pts.size(), 2.5));
  for (const double lambda : {0.01, 1.0, 100.0}) {
    const auto est = fit_voronoigram(data, lambda, UnitVoronoi{});
    for (double t : est.fit.theta) CHECK(std::abs(t - 2.5) <= 1e-10);
    CHECK(est.fit.num_components == 1);
  }
}

TEST_CASE("two-point voronoigram") {
  const auto data = dataset({{0.25, 0.5}, {0.75, 0.5}}, {0.0, 2.0});
  const auto est = fit_voronoigram(data, 0.5, ExactVoronoi{});
  CHECK(std::abs(est.fit.theta[0] - 0.5) <= 1e-9);
  CHECK(std::abs(est.fit.theta[1] - 1.5) <= 1e-9);
  CHECK(est.fn({0.3, 0.5}) == est.fit.theta[0]);
}

TEST_CASE("extrapolant tv equals the discrete tv on exact weights") {
  const auto data = simulate_dataset(SamplingModel::HighTube, 400, 2.0, 5);
  const auto diagram = voronoi(data.points);
  const auto g = build_voronoi_graph(diagram, ExactVoronoi{});
  const auto fit = tv_denoise(g, data.y, 0.2 * data.sigma / g.mean_weight());
  CHECK(std::abs(extrapolant_tv(diagram, fit.theta) - discrete_tv(g, fit.theta)) <= 1e-10);
  CHECK(extrapolant_region_count(diagram, fit.theta, fit.diagnostics.fuse_tol) == fit.num_components);
}

TEST_CASE("eps tvd: complete graph and empty graph") {
  const auto data = simulate_dataset(SamplingModel::Uniform, 60, 1.0, 6);
  const auto full = fit_graph_tvd(data, Epsilon{1.5}, 1e3);
  double ybar = 0.0;
  for (double v : data.y) ybar += v;
  ybar /= 60.0;
  for (double t : full.fit.theta) CHECK(std::abs(t - ybar) <= 1e-8);
  const auto empty = fit_graph_tvd(data, Epsilon{1e-6}, 10.0);
  CHECK(empty.fit.theta == data.y);
  const auto knn = fit_graph_tvd(data, Knn{3}, 0.1);
  CHECK(knn.fit.theta.size() == 60);
}

TEST_CASE("eps tvd regions can outnumber components") {
  // Sites 0 and 2 are eps-neighbors with equal values, but the cell of site 1
  // separates them in the plane.
  const auto data = dataset({{0.45, 0.5}, {0.5, 0.5}, {0.55, 0.5}}, {1.0, 0.0, 1.0});
  const auto est = fit_graph_tvd(data, Epsilon{0.11}, 0.0);
  CHECK(est.fit.num_components == 2);
  CHECK(extrapolant_region_count(voronoi(data.points), est.fit.theta, 1e-9) == 3);
}

TEST_CASE("lambda theory") {
  // n = 8: (log 8)^2.
  CHECK(lambda_theory(UnitVoronoi{}, 8, 1.0, 1.5, 1.0) == doctest::Approx(std::pow(std::log(8.0), 2.0)));
  const std::size_t n4 = 10000;
  const double unit = lambda_theory(UnitVoronoi{}, n4, 0.5, 1.5, 2.0);
  CHECK(unit == doctest::Approx(2.0 * 0.5 * std::pow(std::log(1e4), 2.0)));
  CHECK(lambda_theory(ClippedVoronoi{}, n4, 0.5, 1.5, 2.0) == doctest::Approx(100.0 * unit));
  CHECK(lambda_theory(Epsilon{0.1}, n4, 1.0, 1.5, 1.0) == doctest::Approx(1.0 / std::log(1e4)));
  CHECK(lambda_theory(Knn{5}, n4, 1.0, 2.0, 1.0) == doctest::Approx(std::pow(std::log(1e4), -1.5)));
  CHECK_THROWS_AS(lambda_theory(ExactVoronoi{}, n4, 1.0, 1.5, 1.0), BadConfig);
  CHECK_THROWS_AS(lambda_theory(UnitVoronoi{}, n4, 1.0, 1.0, 1.0), BadConfig);
  CHECK_THROWS_AS(lambda_theory(UnitVoronoi{}, 1, 1.0, 1.5, 1.0), BadConfig);
}

TEST_CASE("haar psi is supported on (0,1) with a half-open split") {
  CHECK(haar_psi(0.3) == 1.0);
  CHECK(haar_psi(0.5) == 1.0);
  CHECK(haar_psi(0.7) == -1.0);
  CHECK(haar_psi(0.0) == 0.0);
  CHECK(haar_psi(1.0) == 0.0);
  CHECK(haar_psi(-0.2) == 0.0);
}

TEST_CASE("haar basis scaling") {
  const std::int64_t k[2] = {1, 2};
  const double x[2] = {0.3, 0.6};  // 2^2 x = (1.2, 2.4): inside cell (1,2)
  CHECK(haar_basis(2, k, 0b01, x) == 4.0);
  CHECK(haar_basis(2, k, 0b10, x) == 4.0);
  const double y[2] = {0.4, 0.6};  // 2^2 x_0 = 1.6: second half
  CHECK(haar_basis(2, k, 0b01, y) == -4.0);
  CHECK(haar_basis(2, k, 0b11, y) == -4.0);
  const double z[2] = {0.9, 0.6};
  CHECK(haar_basis(2, k, 0b01, z) == 0.0);
}

TEST_CASE("wavelet levels and threshold") {
  CHECK(wavelet_max_level(1024, 2) == 5);
  CHECK(wavelet_max_level(1023, 2) == 4);
  CHECK(wavelet_max_level(1 << 12, 3) == 4);
  CHECK(wavelet_threshold(1024, 0.1) == doctest::Approx(8.0 / 32.0 * std::pow(std::log(20480.0), 1.5)));
  CHECK(wavelet_threshold(1024, 0.1) == doctest::Approx(7.82).epsilon(1e-3));
}

TEST_CASE("wavelet fit recovers a single basis function") {
  // Responses are Psi^{01}_{1,(0,1)} on a regular 32 x 32 grid: its empirical
  // coefficient is exact and every other coefficient vanishes.
  const int side = 32;
  std::vector<double> coords, y;
  const std::int64_t k[2] = {0, 1};
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const double x[2] = {(c + 0.5) / side, (r + 0.5) / side};
      coords.push_back(x[0]);
      coords.push_back(x[1]);
      y.push_back(3.0 + haar_basis(1, k, 0b01, x));
    }
  const auto fit = fit_wavelet(coords, y, 2, 0.5, 4);
  CHECK(fit.ybar() == doctest::Approx(3.0));
  REQUIRE(fit.num_coefficients() == 1);
  const auto c = fit.coefficients()[0];
  CHECK(c.level == 1);
  CHECK(c.k == std::vector<std::int64_t>{0, 1});
  CHECK(c.mask == 0b01u);
  CHECK(c.value == doctest::Approx(1.0));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x[2] = {coords[2 * i], coords[2 * i + 1]};
    CHECK(fit.evaluate(x) == doctest::Approx(y[i]));
  }
  // The theoretical threshold keeps nothing at this size.
  RegressionDataset data;
  for (std::size_t i = 0; i < y.size(); ++i) data.points.push_back({coords[2 * i], coords[2 * i + 1]});
  data.y = y;
  CHECK(fit_wavelet(data, 0.1).num_coefficients() == 0);
}

TEST_CASE("ball haar coefficients against a midpoint grid") {
  const auto ball = default_ball();
  const int m = 2048;
  for (int level : {0, 1, 2}) {
    for (std::int64_t kx = 0; kx < (1 << level); ++kx) {
      for (std::uint32_t mask : {1u, 2u, 3u}) {
        const std::int64_t k[2] = {kx, (1 << level) - 1 - kx};
        double grid = 0.0;
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c) {
            const double x[2] = {(c + 0.5) / m, (r + 0.5) / m};
            if (f0_indicator_ball({x[0], x[1]}) == 0.0) continue;
            grid += haar_basis(level, k, mask, x);
          }
        grid /= static_cast<double>(m) * m;
        CHECK(std::abs(ball_haar_coefficient(ball, level, k[0], k[1], mask) - grid) <= 2e-4);
      }
    }
  }
  // The disc is symmetric about both midlines: level 0 coefficients vanish.
  for (std::uint32_t mask : {1u, 2u, 3u}) CHECK(std::abs(ball_haar_coefficient(ball, 0, 0, 0, mask)) <= 1e-12);
}

TEST_CASE("l2 errors") {
  const std::vector<double> t{1.0, 0.0, 2.0};
  CHECK(l2_pn_error(t, t) == 0.0);
  CHECK(l2_pn_error(std::vector<double>{2.0, 1.0, 3.0}, t) == 1.0);
  const auto zero = [](const Point2&) { return 0.0; };
  const auto est = l2_p_error(zero, f0_indicator_ball, SamplingModel::Uniform, 100000, 11);
  CHECK(std::abs(est.value - std::numbers::pi / 16) <= 4 * est.std_error);
  CHECK(est.std_error > 0.0);
}

TEST_CASE("monte carlo risk is identical to the serial reference") {
  const auto data = simulate_dataset(SamplingModel::LowTube, 300, 1.0, 12);
  const auto est = fit_voronoigram(data, 0.05, UnitVoronoi{});
  const auto fhat = [&](const Point2& p) { return est.fn(p); };
  const auto a = l2_p_error(fhat, f0_indicator_ball, SamplingModel::LowTube, 50000, 13);
  const auto b = reference::l2_p_error_serial(fhat, f0_indicator_ball, SamplingModel::LowTube, 50000, 13);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("simulated datasets and validation") {
  const auto d = simulate_dataset(SamplingModel::Uniform, 500, 1.0, 14);
  CHECK(d.points.size() == 500);
  CHECK(d.sigma == noise_sigma(SamplingModel::Uniform, 1.0));
  CHECK(d.truth({0.5, 0.5}) == 1.0);
  d.validate();
  auto bad = d;
  bad.y.pop_back();
  CHECK_THROWS_AS(bad.validate(), ShapeMismatch);
  auto bad2 = d;
  bad2.points[0] = {1.5, 0.5};
  CHECK_THROWS_AS(bad2.validate(), DegenerateInput);
}

TEST_CASE("render a two-point fit") {
  const auto data = dataset({{0.25, 0.5}, {0.75, 0.5}}, {0.0, 2.0});
  const auto est = fit_voronoigram(data, 0.5, ExactVoronoi{});
  std::ostringstream os;
  const auto summary = render_fit_svg(os, voronoi(data.points), est.fit);
  CHECK(summary.regions == 2);
  CHECK(summary.components == 2);
  CHECK(os.str().find("<svg") != std::string::npos);
  std::ostringstream os2;
  render_fit_svg(os2, voronoi(data.points), est.fit);
  CHECK(os.str() == os2.str());
}

TEST_CASE("function json") {
  const PiecewiseConstantFn fn(std::vector<Point2>{{0.2, 0.2}, {0.8, 0.8}}, {1.0, 2.0});
  std::ostringstream os;
  write_function_json(os, fn);
  CHECK(os.str().find("\"values\"") != std::string::npos);
}

}
