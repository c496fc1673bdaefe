// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "voronoigram/asymptotics.hpp"
#include "voronoigram/estimators.hpp"
#include "voronoigram/experiments.hpp"
#include "voronoigram/parallel.hpp"
#include "voronoigram/reference/serial.hpp"
#include "voronoigram/union_find.hpp"

using namespace voronoigram;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> ball_values(std::span<const Point2> pts) {
  std::vector<double> f(pts.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = f0_indicator_ball(pts[i]);
  return f;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = asymptotics::voronoi_constant(2);
  const double secs = seconds_since(t0);
  const double rel = std::abs(c.value - 4.0 / std::numbers::pi) / (4.0 / std::numbers::pi);
  report(1, rel <= 1e-8 && secs < 1.0, fmt("c_2=%.15f rel_err=%.2e time=%.3fs", c.value, rel, secs));
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 100000;
  const int reps = 20;
  bool ok = true;
  std::string detail;
  for (const auto model : {SamplingModel::Uniform, SamplingModel::LowTube, SamplingModel::HighTube}) {
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto pts = sample_design(model, n, stream_seed(202, {static_cast<std::uint64_t>(model),
                                                                 static_cast<std::uint64_t>(r)}));
      const auto g = build_voronoi_graph(voronoi(pts), ExactVoronoi{});
      sum += discrete_tv(g, ball_values(pts));
    }
    const double mean = sum / reps;
    ok = ok && std::abs(mean - 2.0) <= 0.1 * 2.0;
    detail += model_name(model) + "=" + fmt("%.4f ", mean);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 600.0;
  report(2, ok, detail + fmt("target=2 tol=10%% time=%.1fs", secs));
}

void criterion_3() {
  const std::size_t n = 100000;
  const int reps = 20;
  const double nd = static_cast<double>(n);
  const double eps = std::sqrt(std::log(nd) / nd);
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto pts = sample_design(SamplingModel::Uniform, n, stream_seed(303, {static_cast<std::uint64_t>(r)}));
    sum += discrete_tv(build_eps_graph(pts, eps), ball_values(pts)) / (nd * nd * eps * eps * eps);
  }
  const double mean = sum / reps;
  const double target = std::numbers::pi / 3.0;
  report(3, std::abs(mean - target) <= 0.15 * target,
         fmt("mean rescaled DTV=%.4f target=%.4f eps=%.5f tol=15%%", mean, target, eps));
}

WeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, bool connect) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b || seen[a][b]) return;
    seen[a][b] = seen[b][a] = true;
    edges.push_back({static_cast<std::int32_t>(std::min(a, b)), static_cast<std::int32_t>(std::max(a, b)), w(rng)});
  };
  if (connect) {
    for (std::size_t i = 1; i < n; ++i) add(i, std::uniform_int_distribution<std::size_t>(0, i - 1)(rng));
  }
  const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, 3 * n)(rng);
  for (std::size_t e = 0; e < extra; ++e) add(pick(rng), pick(rng));
  return WeightedGraph(n, std::move(edges));
}

void criterion_4() {
  std::mt19937_64 rng(404);
  const double lambdas[] = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
  double worst_kkt = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    const auto g = random_graph(rng, n, t % 2 == 0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> y(n);
    for (auto& v : y) v = z(rng);
    const double lambda = lambdas[t % 7];
    const auto fit = tv_denoise(g, y, lambda);
    worst_kkt = std::max(worst_kkt, kkt_residual(g, y, lambda, fit.theta, fit.diagnostics.fuse_tol));
  }

  // Two nodes: theta_1 = y_1 + min(lambda w, (y_2 - y_1)/2).
  const WeightedGraph two(2, {{0, 1, 1.0}});
  const std::vector<double> y2{0.0, 2.0};
  double two_err = 0.0;
  for (const double lambda : {0.5, 1.5}) {
    const double shift = std::min(lambda, (y2[1] - y2[0]) / 2);
    const auto fit = tv_denoise(two, y2, lambda);
    two_err = std::max({two_err, std::abs(fit.theta[0] - (y2[0] + shift)),
                        std::abs(fit.theta[1] - (y2[1] - shift))});
  }

  // Large lambda on connected graphs: the grand mean.
  double mean_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    const auto g = random_graph(rng, n, true);
    std::vector<double> y(n);
    std::normal_distribution<double> z(0.0, 1.0);
    double ybar = 0.0;
    for (auto& v : y) ybar += (v = z(rng));
    ybar /= static_cast<double>(n);
    double ynorm = 0.0;
    for (double v : y) ynorm += v * v;
    const auto fit = tv_denoise(g, y, 10.0 * std::sqrt(ynorm) * static_cast<double>(n) / g.min_weight());
    for (double v : fit.theta) mean_err = std::max(mean_err, std::abs(v - ybar));
  }
  report(4, worst_kkt <= 1e-6 && two_err <= 1e-9 && mean_err <= 1e-8,
         fmt("max KKT=%.2e (<=1e-6) two-node err=%.2e (<=1e-9) grand-mean err=%.2e (<=1e-8)",
             worst_kkt, two_err, mean_err));
}

// Crofton estimate of the jump set length weighted by |jump|: label changes
// along pixel lines in 8 directions on a res x res grid of nearest-site
// labels, combined with the angular width of each direction.
double crofton_tv(std::span<const Point2> sites, std::span<const double> values, int res) {
  const double h = 1.0 / res;
  std::vector<std::int32_t> label(static_cast<std::size_t>(res) * res);
  for (int r = 0; r < res; ++r)
    for (int c = 0; c < res; ++c)
      label[static_cast<std::size_t>(r) * res + c] =
          reference::nearest_linear(sites, {(c + 0.5) * h, (r + 0.5) * h});
  const int dirs[8][2] = {{1, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 1}, {-1, 2}, {-1, 1}, {-2, 1}};
  double angle[8];
  for (int k = 0; k < 8; ++k) angle[k] = std::atan2(dirs[k][1], dirs[k][0]);
  double total = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double prev = k == 0 ? angle[7] - std::numbers::pi : angle[k - 1];
    const double next = k == 7 ? angle[0] + std::numbers::pi : angle[k + 1];
    const double width = 0.5 * (next - prev);
    const int dx = dirs[k][0], dy = dirs[k][1];
    const double spacing = h / std::hypot(dx, dy);
    double jumps = 0.0;
    for (int r = 0; r < res; ++r) {
      for (int c = 0; c < res; ++c) {
        const int c2 = c + dx, r2 = r + dy;
        if (c2 < 0 || c2 >= res || r2 >= res) continue;
        const auto a = label[static_cast<std::size_t>(r) * res + c];
        const auto b = label[static_cast<std::size_t>(r2) * res + c2];
        if (a != b) jumps += std::abs(values[a] - values[b]);
      }
    }
    total += width * spacing * jumps;
  }
  return 0.5 * total;
}

void criterion_5() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto pts = sample_design(SamplingModel::Uniform, 50, rng());
    std::vector<double> v(pts.size());
    for (auto& x : v) x = (rng() & 1) ? 1.0 : -1.0;
    const double discrete = discrete_tv(build_voronoi_graph(voronoi(pts), ExactVoronoi{}), v);
    const double grid = crofton_tv(pts, v, 2000);
    worst = std::max(worst, std::abs(discrete - grid) / grid);
  }
  report(5, worst <= 0.02, fmt("max relative gap vs 2000^2 grid=%.4f (<=0.02)", worst));
}

void criterion_6() {
  std::mt19937_64 rng(606);
  double worst_tv = 0.0;
  int region_mismatch = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 50 + 10 * static_cast<std::size_t>(t);
    const auto data = simulate_dataset(SamplingModel::Uniform, n, 1.0, rng());
    const auto diagram = voronoi(data.points);
    const auto g = build_voronoi_graph(diagram, ExactVoronoi{});
    const double lambda = data.sigma / g.mean_weight() * std::pow(10.0, -2.0 + 3.0 * (t % 10) / 9.0);
    const auto fit = tv_denoise(g, data.y, lambda);
    const double continuum = extrapolant_tv(diagram, fit.theta);
    worst_tv = std::max(worst_tv, std::abs(continuum - discrete_tv(g, fit.theta)));
    if (extrapolant_region_count(diagram, fit.theta, fit.diagnostics.fuse_tol) != fit.num_components)
      ++region_mismatch;
  }
  report(6, worst_tv <= 1e-10 && region_mismatch == 0,
         fmt("max |TV(extrapolant) - |D theta|_1|=%.2e (<=1e-10) region/K mismatches=%.0f", worst_tv,
             region_mismatch));
}

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 100;
  const int draws = 500;
  const auto pts = sample_design(SamplingModel::Uniform, n, 707);
  const auto g = build_voronoi_graph(voronoi(pts), ExactVoronoi{});
  const double sigma = noise_sigma(SamplingModel::Uniform, 1.0);
  const double lambda = 0.5 * sigma / g.mean_weight();
  const auto f = ball_values(pts);
  std::mt19937_64 rng(stream_seed(707, {1}));
  std::normal_distribution<double> z(0.0, sigma);
  std::vector<std::vector<double>> Y(draws), T(draws);
  double mean_k = 0.0;
  for (int r = 0; r < draws; ++r) {
    Y[r].resize(n);
    for (std::size_t i = 0; i < n; ++i) Y[r][i] = f[i] + z(rng);
    const auto fit = tv_denoise(g, Y[r], lambda);
    T[r] = fit.theta;
    mean_k += static_cast<double>(fit.num_components);
  }
  mean_k /= draws;
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double my = 0.0, mt = 0.0;
    for (int r = 0; r < draws; ++r) {
      my += Y[r][i];
      mt += T[r][i];
    }
    my /= draws;
    mt /= draws;
    double s = 0.0;
    for (int r = 0; r < draws; ++r) s += (T[r][i] - mt) * (Y[r][i] - my);
    cov += s / (draws - 1);
  }
  const double df = cov / (sigma * sigma);
  const double rel = std::abs(mean_k - df) / df;
  const double secs = seconds_since(t0);
  report(7, rel <= 0.10 && secs < 120.0,
         fmt("mean K=%.3f covariance df=%.3f rel=%.4f (<=0.10) time=%.1fs", mean_k, df, rel, secs));
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto study = experiments::rate_study({500, 2000, 8000}, 10, 808);
  const double secs = seconds_since(t0);
  report(8, study.slope >= -0.8 && study.slope <= -0.25,
         fmt("risks=%.5f,%.5f,%.5f slope=", study.mean_risk[0], study.mean_risk[1],
             study.mean_risk[2]) +
             fmt("%.4f in [-0.8,-0.25] time=%.0fs", study.slope, secs));
}

// Haar functions at level <= L are constant on the dyadic grid of side
// 2^{-(L+1)}, so midpoint sums over that grid integrate products exactly.
struct HaarIndex {
  int level;
  std::int64_t kx, ky;
  std::uint32_t mask;
};

std::vector<HaarIndex> haar_family(int max_level) {
  std::vector<HaarIndex> out;
  for (int l = 0; l <= max_level; ++l)
    for (std::int64_t kx = 0; kx < (1 << l); ++kx)
      for (std::int64_t ky = 0; ky < (1 << l); ++ky)
        for (std::uint32_t m = 1; m < 4; ++m) out.push_back({l, kx, ky, m});
  return out;
}

std::vector<double> sample_on_grid(const HaarIndex& h, int side) {
  std::vector<double> v(static_cast<std::size_t>(side) * side);
  const std::int64_t k[2] = {h.kx, h.ky};
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const double x[2] = {(c + 0.5) / side, (r + 0.5) / side};
      v[static_cast<std::size_t>(r) * side + c] = haar_basis(h.level, k, h.mask, x);
    }
  return v;
}

void criterion_9() {
  const int side3 = 16;
  const auto fam3 = haar_family(3);
  std::vector<std::vector<double>> grid;
  grid.push_back(std::vector<double>(side3 * side3, 1.0));  // Phi
  for (const auto& h : fam3) grid.push_back(sample_on_grid(h, side3));
  double gram_err = 0.0;
  const double cell = 1.0 / (side3 * side3);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a; b < grid.size(); ++b) {
      double s = 0.0;
      for (std::size_t p = 0; p < grid[a].size(); ++p) s += grid[a][p] * grid[b][p];
      gram_err = std::max(gram_err, std::abs(s * cell - (a == b ? 1.0 : 0.0)));
    }
  }

  const int side4 = 32;
  std::mt19937_64 rng(909);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> f(side4 * side4, 0.0);
  const double c0 = z(rng);
  double coef2 = c0 * c0;
  for (auto& v : f) v = c0;
  for (const auto& h : haar_family(4)) {
    const double c = z(rng);
    coef2 += c * c;
    const auto basis = sample_on_grid(h, side4);
    for (std::size_t p = 0; p < f.size(); ++p) f[p] += c * basis[p];
  }
  double norm2 = 0.0;
  for (double v : f) norm2 += v * v;
  norm2 /= side4 * side4;
  const double parseval_err = std::abs(norm2 - coef2) / coef2;

  const auto ball = default_ball();
  double worst_ratio = 0.0;
  for (int l = 0; l <= 6; ++l) {
    double mx = 0.0;
    for (std::int64_t kx = 0; kx < (1 << l); ++kx)
      for (std::int64_t ky = 0; ky < (1 << l); ++ky)
        for (std::uint32_t m = 1; m < 4; ++m) mx = std::max(mx, std::abs(ball_haar_coefficient(ball, l, kx, ky, m)));
    worst_ratio = std::max(worst_ratio, mx / std::ldexp(1.0, -l));
  }
  report(9, gram_err <= 1e-12 && parseval_err <= 1e-10 && worst_ratio <= 1.0,
         fmt("Gram err=%.2e (<=1e-12) Parseval rel err=%.2e (<=1e-10) max |theta_l|/2^-l=%.4f (<=1)",
             gram_err, parseval_err, worst_ratio));
}

void criterion_10() {
  std::mt19937_64 rng(1010);
  double area_err = 0.0;
  for (const std::size_t n : {10, 100, 1000, 10000}) {
    const auto d = voronoi(sample_design(SamplingModel::Uniform, n, rng()));
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d.cell_area(i);
    area_err = std::max(area_err, std::abs(s - 1.0));
  }

  int connected = 0;
  double equi = 0.0;
  double intrusion = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 400)(rng);
    const auto pts = sample_design(SamplingModel::Uniform, n, rng());
    const auto d = voronoi(pts);
    UnionFind uf(n);
    for (const auto& f : d.facets()) uf.unite(f.i, f.j);
    if (uf.count() == 1) ++connected;
    if (t % 10 != 0) continue;
    for (const auto& f : d.facets()) {
      for (const Point2& q : {f.a, f.b, Point2{0.5 * (f.a.x + f.b.x), 0.5 * (f.a.y + f.b.y)}}) {
        const double di = std::sqrt(squared_distance(q, pts[f.i]));
        const double dj = std::sqrt(squared_distance(q, pts[f.j]));
        equi = std::max(equi, std::abs(di - dj));
        for (std::size_t k = 0; k < n; ++k)
          intrusion = std::max(intrusion, di - std::sqrt(squared_distance(q, pts[k])));
      }
    }
  }
  report(10, area_err <= 1e-9 && connected == 500 && equi <= 1e-9 && intrusion <= 1e-9,
         fmt("max |sum area - 1|=%.2e connected=%.0f/500 equidistance=%.2e closer-site=%.2e",
             area_err, connected, equi, intrusion));
}

void criterion_11() {
  experiments::ExperimentConfig config;
  config.n_values = {100, 1000, 10000};
  config.repetitions = 3;
  const auto manifest = experiments::run_manifest(config, "sweep-tv", {});
  const auto replay = experiments::config_from_json(manifest.at("config"));
  auto run = [&](int threads) {
    par::set_threads(threads);
    std::ostringstream os;
    experiments::write_tv_csv(os, experiments::tv_estimation_sweep(replay));
    return os.str();
  };
  const std::string a = run(1);
  const std::string b = run(8);
  const std::string c = run(1);
  par::set_threads(par::resolve_threads(0));
  report(11, !a.empty() && a == b && a == c,
         fmt("CSV bytes=%.0f identical(1 vs 8 threads)=%.0f identical(repeat)=%.0f",
             static_cast<double>(a.size()), a == b, a == c));
}

}  // namespace

int main() {
  const std::function<void()> criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                            criterion_5, criterion_6, criterion_7, criterion_8,
                                            criterion_9, criterion_10, criterion_11};
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
