#include "voronoigram/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include <json.hpp>

#include "voronoigram/errors.hpp"
#include "voronoigram/union_find.hpp"

namespace voronoigram {

void RegressionDataset::validate() const {
  if (points.size() != y.size()) {
    throw ShapeMismatch("dataset: " + std::to_string(points.size()) + " points but " +
                        std::to_string(y.size()) + " responses");
  }
  require_in_open_unit_square(points);
  for (double v : y)
    if (!std::isfinite(v)) throw DegenerateInput("dataset: non-finite response");
}

RegressionDataset simulate_dataset(SamplingModel model, std::size_t n, double snr,
                                   std::uint64_t seed) {
  RegressionDataset data;
  data.points = sample_design(model, n, stream_seed(seed, {0}));
  data.sigma = noise_sigma(model, snr);
  data.truth = [](const Point2& p) { return f0_indicator_ball(p); };
  std::mt19937_64 rng(stream_seed(seed, {1}));
  std::normal_distribution<double> noise(0.0, data.sigma);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.y[i] = f0_indicator_ball(data.points[i]) + noise(rng);
  return data;
}

PiecewiseConstantFn::PiecewiseConstantFn(std::vector<Point2> points, std::vector<double> values)
    : tree_(points), values_(std::move(values)) {
  if (values_.size() != points.size()) throw ShapeMismatch("PiecewiseConstantFn: size mismatch");
}

double PiecewiseConstantFn::evaluate(const Point2& x) const { return values_[tree_.nearest(x)]; }

WeightedGraph build_graph(std::span<const Point2> points, const WeightScheme& scheme,
                          const VoronoiDiagram* diagram) {
  if (const auto* e = std::get_if<Epsilon>(&scheme)) return build_eps_graph(points, e->eps);
  if (const auto* k = std::get_if<Knn>(&scheme)) return build_knn_graph(points, k->k);
  VoronoiWeights vw;
  if (std::holds_alternative<ClippedVoronoi>(scheme)) vw = std::get<ClippedVoronoi>(scheme);
  if (std::holds_alternative<UnitVoronoi>(scheme)) vw = UnitVoronoi{};
  if (diagram) return build_voronoi_graph(*diagram, vw);
  return build_voronoi_graph(voronoi(points), vw);
}

EstimatorFit fit_on_graph(const RegressionDataset& data, const WeightedGraph& graph,
                          double lambda, const SolverOptions& opts, WarmStart* warm) {
  if (graph.num_nodes() != data.points.size()) throw ShapeMismatch("graph/data size mismatch");
  EstimatorFit out;
  out.fit = tv_denoise(graph, data.y, lambda, opts, warm);
  out.fn = PiecewiseConstantFn(data.points, out.fit.theta);
  return out;
}

EstimatorFit fit_voronoigram(const RegressionDataset& data, double lambda,
                             const VoronoiWeights& scheme, const SolverOptions& opts) {
  data.validate();
  const auto diagram = voronoi(data.points);
  return fit_on_graph(data, build_voronoi_graph(diagram, scheme), lambda, opts);
}

EstimatorFit fit_graph_tvd(const RegressionDataset& data, const GeometricGraph& kind,
                           double lambda, const SolverOptions& opts) {
  data.validate();
  const WeightedGraph graph = std::holds_alternative<Epsilon>(kind)
                                  ? build_eps_graph(data.points, std::get<Epsilon>(kind).eps)
                                  : build_knn_graph(data.points, std::get<Knn>(kind).k);
  return fit_on_graph(data, graph, lambda, opts);
}

std::size_t extrapolant_region_count(const VoronoiDiagram& diagram, std::span<const double> values,
                                     double tol) {
  if (values.size() != diagram.size()) throw ShapeMismatch("region count: size mismatch");
  UnionFind uf(diagram.size());
  for (const auto& f : diagram.facets())
    if (std::abs(values[f.i] - values[f.j]) <= tol) uf.unite(f.i, f.j);
  return uf.count();
}

double extrapolant_tv(const VoronoiDiagram& diagram, std::span<const double> values) {
  return diagram.boundary_functional(values);
}

double lambda_theory(const WeightScheme& scheme, std::size_t n, double sigma, double alpha,
                     double c, int d) {
  if (n < 2) throw BadConfig("lambda_theory needs n >= 2");
  if (!(alpha > 1.0)) throw BadConfig("lambda_theory needs alpha > 1");
  const double logn = std::log(static_cast<double>(n));
  if (std::holds_alternative<ExactVoronoi>(scheme)) {
    throw BadConfig("no theoretical lambda for exact Voronoi weights");
  }
  if (std::holds_alternative<ClippedVoronoi>(scheme)) {
    const double tau = std::pow(static_cast<double>(n), static_cast<double>(d - 1) / d);
    return c * sigma * tau * std::pow(logn, 0.5 + alpha);
  }
  if (std::holds_alternative<UnitVoronoi>(scheme)) return c * sigma * std::pow(logn, 0.5 + alpha);
  return c * sigma * std::pow(logn, 0.5 - alpha);
}

// --- Haar -------------------------------------------------------------------

double haar_psi(double u) {
  if (u > 0.0 && u <= 0.5) return 1.0;
  if (u > 0.5 && u < 1.0) return -1.0;
  return 0.0;
}

double haar_basis(int level, std::span<const std::int64_t> k, std::uint32_t mask,
                  std::span<const double> x) {
  const std::size_t d = x.size();
  const double scale = std::ldexp(1.0, level);
  double value = std::pow(2.0, 0.5 * level * static_cast<double>(d));
  for (std::size_t m = 0; m < d; ++m) {
    const double u = scale * x[m] - static_cast<double>(k[m]);
    if (!(u > 0.0 && u < 1.0)) return 0.0;
    if (mask & (1u << m)) value *= haar_psi(u);
  }
  return value;
}

namespace {

// Cell containing x at `level` (u in (0,1] per coordinate) and the sign
// pattern: bit m set when x sits in the upper half along coordinate m.
// Returns false on a dyadic boundary, where every wavelet vanishes.
bool locate_cell(std::span<const double> x, int level, std::uint64_t& flat, std::uint32_t& upper) {
  const double scale = std::ldexp(1.0, level);
  const std::uint64_t side = std::uint64_t{1} << level;
  flat = 0;
  upper = 0;
  for (std::size_t m = x.size(); m-- > 0;) {
    const double u = scale * x[m];
    const double k = std::ceil(u) - 1.0;
    const double frac = u - k;
    if (!(frac > 0.0 && frac < 1.0) || k < 0.0 || k >= static_cast<double>(side)) return false;
    flat = flat * side + static_cast<std::uint64_t>(k);
    if (frac > 0.5) upper |= 1u << m;
  }
  return true;
}

double mask_sign(std::uint32_t mask, std::uint32_t upper) {
  return (std::popcount(mask & upper) & 1) ? -1.0 : 1.0;
}

}  // namespace

int wavelet_max_level(std::size_t n, int d) {
  if (n == 0 || d < 1) return 0;
  int level = 0;
  while (true) {
    const int bits = (level + 1) * d;
    if (bits >= 63 || (std::uint64_t{1} << bits) > n) break;
    ++level;
  }
  return level;
}

double wavelet_threshold(std::size_t n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw BadConfig("wavelet delta must be in (0,1)");
  const double nn = static_cast<double>(n);
  return 8.0 / std::sqrt(nn) * std::pow(std::log(2.0 * nn / delta), 1.5);
}

WaveletFit fit_wavelet(std::span<const double> coords, std::span<const double> y, int d,
                       double threshold, int max_level) {
  if (d < 1 || d > 8) throw BadConfig("wavelet dimension must be in [1, 8]");
  if (coords.size() != y.size() * static_cast<std::size_t>(d)) {
    throw ShapeMismatch("fit_wavelet: coordinate array does not match responses");
  }
  if (max_level < 0 || max_level * d > 60) throw BadConfig("wavelet level out of range");
  const std::size_t n = y.size();
  WaveletFit fit;
  fit.d_ = d;
  fit.threshold_ = threshold;
  fit.max_level_ = max_level;
  double sum = 0.0;
  for (double v : y) sum += v;
  fit.ybar_ = n ? sum / static_cast<double>(n) : 0.0;
  fit.levels_.resize(static_cast<std::size_t>(max_level) + 1);
  const std::uint32_t masks = 1u << d;
  for (int level = 0; level <= max_level; ++level) {
    const double norm = std::pow(2.0, 0.5 * level * d) / static_cast<double>(n);
    std::unordered_map<std::uint64_t, double> acc;
    for (std::size_t j = 0; j < n; ++j) {
      std::uint64_t flat = 0;
      std::uint32_t upper = 0;
      if (!locate_cell(coords.subspan(j * d, d), level, flat, upper)) continue;
      for (std::uint32_t mask = 1; mask < masks; ++mask) {
        acc[(flat << d) | mask] += norm * mask_sign(mask, upper) * y[j];
      }
    }
    auto& kept = fit.levels_[static_cast<std::size_t>(level)];
    for (const auto& [key, value] : acc)
      if (std::abs(value) >= threshold) kept.emplace(key, value);
  }
  return fit;
}

WaveletFit fit_wavelet(const RegressionDataset& data, double threshold, int max_level) {
  std::vector<double> coords;
  coords.reserve(2 * data.points.size());
  for (const auto& p : data.points) {
    coords.push_back(p.x);
    coords.push_back(p.y);
  }
  return fit_wavelet(coords, data.y, 2, threshold, max_level);
}

WaveletFit fit_wavelet(const RegressionDataset& data, double delta) {
  return fit_wavelet(data, wavelet_threshold(data.y.size(), delta),
                     wavelet_max_level(data.y.size(), 2));
}

std::size_t WaveletFit::num_coefficients() const {
  std::size_t total = 0;
  for (const auto& l : levels_) total += l.size();
  return total;
}

std::vector<WaveletCoefficient> WaveletFit::coefficients() const {
  std::vector<WaveletCoefficient> out;
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    std::vector<std::pair<std::uint64_t, double>> sorted(levels_[level].begin(),
                                                         levels_[level].end());
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t side = std::uint64_t{1} << level;
    for (const auto& [key, value] : sorted) {
      WaveletCoefficient c;
      c.level = static_cast<int>(level);
      c.mask = static_cast<std::uint32_t>(key & ((1u << d_) - 1));
      std::uint64_t flat = key >> d_;
      c.k.resize(static_cast<std::size_t>(d_));
      for (int m = 0; m < d_; ++m) {
        c.k[static_cast<std::size_t>(m)] = static_cast<std::int64_t>(flat % side);
        flat /= side;
      }
      c.value = value;
      out.push_back(std::move(c));
    }
  }
  return out;
}

double WaveletFit::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw ShapeMismatch("WaveletFit::evaluate: wrong dimension");
  double value = ybar_;
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    if (levels_[level].empty()) continue;
    std::uint64_t flat = 0;
    std::uint32_t upper = 0;
    if (!locate_cell(x, static_cast<int>(level), flat, upper)) continue;
    const double scale = std::pow(2.0, 0.5 * static_cast<double>(level) * d_);
    for (std::uint32_t mask = 1; mask < (1u << d_); ++mask) {
      const auto it = levels_[level].find((flat << d_) | mask);
      if (it != levels_[level].end()) value += it->second * scale * mask_sign(mask, upper);
    }
  }
  return value;
}

double WaveletFit::evaluate(const Point2& p) const {
  const double x[2] = {p.x, p.y};
  return evaluate(std::span<const double>(x, 2));
}

double ball_haar_coefficient(const asymptotics::BallIndicator& ball, int level, std::int64_t kx,
                             std::int64_t ky, std::uint32_t mask) {
  if (ball.center.size() != 2) throw UnsupportedDescriptor("ball_haar_coefficient is 2D");
  const double h = std::ldexp(1.0, -level);
  const double x0 = kx * h;
  const double y0 = ky * h;
  double total = 0.0;
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx) {
      const std::uint32_t upper = static_cast<std::uint32_t>(qx) | (static_cast<std::uint32_t>(qy) << 1);
      const double area = disc_rectangle_area(ball.center[0], ball.center[1], ball.radius,
                                              x0 + 0.5 * h * qx, x0 + 0.5 * h * (qx + 1),
                                              y0 + 0.5 * h * qy, y0 + 0.5 * h * (qy + 1));
      total += mask_sign(mask, upper) * area;
    }
  }
  return std::ldexp(1.0, level) * total;
}

// --- Risk -------------------------------------------------------------------

double l2_pn_error(std::span<const double> theta, std::span<const double> truth) {
  if (theta.size() != truth.size()) throw ShapeMismatch("l2_pn_error: size mismatch");
  if (theta.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) s += (theta[i] - truth[i]) * (theta[i] - truth[i]);
  return s / static_cast<double>(theta.size());
}

MonteCarloEstimate l2_p_error(const std::function<double(const Point2&)>& fhat,
                              const std::function<double(const Point2&)>& truth,
                              SamplingModel model, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw BadConfig("l2_p_error needs at least 2 samples");
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks, 0.0), sumsq(blocks, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t count = std::min(kBlock, samples - lo);
    const auto pts = sample_design(model, count, stream_seed(seed, {static_cast<std::uint64_t>(b)}));
    double s = 0.0, s2 = 0.0;
    for (const auto& p : pts) {
      const double e = fhat(p) - truth(p);
      s += e * e;
      s2 += e * e * e * e;
    }
    sum[static_cast<std::size_t>(b)] = s;
    sumsq[static_cast<std::size_t>(b)] = s2;
  }
  double s = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sumsq[b];
  }
  const double nn = static_cast<double>(samples);
  const double mean = s / nn;
  const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

// --- Export -----------------------------------------------------------------

void write_function_json(std::ostream& os, const PiecewiseConstantFn& fn,
                         std::span<const std::int32_t> labels) {
  nlohmann::json doc;
  auto& pts = doc["points"] = nlohmann::json::array();
  for (const auto& p : fn.points()) pts.push_back({p.x, p.y});
  doc["values"] = std::vector<double>(fn.values().begin(), fn.values().end());
  if (!labels.empty()) doc["labels"] = std::vector<std::int32_t>(labels.begin(), labels.end());
  os << doc.dump() << '\n';
  if (!os) throw IoError("failed writing function JSON");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string diverging_color(double t) {
  // t in [0,1]: blue -> white -> red
  t = std::clamp(t, 0.0, 1.0);
  double r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = 0.13 + s * (1.0 - 0.13);
    g = 0.40 + s * (1.0 - 0.40);
    b = 0.67 + s * (1.0 - 0.67);
  } else {
    const double s = (t - 0.5) / 0.5;
    r = 1.0 - s * (1.0 - 0.70);
    g = 1.0 - s * (1.0 - 0.09);
    b = 1.0 - s * (1.0 - 0.17);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(r * 255)),
                static_cast<int>(std::lround(g * 255)), static_cast<int>(std::lround(b * 255)));
  return buf;
}

}  // namespace

RenderSummary render_fit_svg(std::ostream& os, const VoronoiDiagram& diagram, const TvFit& fit,
                             double size_px) {
  if (fit.theta.size() != diagram.size()) throw ShapeMismatch("render: fit/diagram size mismatch");
  const double tol = fit.diagnostics.fuse_tol;
  RenderSummary summary;
  summary.regions = extrapolant_region_count(diagram, fit.theta, tol);
  summary.components = fit.num_components;

  const auto [lo_it, hi_it] = std::minmax_element(fit.theta.begin(), fit.theta.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  auto X = [&](double x) { return fmt(x * size_px); };
  auto Y = [&](double y) { return fmt((1.0 - y) * size_px); };
  const double caption = 28.0;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size_px) << "\" height=\""
     << fmt(size_px + caption) << "\" viewBox=\"0 0 " << fmt(size_px) << ' '
     << fmt(size_px + caption) << "\">\n";
  os << "<g id=\"cells\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < diagram.size(); ++i) {
    const double t = span > 0.0 ? (fit.theta[i] - lo) / span : 0.5;
    os << "<polygon fill=\"" << diverging_color(t) << "\" points=\"";
    const auto& cell = diagram.cell(i);
    for (std::size_t v = 0; v < cell.vertices.size(); ++v) {
      os << (v ? " " : "") << X(cell.vertices[v].x) << ',' << Y(cell.vertices[v].y);
    }
    os << "\"/>\n";
  }
  os << "</g>\n<g id=\"regions\" stroke=\"black\" stroke-width=\"1.2\" stroke-linecap=\"round\">\n";
  for (const auto& f : diagram.facets()) {
    if (std::abs(fit.theta[f.i] - fit.theta[f.j]) <= tol) continue;
    os << "<line x1=\"" << X(f.a.x) << "\" y1=\"" << Y(f.a.y) << "\" x2=\"" << X(f.b.x)
       << "\" y2=\"" << Y(f.b.y) << "\"/>\n";
  }
  os << "</g>\n<rect x=\"0\" y=\"0\" width=\"" << fmt(size_px) << "\" height=\"" << fmt(size_px)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"8\" y=\"" << fmt(size_px + 19.0) << "\" font-family=\"sans-serif\" font-size=\"14\">"
     << "lambda=" << fmt(fit.lambda) << "  regions=" << summary.regions
     << "  K-hat=" << summary.components;
  if (summary.regions != summary.components) os << "  (regions differ from K-hat)";
  os << "</text>\n</svg>\n";
  if (!os) throw IoError("failed writing SVG");
  return summary;
}

}  // namespace voronoigram
