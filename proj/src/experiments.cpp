#include "voronoigram/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "voronoigram/errors.hpp"
#include "voronoigram/version.hpp"

namespace voronoigram::experiments {
namespace {

using nlohmann::json;

double log_factor(std::size_t n) { return std::pow(std::log(static_cast<double>(n)), 1.1); }

const std::set<std::string>& known_estimators() {
  static const std::set<std::string> names{"voronoi", "voronoi-unit", "voronoi-clipped",
                                           "eps",     "knn",          "wavelet"};
  return names;
}

// Runs body(t) for t in [0, count) in parallel and rethrows the first error
// (by task index) afterwards.
template <class Body>
void parallel_tasks(std::size_t count, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(count); ++t) {
    try {
      body(static_cast<std::size_t>(t));
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string csv_double(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

template <class T>
T get_field(const json& doc, const char* key, const T& fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw BadConfig(std::string("config field '") + key + "': " + e.what());
  }
}

std::vector<double> truth_at(const RegressionDataset& data) {
  std::vector<double> t(data.points.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = data.truth(data.points[i]);
  return t;
}

std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw IoError("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

}  // namespace

std::vector<double> LambdaGrid::values(double scale) const {
  std::vector<double> out;
  for (int j = count - 1; j >= 0; --j) {
    const double e = count == 1 ? hi_exp : lo_exp + (hi_exp - lo_exp) * j / (count - 1);
    out.push_back(scale * std::pow(10.0, e));
  }
  if (include_zero) out.push_back(0.0);
  return out;
}

std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, int count) {
  if (lo < 1 || hi < lo || count < 1) throw BadConfig("log_spaced_sizes: bad range");
  std::vector<std::size_t> out;
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  for (int j = 0; j < count; ++j) {
    const double e = count == 1 ? b : a + (b - a) * j / (count - 1);
    const auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

ExperimentConfig::ExperimentConfig() : n_values(log_spaced_sizes(100, 100000, 10)) {}

void ExperimentConfig::validate() const {
  if (models.empty()) throw BadConfig("config: models must not be empty");
  if (n_values.empty()) throw BadConfig("config: n_values must not be empty");
  for (const auto n : n_values)
    if (n < 10) throw BadConfig("config: every n must be >= 10");
  if (repetitions < 1 || mse_repetitions < 1) throw BadConfig("config: repetitions must be >= 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw BadConfig("config: c1 and c2 must be > 0");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw BadConfig("config: snr must be > 0");
  if (mse_n < 10) throw BadConfig("config: mse_n must be >= 10");
  if (lambda_grid.count < 1) throw BadConfig("config: lambda_count must be >= 1");
  if (!(lambda_grid.hi_exp >= lambda_grid.lo_exp)) {
    throw BadConfig("config: lambda_hi must be >= lambda_lo");
  }
  for (const auto& e : estimators) {
    if (!known_estimators().count(e)) throw BadConfig("config: unknown estimator '" + e + "'");
  }
  if (!(clipped_c0 > 0.0)) throw BadConfig("config: clipped_c0 must be > 0");
  if (mc_samples < 2) throw BadConfig("config: mc_samples must be >= 2");
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  std::vector<std::string> models;
  for (const auto m : c.models) models.push_back(model_name(m));
  doc["models"] = models;
  doc["n_values"] = c.n_values;
  doc["repetitions"] = c.repetitions;
  doc["c1"] = c.c1;
  doc["c2"] = c.c2;
  doc["snr"] = c.snr;
  doc["mse_n"] = c.mse_n;
  doc["mse_repetitions"] = c.mse_repetitions;
  doc["lambda_lo"] = c.lambda_grid.lo_exp;
  doc["lambda_hi"] = c.lambda_grid.hi_exp;
  doc["lambda_count"] = c.lambda_grid.count;
  doc["lambda_zero"] = c.lambda_grid.include_zero;
  doc["estimators"] = c.estimators;
  doc["clipped_c0"] = c.clipped_c0;
  doc["mc_samples"] = c.mc_samples;
  doc["output_dir"] = c.output_dir;
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw BadConfig("config must be a JSON object");
  const ExperimentConfig defaults;
  const json known = to_json(defaults);
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw BadConfig("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  c.seed = get_field(doc, "seed", defaults.seed);
  if (doc.contains("models")) {
    c.models.clear();
    for (const auto& name : get_field<std::vector<std::string>>(doc, "models", {})) {
      c.models.push_back(parse_model(name));
    }
  }
  c.n_values = get_field(doc, "n_values", defaults.n_values);
  c.repetitions = get_field(doc, "repetitions", defaults.repetitions);
  c.c1 = get_field(doc, "c1", defaults.c1);
  c.c2 = get_field(doc, "c2", defaults.c2);
  c.snr = get_field(doc, "snr", defaults.snr);
  c.mse_n = get_field(doc, "mse_n", defaults.mse_n);
  c.mse_repetitions = get_field(doc, "mse_repetitions", defaults.mse_repetitions);
  c.lambda_grid.lo_exp = get_field(doc, "lambda_lo", defaults.lambda_grid.lo_exp);
  c.lambda_grid.hi_exp = get_field(doc, "lambda_hi", defaults.lambda_grid.hi_exp);
  c.lambda_grid.count = get_field(doc, "lambda_count", defaults.lambda_grid.count);
  c.lambda_grid.include_zero = get_field(doc, "lambda_zero", defaults.lambda_grid.include_zero);
  c.estimators = get_field(doc, "estimators", defaults.estimators);
  c.clipped_c0 = get_field(doc, "clipped_c0", defaults.clipped_c0);
  c.mc_samples = get_field(doc, "mc_samples", defaults.mc_samples);
  c.output_dir = get_field(doc, "output_dir", defaults.output_dir);
  c.validate();
  return c;
}

int knn_k(std::size_t n, double c1) {
  return std::max(1, static_cast<int>(std::floor(c1 * log_factor(n))));
}

double eps_radius(std::size_t n, double c2) {
  return c2 * std::sqrt(log_factor(n) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------

std::vector<TvRow> tv_estimation_sweep(const ExperimentConfig& config) {
  config.validate();
  using asymptotics::GraphKind;
  const auto ball = default_ball();
  struct Task {
    std::size_t model = 0;
    std::size_t n = 0;
    int rep = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < config.models.size(); ++m)
    for (const auto n : config.n_values)
      for (int r = 0; r < config.repetitions; ++r) tasks.push_back({m, n, r});

  std::vector<asymptotics::Prediction> refs;
  for (const auto model : config.models) {
    for (const auto kind : {GraphKind::Voronoi, GraphKind::Epsilon, GraphKind::Knn}) {
      refs.push_back(asymptotics::limit_prediction(kind, ball, model_density(model), 2));
    }
  }

  std::vector<std::vector<TvRow>> out(tasks.size());
  parallel_tasks(tasks.size(), [&](std::size_t t) {
    const auto& task = tasks[t];
    const SamplingModel model = config.models[task.model];
    const auto seed = stream_seed(config.seed, {0, static_cast<std::uint64_t>(model), task.n,
                                                static_cast<std::uint64_t>(task.rep)});
    const auto points = sample_design(model, task.n, seed);
    std::vector<double> f(points.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = f0_indicator_ball(points[i]);
    const double n = static_cast<double>(task.n);

    auto row = [&](const char* graph, double param, double dtv, double scale, std::size_t kind) {
      const auto& ref = refs[task.model * 3 + kind];
      TvRow r;
      r.model = model_name(model);
      r.graph = graph;
      r.n = task.n;
      r.rep = task.rep;
      r.seed = seed;
      r.param = param;
      r.dtv = dtv;
      r.rescaled_dtv = dtv / scale;
      r.reference = ref.value;
      r.heuristic = ref.heuristic;
      out[t].push_back(r);
    };

    const auto diagram = voronoi(points);
    row("voronoi", 0.0, discrete_tv(build_voronoi_graph(diagram, ExactVoronoi{}), f), 1.0, 0);
    const double eps = eps_radius(task.n, config.c2);
    row("eps", eps, discrete_tv(build_eps_graph(points, eps), f), n * n * std::pow(eps, 3), 1);
    const int k = knn_k(task.n, config.c1);
    const double eps_bar = std::sqrt(static_cast<double>(k) / n);
    row("knn", k, discrete_tv(build_knn_graph(points, k), f), n * n * std::pow(eps_bar, 3), 2);
  });

  std::vector<TvRow> rows;
  for (auto& v : out) std::move(v.begin(), v.end(), std::back_inserter(rows));
  return rows;
}

void write_tv_csv(std::ostream& os, const std::vector<TvRow>& rows) {
  os << "model,graph,n,rep,seed,param,dtv,rescaled_dtv,reference,heuristic\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.graph << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
       << csv_double(r.param) << ',' << csv_double(r.dtv) << ',' << csv_double(r.rescaled_dtv)
       << ',' << csv_double(r.reference) << ',' << (r.heuristic ? 1 : 0) << '\n';
  }
  if (!os) throw IoError("failed writing TV sweep CSV");
}

std::vector<MseRow> mse_sweep(const ExperimentConfig& config) {
  config.validate();
  struct Task {
    std::size_t model = 0;
    int rep = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < config.models.size(); ++m)
    for (int r = 0; r < config.mse_repetitions; ++r) tasks.push_back({m, r});

  std::vector<std::vector<MseRow>> out(tasks.size());
  parallel_tasks(tasks.size(), [&](std::size_t t) {
    const auto& task = tasks[t];
    const SamplingModel model = config.models[task.model];
    const std::size_t n = config.mse_n;
    const auto seed = stream_seed(config.seed, {1, static_cast<std::uint64_t>(model), n,
                                                static_cast<std::uint64_t>(task.rep)});
    const auto mc_seed = stream_seed(seed, {2});
    const auto data = simulate_dataset(model, n, config.snr, seed);
    const auto truth = truth_at(data);
    const VoronoiDiagram diagram = voronoi(data.points);

    auto base_row = [&](const std::string& estimator, double param) {
      MseRow r;
      r.model = model_name(model);
      r.estimator = estimator;
      r.n = n;
      r.rep = task.rep;
      r.seed = seed;
      r.param = param;
      return r;
    };

    for (const auto& name : config.estimators) {
      if (name == "wavelet") {
        const int level = wavelet_max_level(n, 2);
        const double scale = data.sigma / std::sqrt(static_cast<double>(n));
        for (const double thr : config.lambda_grid.values(scale)) {
          const auto fit = fit_wavelet(data, thr, level);
          auto r = base_row(name, level);
          r.lambda = thr;
          r.df = fit.num_coefficients() + 1;
          std::vector<double> fitted(n);
          for (std::size_t i = 0; i < n; ++i) fitted[i] = fit.evaluate(data.points[i]);
          r.l2pn = l2_pn_error(fitted, truth);
          const auto mc = l2_p_error([&](const Point2& p) { return fit.evaluate(p); }, data.truth,
                                     model, config.mc_samples, mc_seed);
          r.l2p = mc.value;
          r.l2p_se = mc.std_error;
          out[t].push_back(r);
        }
        continue;
      }
      WeightScheme scheme;
      double param = 0.0;
      if (name == "voronoi") {
        scheme = ExactVoronoi{};
      } else if (name == "voronoi-unit") {
        scheme = UnitVoronoi{};
      } else if (name == "voronoi-clipped") {
        scheme = ClippedVoronoi{config.clipped_c0};
        param = config.clipped_c0;
      } else if (name == "eps") {
        param = eps_radius(n, config.c2);
        scheme = Epsilon{param};
      } else {
        const int k = knn_k(n, config.c1);
        param = k;
        scheme = Knn{k};
      }
      const auto graph = build_graph(data.points, scheme, &diagram);
      const double wbar = graph.num_edges() ? graph.mean_weight() : 1.0;
      WarmStart warm;
      for (const double lambda : config.lambda_grid.values(data.sigma / wbar)) {
        const auto est = fit_on_graph(data, graph, lambda, {}, &warm);
        auto r = base_row(name, param);
        r.lambda = lambda;
        r.df = df_estimate(est.fit);
        r.l2pn = l2_pn_error(est.fit.theta, truth);
        const auto mc = l2_p_error([&](const Point2& p) { return est.fn.evaluate(p); },
                                   data.truth, model, config.mc_samples, mc_seed);
        r.l2p = mc.value;
        r.l2p_se = mc.std_error;
        r.converged = est.fit.diagnostics.converged;
        r.kkt = est.fit.diagnostics.kkt_residual;
        r.iterations = est.fit.diagnostics.iterations;
        out[t].push_back(r);
      }
    }
  });

  std::vector<MseRow> rows;
  for (auto& v : out) std::move(v.begin(), v.end(), std::back_inserter(rows));
  return rows;
}

void write_mse_csv(std::ostream& os, const std::vector<MseRow>& rows) {
  os << "model,estimator,n,rep,seed,param,lambda,df,l2pn,l2p,l2p_se,converged,kkt,iterations\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.estimator << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
       << csv_double(r.param) << ',' << csv_double(r.lambda) << ',' << r.df << ','
       << csv_double(r.l2pn) << ',' << csv_double(r.l2p) << ',' << csv_double(r.l2p_se) << ','
       << (r.converged ? 1 : 0) << ',' << csv_double(r.kkt) << ',' << r.iterations << '\n';
  }
  if (!os) throw IoError("failed writing MSE sweep CSV");
}

// ---------------------------------------------------------------------------

Calibration calibrate_graph_constants(std::size_t n, int repetitions, std::uint64_t seed) {
  if (n < 10 || repetitions < 1) throw BadConfig("calibration needs n >= 10 and repetitions >= 1");
  const double nd = static_cast<double>(n);
  std::vector<std::vector<Point2>> designs(repetitions);
  std::vector<double> vdeg(repetitions);
  parallel_tasks(designs.size(), [&](std::size_t r) {
    designs[r] = sample_design(SamplingModel::Uniform, n, stream_seed(seed, {3, n, r}));
    vdeg[r] = 2.0 * static_cast<double>(voronoi(designs[r]).facets().size()) / nd;
  });
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto mean_degree = [&](auto&& build) {
    std::vector<double> deg(designs.size());
    for (std::size_t r = 0; r < designs.size(); ++r) {
      deg[r] = 2.0 * static_cast<double>(build(designs[r]).num_edges()) / nd;
    }
    return mean(deg);
  };

  Calibration cal;
  cal.n = n;
  cal.repetitions = repetitions;
  cal.voronoi_degree = mean(vdeg);
  const double L = log_factor(n);

  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k < static_cast<int>(std::min<std::size_t>(n, 64)); ++k) {
    const double deg = mean_degree([k](const auto& p) { return build_knn_graph(p, k); });
    const double gap = std::abs(deg - cal.voronoi_degree);
    if (gap < best_gap) {
      best_gap = gap;
      cal.k = k;
      cal.knn_degree = deg;
    }
    if (deg > cal.voronoi_degree) break;
  }
  // Mid-point of the c1 interval that floors to k.
  cal.c1 = (cal.k + 0.5) / L;

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double deg = mean_degree([mid](const auto& p) { return build_eps_graph(p, mid); });
    (deg < cal.voronoi_degree ? lo : hi) = mid;
  }
  cal.eps = 0.5 * (lo + hi);
  cal.eps_degree = mean_degree([&](const auto& p) { return build_eps_graph(p, cal.eps); });
  cal.c2 = cal.eps / std::sqrt(L / nd);
  return cal;
}

RateStudy rate_study(const std::vector<std::size_t>& n_values, int repetitions,
                     std::uint64_t seed, const LambdaGrid& grid, double snr) {
  if (n_values.size() < 2 || repetitions < 1) {
    throw BadConfig("rate study needs >= 2 sizes and >= 1 repetition");
  }
  const std::size_t reps = static_cast<std::size_t>(repetitions);
  std::vector<double> best(n_values.size() * reps);
  parallel_tasks(best.size(), [&](std::size_t t) {
    const std::size_t n = n_values[t / reps];
    const auto data = simulate_dataset(SamplingModel::Uniform, n, snr,
                                       stream_seed(seed, {4, n, t % reps}));
    const auto truth = truth_at(data);
    const auto graph = build_voronoi_graph(voronoi(data.points), UnitVoronoi{});
    WarmStart warm;
    double b = std::numeric_limits<double>::infinity();
    for (const double lambda : grid.values(data.sigma / graph.mean_weight())) {
      const auto fit = tv_denoise(graph, data.y, lambda, {}, &warm);
      b = std::min(b, l2_pn_error(fit.theta, truth));
    }
    best[t] = b;
  });

  RateStudy study;
  study.n_values = n_values;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      s += best[i * reps + r];
      s2 += best[i * reps + r] * best[i * reps + r];
    }
    const double m = s / static_cast<double>(reps);
    const double var = reps > 1 ? (s2 - s * m) / static_cast<double>(reps - 1) : 0.0;
    study.mean_risk.push_back(m);
    study.std_error.push_back(std::sqrt(std::max(0.0, var) / static_cast<double>(reps)));
    lx.push_back(std::log(static_cast<double>(n_values[i])));
    ly.push_back(std::log(m));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  study.slope = sxy / sxx;
  return study;
}

// ---------------------------------------------------------------------------

std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

json run_manifest(const ExperimentConfig& config, const std::string& command,
                  const std::vector<std::string>& output_paths) {
  json doc;
  doc["version"] = std::string(version());
  doc["command"] = command;
  doc["config"] = to_json(config);
  doc["config_hash"] = git_blob_hash(doc["config"].dump());
  const auto& lc = asymptotics::limit_constants(2);
  doc["constants"] = {{"d", lc.d},
                      {"eta", lc.eta_dm2},
                      {"leb", lc.leb_d},
                      {"c_d", lc.c_d},
                      {"c_d_error", lc.c_d_error},
                      {"sigma_eps", lc.sigma_eps},
                      {"sigma_eps_error", lc.sigma_eps_error}};
  json preds = json::object();
  const auto ball = default_ball();
  for (const auto model : config.models) {
    json entry;
    const std::pair<const char*, asymptotics::GraphKind> kinds[] = {
        {"voronoi", asymptotics::GraphKind::Voronoi},
        {"eps", asymptotics::GraphKind::Epsilon},
        {"knn", asymptotics::GraphKind::Knn}};
    for (const auto& [name, kind] : kinds) {
      const auto p = asymptotics::limit_prediction(kind, ball, model_density(model), 2);
      entry[name] = {{"value", p.value}, {"error", p.error}, {"heuristic", p.heuristic}};
    }
    preds[model_name(model)] = entry;
  }
  doc["predictions"] = preds;
  json outputs = json::object();
  for (const auto& path : output_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("manifest: cannot read output '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    outputs[path] = git_blob_hash(ss.str());
  }
  doc["outputs"] = outputs;
  return doc;
}

}  // namespace voronoigram::experiments
