#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voronoigram/errors.hpp"
#include "voronoigram/estimators.hpp"
#include "voronoigram/experiments.hpp"
#include "voronoigram/parallel.hpp"
#include "voronoigram/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voronoigram;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

void report_error(const std::string& kind, const std::string& message, json extra = {}) {
  json doc = {{"error", kind}, {"message", message}};
  if (extra.is_object()) doc.update(extra);
  std::cerr << doc.dump() << '\n';
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

double parse_number(const std::string& token, const std::string& where) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw IoError(where + ": cannot parse number '" + token + "'");
  }
  return v;
}

struct DataFile {
  std::vector<Point2> points;
  std::vector<double> y;
};

DataFile read_data_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,response") throw IoError(path + ": expected header 'x,y,response'");
  DataFile data;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = path + ":" + std::to_string(row);
    if (cells.size() != 3) throw IoError(where + ": expected 3 columns");
    data.points.push_back({parse_number(cells[0], where), parse_number(cells[1], where)});
    data.y.push_back(parse_number(cells[2], where));
  }
  if (data.points.empty()) throw IoError(path + ": no data rows");
  return data;
}

std::vector<double> read_values(const std::string& path) {
  auto is = open_in(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    json doc;
    try {
      is >> doc;
      return doc.at("theta").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
  }
  std::vector<double> values;
  std::string token;
  while (is >> token) values.push_back(parse_number(token, path));
  return values;
}

TvFit read_fit_json(const std::string& path) {
  auto is = open_in(path);
  TvFit fit;
  try {
    json doc;
    is >> doc;
    fit.lambda = doc.at("lambda").get<double>();
    fit.theta = doc.at("theta").get<std::vector<double>>();
    fit.labels = doc.at("labels").get<std::vector<std::int32_t>>();
    fit.num_components = doc.at("K").get<std::size_t>();
    fit.diagnostics.fuse_tol = doc.value("fuse_tol", default_fuse_tol(fit.theta));
    fit.diagnostics.kkt_residual = doc.value("kkt_residual", 0.0);
    fit.diagnostics.iterations = doc.value("iterations", 0);
    fit.diagnostics.converged = doc.value("converged", true);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return fit;
}

experiments::ExperimentConfig load_config(const std::string& source) {
  if (source.empty() || source == "default") return {};
  auto is = open_in(source);
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw BadConfig(source + ": " + e.what());
  }
  return experiments::config_from_json(doc);
}

void write_manifest(const std::string& path, const experiments::ExperimentConfig& config,
                    const std::string& command, const std::vector<std::string>& outputs) {
  auto os = open_out(path);
  os << experiments::run_manifest(config, command, outputs).dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest '" + path + "'");
}

// Flags shared by the sweep subcommands; unset flags leave the config alone.
struct SweepFlags {
  std::string config = "default";
  std::string out;
  std::string manifest;
  std::uint64_t seed = 0;
  int reps = 0;
  std::vector<std::size_t> n;
  std::vector<std::string> models;
  std::vector<std::string> estimators;
  double c1 = 0.0, c2 = 0.0, snr = 0.0;
  std::size_t mse_n = 0, mc_samples = 0;
  std::string out_dir;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub, bool mse) {
    app = sub;
    sub->add_option("--config", config, "JSON config file, or 'default'");
    sub->add_option("--out", out, "output CSV (default <output_dir>/<name>.csv)");
    sub->add_option("--manifest", manifest, "run manifest path (default <out>.manifest.json)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
    sub->add_option("--models", models, "uniform, lowtube, hightube");
    sub->add_option("--c1", c1, "kNN constant: k = floor(c1 log^1.1 n)");
    sub->add_option("--c2", c2, "eps constant: eps = c2 (log^1.1 n / n)^1/2");
    sub->add_option("--output-dir", out_dir, "output directory");
    if (mse) {
      sub->add_option("--n", mse_n, "sample size");
      sub->add_option("--snr", snr, "signal-to-noise ratio");
      sub->add_option("--estimators", estimators,
                      "voronoi, voronoi-unit, voronoi-clipped, eps, knn, wavelet");
      sub->add_option("--mc-samples", mc_samples, "Monte Carlo draws for L2(P) risk");
    } else {
      sub->add_option("--n", n, "sample sizes");
    }
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  experiments::ExperimentConfig resolve(bool mse) const {
    auto c = load_config(config);
    if (given("--seed")) c.seed = seed;
    if (given("--reps")) (mse ? c.mse_repetitions : c.repetitions) = reps;
    if (given("--models")) {
      c.models.clear();
      for (const auto& m : models) c.models.push_back(parse_model(m));
    }
    if (given("--c1")) c.c1 = c1;
    if (given("--c2")) c.c2 = c2;
    if (given("--output-dir")) c.output_dir = out_dir;
    if (mse) {
      if (given("--n")) c.mse_n = mse_n;
      if (given("--snr")) c.snr = snr;
      if (given("--estimators")) c.estimators = estimators;
      if (given("--mc-samples")) c.mc_samples = mc_samples;
    } else if (given("--n")) {
      c.n_values = n;
    }
    c.validate();
    return c;
  }

  std::string csv_path(const experiments::ExperimentConfig& c, const char* name) const {
    return out.empty() ? (fs::path(c.output_dir) / name).string() : out;
  }
  std::string manifest_path(const std::string& csv) const {
    return manifest.empty() ? csv + ".manifest.json" : manifest;
  }
};

const char* kFormats = R"(Formats:
  data CSV     header "x,y,response", one design point per row
  graph file   "n m" then m lines "i j w" (1-based, shortest round-trip weights)
  fit JSON     {lambda, theta[], labels[], K, kkt_residual, iterations, converged,
                polished, objective, fuse_tol}
  TV sweep     model,graph,n,rep,seed,param,dtv,rescaled_dtv,reference,heuristic
  MSE sweep    model,estimator,n,rep,seed,param,lambda,df,l2pn,l2p,l2p_se,converged,
               kkt,iterations
  manifest     {version, command, config, config_hash, constants, predictions, outputs}
Errors are reported on stderr as {"error": kind, "message": ...}.
Threads: --threads, else VORONOIGRAM_THREADS, else all cores.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voronoigram: graph total variation denoising over Voronoi and geometric graphs"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));
  int threads = 0;
  app.add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "simulate a design with noisy ball-indicator responses");
  std::string gen_model = "uniform", gen_out;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  double gen_snr = 1.0;
  gen->add_option("--model", gen_model, "uniform, lowtube or hightube");
  gen->add_option("--n", gen_n, "number of points")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "seed")->required();
  gen->add_option("--snr", gen_snr, "signal-to-noise ratio")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit TV denoising on a graph over the data");
  std::string fit_graph = "voronoi", fit_in, fit_out, fit_svg, fit_save_graph;
  double fit_lambda = 0.0, fit_eps = 0.0, fit_c0 = 1.0;
  int fit_k = 0;
  fit->add_option("--graph", fit_graph, "voronoi|voronoi-unit|voronoi-clipped|eps|knn")
      ->check(CLI::IsMember({"voronoi", "voronoi-unit", "voronoi-clipped", "eps", "knn"}));
  fit->add_option("--lambda", fit_lambda, "penalty")->required()->check(CLI::NonNegativeNumber);
  fit->add_option("--in", fit_in, "data CSV")->required();
  fit->add_option("--out", fit_out, "fit JSON")->required();
  fit->add_option("--eps", fit_eps, "eps radius (default from c2)");
  fit->add_option("--k", fit_k, "kNN size (default from c1)");
  fit->add_option("--c0", fit_c0, "clipped Voronoi weight floor constant");
  fit->add_option("--svg", fit_svg, "render the extrapolant");
  fit->add_option("--save-graph", fit_save_graph, "write the graph file");

  // dtv
  auto* dtv = app.add_subcommand("dtv", "discrete TV of values over a stored graph");
  std::string dtv_graph, dtv_values;
  dtv->add_option("--graph-file", dtv_graph, "graph file")->required();
  dtv->add_option("--values", dtv_values, "whitespace-separated values or fit JSON")->required();

  // constants
  auto* constants = app.add_subcommand("constants", "limit constants in dimension d");
  int const_d = 2;
  constants->add_option("--d", const_d, "dimension")->check(CLI::Range(2, 16));

  // sweeps
  auto* sweep_tv = app.add_subcommand("sweep-tv", "discrete TV of f0 over growing designs");
  SweepFlags tv_flags;
  tv_flags.attach(sweep_tv, false);
  auto* sweep_mse = app.add_subcommand("sweep-mse", "risk versus df along lambda paths");
  SweepFlags mse_flags;
  mse_flags.attach(sweep_mse, true);

  // render
  auto* render = app.add_subcommand("render", "SVG of a stored fit over its data");
  std::string render_in, render_fit, render_out;
  render->add_option("--in", render_in, "data CSV")->required();
  render->add_option("--fit", render_fit, "fit JSON")->required();
  render->add_option("--out", render_out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return kExitUsage;
  }

  try {
    par::set_threads(par::resolve_threads(threads));

    if (*gen) {
      const auto data = simulate_dataset(parse_model(gen_model), gen_n, gen_snr, gen_seed);
      auto os = open_out(gen_out);
      os << "x,y,response\n";
      for (std::size_t i = 0; i < data.points.size(); ++i) {
        os << format_double(data.points[i].x) << ',' << format_double(data.points[i].y) << ','
           << format_double(data.y[i]) << '\n';
      }
      if (!os) throw IoError("failed writing '" + gen_out + "'");
      return 0;
    }

    if (*fit) {
      const auto file = read_data_csv(fit_in);
      RegressionDataset data;
      data.points = file.points;
      data.y = file.y;
      data.validate();
      const std::size_t n = data.points.size();
      std::optional<VoronoiDiagram> diagram;
      auto need_diagram = [&]() -> const VoronoiDiagram& {
        if (!diagram) diagram = voronoi(data.points);
        return *diagram;
      };
      WeightScheme scheme;
      if (fit_graph == "voronoi") {
        scheme = ExactVoronoi{};
      } else if (fit_graph == "voronoi-unit") {
        scheme = UnitVoronoi{};
      } else if (fit_graph == "voronoi-clipped") {
        scheme = ClippedVoronoi{fit_c0};
      } else if (fit_graph == "eps") {
        scheme = Epsilon{fit->count("--eps") ? fit_eps
                                             : experiments::eps_radius(n, experiments::kDefaultC2)};
      } else {
        scheme = Knn{fit->count("--k") ? fit_k : experiments::knn_k(n, experiments::kDefaultC1)};
      }
      const bool voronoi_based = fit_graph.rfind("voronoi", 0) == 0;
      const auto graph =
          build_graph(data.points, scheme, voronoi_based ? &need_diagram() : nullptr);
      if (!fit_save_graph.empty()) {
        auto os = open_out(fit_save_graph);
        save_graph(os, graph);
      }
      const auto result = tv_denoise(graph, data.y, fit_lambda);
      if (voronoi_based) {
        // Exact facet lengths against the clipping floor c0 n^{-1/2}.
        const double floor = fit_c0 / std::sqrt(static_cast<double>(n));
        double min_len = INFINITY;
        std::size_t below = 0;
        for (const auto& f : need_diagram().facets()) {
          min_len = std::min(min_len, f.length);
          below += f.length < floor;
        }
        std::cout << json{{"facets", need_diagram().facets().size()},
                          {"min_facet_length", need_diagram().facets().empty() ? json(nullptr) : json(min_len)},
                          {"clip_floor", floor},
                          {"facets_below_floor", below}}
                         .dump()
                  << '\n';
      }
      {
        auto os = open_out(fit_out);
        write_fit_json(os, result);
        if (!os) throw IoError("failed writing '" + fit_out + "'");
      }
      if (!fit_svg.empty()) {
        auto os = open_out(fit_svg);
        render_fit_svg(os, need_diagram(), result);
        if (!os) throw IoError("failed writing '" + fit_svg + "'");
      }
      if (!result.diagnostics.converged) {
        report_error("NonConvergence", "solver did not reach its tolerances",
                     {{"iterations", result.diagnostics.iterations},
                      {"primal_residual", result.diagnostics.primal_residual},
                      {"dual_residual", result.diagnostics.dual_residual},
                      {"kkt_residual", result.diagnostics.kkt_residual}});
        return kExitNotConverged;
      }
      return 0;
    }

    if (*dtv) {
      auto is = open_in(dtv_graph);
      const auto graph = load_graph(is);
      const auto values = read_values(dtv_values);
      std::cout << json{{"dtv", discrete_tv(graph, values)}}.dump() << '\n';
      return 0;
    }

    if (*constants) {
      const auto& c = asymptotics::limit_constants(const_d);
      json doc = {{"d", c.d},
                  {"eta", c.eta_dm2},
                  {"leb", c.leb_d},
                  {"c_d", c.c_d},
                  {"c_d_error", c.c_d_error},
                  {"sigma_eps", c.sigma_eps},
                  {"sigma_eps_error", c.sigma_eps_error}};
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (*sweep_tv) {
      const auto config = tv_flags.resolve(false);
      const auto rows = experiments::tv_estimation_sweep(config);
      const auto csv = tv_flags.csv_path(config, "tv_sweep.csv");
      {
        auto os = open_out(csv);
        experiments::write_tv_csv(os, rows);
      }
      write_manifest(tv_flags.manifest_path(csv), config, "sweep-tv", {csv});
      return 0;
    }

    if (*sweep_mse) {
      const auto config = mse_flags.resolve(true);
      const auto rows = experiments::mse_sweep(config);
      const auto csv = mse_flags.csv_path(config, "mse_sweep.csv");
      {
        auto os = open_out(csv);
        experiments::write_mse_csv(os, rows);
      }
      write_manifest(mse_flags.manifest_path(csv), config, "sweep-mse", {csv});
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.converged ? 0 : 1;
      if (failed > 0) {
        report_error("NonConvergence", "some fits did not converge",
                     {{"failed_fits", failed}, {"total_fits", rows.size()}});
        return kExitNotConverged;
      }
      return 0;
    }

    if (*render) {
      const auto file = read_data_csv(render_in);
      const auto stored = read_fit_json(render_fit);
      const auto diagram = voronoi(file.points);
      auto os = open_out(render_out);
      const auto summary = render_fit_svg(os, diagram, stored);
      if (!os) throw IoError("failed writing '" + render_out + "'");
      std::cout << json{{"regions", summary.regions}, {"components", summary.components}}.dump()
                << '\n';
      return 0;
    }
  } catch (const Error& e) {
    report_error(e.kind(), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return kExitError;
  }
  return 0;
}
