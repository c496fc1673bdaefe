#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "voronoigram/errors.hpp"
#include "voronoigram/experiments.hpp"
#include "voronoigram/parallel.hpp"

using namespace voronoigram;
using namespace voronoigram::experiments;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n_values = {100, 300};
  c.repetitions = 2;
  c.mse_n = 300;
  c.mse_repetitions = 1;
  c.models = {SamplingModel::Uniform};
  c.mc_samples = 2000;
  c.lambda_grid.count = 8;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("annulus masses and densities") {
  CHECK(annulus_mass(SamplingModel::Uniform) == doctest::Approx(0.1 * std::numbers::pi));
  CHECK(annulus_mass(SamplingModel::LowTube) == doctest::Approx(0.295 * 0.1 * std::numbers::pi));
  CHECK(density_at(SamplingModel::LowTube, {0.05, 0.05}) == doctest::Approx(1.32294).epsilon(1e-5));
  CHECK(density_at(SamplingModel::HighTube, {0.05, 0.05}) == doctest::Approx(0.908387).epsilon(1e-5));
  CHECK(density_at(SamplingModel::HighTube, {0.5, 0.75}) == 1.2);
  CHECK(density_at(SamplingModel::Uniform, {0.3, 0.3}) == 1.0);
}

TEST_CASE("truth and noise level") {
  CHECK(f0_indicator_ball({0.5, 0.5}) == 1.0);
  CHECK(f0_indicator_ball({0.9, 0.9}) == 0.0);
  CHECK(ball_probability(SamplingModel::Uniform) == doctest::Approx(std::numbers::pi / 16));
  const double pu = std::numbers::pi / 16;
  CHECK(noise_sigma(SamplingModel::Uniform, 1.0) == doctest::Approx(std::sqrt(pu * (1 - pu))).epsilon(1e-14));
  CHECK(noise_sigma(SamplingModel::Uniform, 1.0) == doctest::Approx(0.39724).epsilon(1e-5));
  const double out = (1 - 1.2 * 0.1 * std::numbers::pi) / (1 - 0.1 * std::numbers::pi);
  CHECK(ball_probability(SamplingModel::HighTube) ==
        doctest::Approx(1.2 * std::numbers::pi * (0.0625 - 0.0225) + out * std::numbers::pi * 0.0225));
  CHECK(noise_sigma(SamplingModel::Uniform, 4.0) == doctest::Approx(std::sqrt(pu * (1 - pu)) / 2).epsilon(1e-14));
}

TEST_CASE("design sampling") {
  const std::size_t n = 1000000;
  for (const auto model : {SamplingModel::Uniform, SamplingModel::LowTube, SamplingModel::HighTube}) {
    const auto pts = sample_design(model, n, 99);
    std::size_t inside = 0;
    bool open = true;
    for (const auto& p : pts) {
      open = open && p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
      const double r = std::hypot(p.x - 0.5, p.y - 0.5);
      inside += r >= 0.15 && r <= 0.35;
    }
    CHECK(open);
    const double m = annulus_mass(model);
    CHECK(std::abs(static_cast<double>(inside) - n * m) <= 4 * std::sqrt(n * m * (1 - m)));
  }
  const auto a = sample_design(SamplingModel::HighTube, 100, 5);
  CHECK(a == sample_design(SamplingModel::HighTube, 100, 5));
  CHECK(a != sample_design(SamplingModel::HighTube, 100, 6));
}

TEST_CASE("model names and stream seeds") {
  CHECK(parse_model("lowtube") == SamplingModel::LowTube);
  CHECK(parse_model("high-tube") == SamplingModel::HighTube);
  CHECK(model_name(SamplingModel::Uniform) == "uniform");
  CHECK_THROWS(parse_model("gaussian"));
  CHECK(stream_seed(1, {0, 1}) != stream_seed(1, {1, 0}));
  CHECK(stream_seed(1, {0, 1}) == stream_seed(1, {0, 1}));
  CHECK(stream_seed(1, {2}) != stream_seed(2, {2}));
}

TEST_CASE("disc rectangle area") {
  CHECK(disc_rectangle_area(0.5, 0.5, 0.25, 0, 1, 0, 1) == doctest::Approx(std::numbers::pi / 16).epsilon(1e-12));
  CHECK(disc_rectangle_area(0.0, 0.0, 0.5, 0, 1, 0, 1) == doctest::Approx(std::numbers::pi / 16).epsilon(1e-12));
  CHECK(disc_rectangle_area(0.5, 0.5, 0.25, 0.5, 1, 0.5, 1) == doctest::Approx(std::numbers::pi / 64).epsilon(1e-12));
  CHECK(disc_rectangle_area(0.5, 0.5, 0.1, 2, 3, 0, 1) == 0.0);
}

TEST_CASE("graph size schedules") {
  const auto ns = log_spaced_sizes(100, 100000, 10);
  REQUIRE(ns.size() == 10);
  CHECK(ns.front() == 100);
  CHECK(ns.back() == 100000);
  CHECK(std::is_sorted(ns.begin(), ns.end()));
  CHECK(knn_k(1274, kDefaultC1) == static_cast<int>(std::floor(kDefaultC1 * std::pow(std::log(1274.0), 1.1))));
  CHECK(knn_k(10, 1e-3) == 1);
  CHECK(eps_radius(1274, 0.5) == doctest::Approx(0.5 * std::sqrt(std::pow(std::log(1274.0), 1.1) / 1274.0)));
}

TEST_CASE("lambda grid") {
  const LambdaGrid g;
  const auto v = g.values(2.0);
  REQUIRE(v.size() == 21);
  CHECK(v.front() == doctest::Approx(2.0 * std::pow(10.0, 1.5)));
  CHECK(v[19] == doctest::Approx(2.0 * std::pow(10.0, -2.5)));
  CHECK(v.back() == 0.0);
  CHECK(std::is_sorted(v.rbegin(), v.rend()));
}

TEST_CASE("config json round trip and errors") {
  const ExperimentConfig c = small_config();
  const auto doc = to_json(c);
  CHECK(to_json(config_from_json(doc)) == doc);
  CHECK(config_from_json(nlohmann::json::object()).repetitions == 20);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"colour", 1}}), BadConfig);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n_values", {5}}}), BadConfig);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"repetitions", 0}}), BadConfig);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"estimators", {"spline"}}}), BadConfig);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"snr", -1.0}}), BadConfig);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), BadConfig);
}

TEST_CASE("tv sweep rows, references and determinism") {
  auto c = small_config();
  c.models = {SamplingModel::Uniform, SamplingModel::HighTube};
  const auto rows = tv_estimation_sweep(c);
  CHECK(rows.size() == 2 * 2 * 2 * 3);
  const asymptotics::BallIndicator ball;
  for (const auto& r : rows) {
    const auto model = parse_model(r.model);
    const auto kind = r.graph == "voronoi" ? asymptotics::GraphKind::Voronoi
                      : r.graph == "eps"   ? asymptotics::GraphKind::Epsilon
                                           : asymptotics::GraphKind::Knn;
    const auto pred = asymptotics::limit_prediction(kind, ball, model_density(model), 2);
    CHECK(r.reference == doctest::Approx(pred.value).epsilon(1e-12));
    CHECK(r.heuristic == (r.graph == "knn"));
    CHECK(r.dtv >= 0.0);
    if (r.graph == "eps") CHECK(r.rescaled_dtv == doctest::Approx(r.dtv / (double(r.n) * r.n * std::pow(r.param, 3))));
  }
  std::ostringstream a, b;
  write_tv_csv(a, rows);
  par::set_threads(3);
  write_tv_csv(b, tv_estimation_sweep(c));
  par::set_threads(par::resolve_threads(0));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("model,graph,n,rep,seed,param,dtv,rescaled_dtv,reference,heuristic\n", 0) == 0);
}

TEST_CASE("mse sweep: interpolation at lambda zero and an interior optimum") {
  auto c = small_config();
  c.mse_n = 600;
  c.lambda_grid.count = 12;
  c.estimators = {"voronoi", "voronoi-unit", "voronoi-clipped", "eps", "knn", "wavelet"};
  const auto rows = mse_sweep(c);
  std::map<std::string, std::vector<MseRow>> by;
  for (const auto& r : rows) by[r.estimator].push_back(r);
  CHECK(by.size() == 6);
  const auto data = simulate_dataset(SamplingModel::Uniform, 600, 1.0, rows.front().seed);
  double noise = 0.0;
  for (std::size_t i = 0; i < 600; ++i) {
    const double e = data.y[i] - f0_indicator_ball(data.points[i]);
    noise += e * e;
  }
  noise /= 600.0;
  for (const auto& [name, rs] : by) {
    if (name == "wavelet") continue;
    REQUIRE(rs.size() == 13);
    CHECK(rs.back().lambda == 0.0);
    CHECK(rs.back().l2pn == doctest::Approx(noise).epsilon(1e-12));
    CHECK(rs.back().df >= rs.front().df);
    const auto best = std::min_element(rs.begin(), rs.end(), [](const auto& x, const auto& y) { return x.l2pn < y.l2pn; });
    CHECK(best != rs.begin());
    CHECK(best != rs.end() - 1);
    for (const auto& r : rs) CHECK(r.converged);
  }
  std::ostringstream os;
  write_mse_csv(os, rows);
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rows.size() + 1));
}

TEST_CASE("rate study on small sizes") {
  LambdaGrid grid;
  grid.count = 8;
  const auto s = rate_study({200, 400}, 2, 7, grid);
  REQUIRE(s.mean_risk.size() == 2);
  CHECK(s.mean_risk[1] < s.mean_risk[0] * 1.5);
  CHECK(std::isfinite(s.slope));
}

TEST_CASE("calibration reproduces the frozen constants") {
  const auto cal = calibrate_graph_constants();
  CHECK(cal.c1 == doctest::Approx(kDefaultC1).epsilon(1e-6));
  CHECK(cal.c2 == doctest::Approx(kDefaultC2).epsilon(1e-5));
  CHECK(std::abs(cal.knn_degree - cal.voronoi_degree) <= 0.5);
  CHECK(std::abs(cal.eps_degree - cal.voronoi_degree) <= 0.05);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("run manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "voronoigram_manifest_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.csv").string();
  std::ofstream(path) << "hello\n";
  const auto c = small_config();
  const auto m = run_manifest(c, "sweep-tv", {path});
  for (const char* key : {"version", "command", "config", "config_hash", "constants", "predictions", "outputs"})
    CHECK(m.contains(key));
  CHECK(m.at("outputs").at(path) == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(to_json(config_from_json(m.at("config"))) == to_json(c));
  CHECK(m.at("config_hash") == run_manifest(c, "sweep-tv", {}).at("config_hash"));
  std::filesystem::remove_all(dir);
}

}
