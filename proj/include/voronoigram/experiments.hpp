#pragma once

// Simulation studies: discrete TV convergence over growing designs, risk
// versus degrees of freedom along lambda paths, and the run manifest.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "voronoigram/estimators.hpp"
#include "voronoigram/sampling.hpp"

namespace voronoigram::experiments {

/// Multipliers 10^{lo}, ..., 10^{hi} (count points, log-spaced) applied to a
/// per-fit scale; optionally followed by lambda = 0.
struct LambdaGrid {
  double lo_exp = -2.5;
  double hi_exp = 1.5;
  int count = 20;
  bool include_zero = true;

  /// Descending values scale * 10^{...}, then 0 if requested.
  std::vector<double> values(double scale) const;
};

/// Frozen by calibrate_graph_constants at n = 1274, seed 20210501.
inline constexpr double kDefaultC1 = 0.631876;
inline constexpr double kDefaultC2 = 0.468371;

struct ExperimentConfig {
  std::uint64_t seed = 20210501;
  std::vector<SamplingModel> models{SamplingModel::Uniform, SamplingModel::LowTube,
                                    SamplingModel::HighTube};
  /// TV sweep sizes; default is 10 log-spaced values from 1e2 to 1e5.
  std::vector<std::size_t> n_values;
  int repetitions = 20;
  double c1 = kDefaultC1;
  double c2 = kDefaultC2;
  double snr = 1.0;
  std::size_t mse_n = 1274;
  int mse_repetitions = 5;
  LambdaGrid lambda_grid;
  /// Any of voronoi, voronoi-unit, voronoi-clipped, eps, knn, wavelet.
  std::vector<std::string> estimators{"voronoi", "voronoi-unit", "eps", "knn"};
  double clipped_c0 = 1.0;
  std::size_t mc_samples = 20000;
  std::string output_dir = "results";

  ExperimentConfig();
  /// Throws BadConfig.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw
/// BadConfig. The result is validated.
ExperimentConfig config_from_json(const nlohmann::json& doc);

std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, int count);

/// floor(c1 log^{1.1} n), at least 1.
int knn_k(std::size_t n, double c1);
/// c2 (log^{1.1} n / n)^{1/2}.
double eps_radius(std::size_t n, double c2);

// ---------------------------------------------------------------------------

struct TvRow {
  std::string model;
  std::string graph;  ///< voronoi, eps, knn
  std::size_t n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double param = 0.0;  ///< eps radius or k; 0 for voronoi
  double dtv = 0.0;
  double rescaled_dtv = 0.0;
  double reference = 0.0;
  bool heuristic = false;
};

/// For every (model, n, rep): DTV of f0 over the design on the exact-weight
/// Voronoi graph, the eps graph and the kNN graph. Rescaling is n^2 eps^3 for
/// eps and n^2 (k/n)^{3/2} for kNN; Voronoi is reported unscaled. Rows are
/// ordered by (model, n, rep, graph) and do not depend on the thread count.
std::vector<TvRow> tv_estimation_sweep(const ExperimentConfig& config);

void write_tv_csv(std::ostream& os, const std::vector<TvRow>& rows);

struct MseRow {
  std::string model;
  std::string estimator;
  std::size_t n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double param = 0.0;  ///< eps, k, c0 or 0
  double lambda = 0.0;
  std::size_t df = 0;
  double l2pn = 0.0;
  double l2p = 0.0;
  double l2p_se = 0.0;
  bool converged = true;
  double kkt = 0.0;
  int iterations = 0;
};

/// For every (model, rep) at n = mse_n: each estimator along its lambda grid
/// (descending, warm-started), recording df, L2(Pn) and Monte Carlo L2(P)
/// risk. Graph estimators use the scale sigma / mean weight; the wavelet
/// estimator thresholds at sigma n^{-1/2} times the grid.
std::vector<MseRow> mse_sweep(const ExperimentConfig& config);

void write_mse_csv(std::ostream& os, const std::vector<MseRow>& rows);

// ---------------------------------------------------------------------------

struct Calibration {
  std::size_t n = 0;
  int repetitions = 0;
  double voronoi_degree = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  int k = 0;
  double knn_degree = 0.0;
  double eps = 0.0;
  double eps_degree = 0.0;
};

/// Chooses c1, c2 so that the mean kNN and eps graph degrees match the mean
/// Voronoi degree over uniform designs of size n.
Calibration calibrate_graph_constants(std::size_t n = 1274, int repetitions = 20,
                                      std::uint64_t seed = 20210501);

struct RateStudy {
  std::vector<std::size_t> n_values;
  std::vector<double> mean_risk;  ///< mean over reps of the best L2(Pn) risk on the grid
  std::vector<double> std_error;
  double slope = 0.0;  ///< least-squares slope of log risk against log n
};

/// Unit-weight Voronoigram under the uniform design at SNR `snr`.
RateStudy rate_study(const std::vector<std::size_t>& n_values, int repetitions,
                     std::uint64_t seed, const LambdaGrid& grid = {}, double snr = 1.0);

// ---------------------------------------------------------------------------

/// Lowercase hex SHA-1 of "blob <size>\0<content>".
std::string git_blob_hash(const std::string& content);

/// {version, command, config, constants, predictions, config_hash, outputs:
/// {path: blob hash}}.
nlohmann::json run_manifest(const ExperimentConfig& config, const std::string& command,
                            const std::vector<std::string>& output_paths);

}  // namespace voronoigram::experiments
