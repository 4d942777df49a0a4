#pragma once

/** \file experiments.hpp
 *  \brief Parameter sweeps, frontier extraction, trajectories, demand-feature
 *  regression and seeded synthetic markets.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "manifoldrank/core.hpp"
#include "manifoldrank/metrics.hpp"
#include "manifoldrank/rerank.hpp"

namespace manifoldrank {

// ---------------------------------------------------------------------------
// Synthetic data

struct ScoreDistribution {
  enum class Kind { Uniform, LogNormal, PointMassMix };
  Kind kind = Kind::Uniform;
  /// sigma for LogNormal, zero-mass probability p for PointMassMix.
  double parameter = 0.0;

  static ScoreDistribution uniform() { return {Kind::Uniform, 0.0}; }
  static ScoreDistribution lognormal(double sigma) { return {Kind::LogNormal, sigma}; }
  static ScoreDistribution point_mass_mix(double p) { return {Kind::PointMassMix, p}; }

  /// "uniform", "lognormal:1.0", "point_mass_mix:0.3".
  static ScoreDistribution parse(const std::string& text);
  std::string to_string() const;
};

struct GroupSizing {
  enum class Kind { Balanced, Zipf };
  Kind kind = Kind::Balanced;
  double exponent = 0.0;

  static GroupSizing balanced() { return {Kind::Balanced, 0.0}; }
  static GroupSizing zipf(double s) { return {Kind::Zipf, s}; }

  /// "balanced", "zipf:1.1".
  static GroupSizing parse(const std::string& text);
  std::string to_string() const;
};

struct SynthSpec {
  std::size_t users = 200;
  std::size_t items = 500;
  std::size_t groups = 20;
  std::size_t k = 10;
  ScoreDistribution scores = ScoreDistribution::lognormal(1.0);
  GroupSizing sizing = GroupSizing::zipf(1.1);
  std::uint64_t seed = 20240601;
};

/// The 200 x 500 x 20, zipf(1.1), lognormal(1.0) market used for trend checks.
SynthSpec reference_synth_spec();

/// Group sizes in rank order; every group gets at least one item. Throws InvalidSpec.
std::vector<std::size_t> synth_group_sizes(std::size_t items, std::size_t groups,
                                           const GroupSizing& sizing);

/// Reproducible dataset. Items are assigned to groups through a seeded
/// permutation, scores are i.i.d. per (user, item). Throws InvalidSpec.
ScoreDataset synth_dataset(const SynthSpec& spec);

/// `count` 40 x 80 x 8 markets (K = 5) cycling through lognormal, uniform and
/// point-mass score shapes with randomized parameters and zipf exponents.
std::vector<ScoreDataset> synthetic_family(std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepGrid {
  std::vector<double> alpha_values{1.0};
  std::vector<double> beta_values{1.0};
  std::vector<double> a_e_values{1.0};
  std::vector<double> a_s_values{1.0};
  std::vector<double> lambda_values{0.1};
  std::vector<std::string> policies{"manifold_rank"};
  std::vector<std::size_t> k_values{10};

  /// Validity boxes.
  double rate_box = 3.0;
  double demand_min = 0.1;
  double demand_max = 1.0;

  /// Throws InvalidGrid on empty/unsorted lists, |beta| < 1e-6 or out-of-box values.
  void validate() const;
};

/// Identity of one grid point.
struct ConfigId {
  std::size_t index = 0;
  std::string policy;
  std::size_t k = 10;
  double alpha = 1.0;
  double beta = 1.0;
  double a_e = 1.0;
  double a_s = 1.0;
  double lambda = 0.0;

  TaxationParams params() const { return {alpha, beta, a_e, a_s, k}; }
  Policy make_policy() const { return parse_policy(policy, lambda); }
};

/// Expands the grid: for each k, each policy in order; manifold_rank spans
/// alpha x beta x a_e x a_s, min_regularizer spans lambda, top_k is one point.
std::vector<ConfigId> enumerate_configs(const SweepGrid& grid);

struct TrajectoryPoint {
  std::size_t users_served = 0;
  double ndcg = 1.0;
  double ef = 0.0;
};

struct ExperimentReport {
  ConfigId config;
  std::optional<MetricBundle> metrics;
  std::string error;  // "<code>: <message>" when the config failed
  bool pareto_optimal = false;
  std::vector<TrajectoryPoint> trajectory;
};

struct SweepOptions {
  /// 0 uses the hardware concurrency.
  std::size_t workers = 0;
  SessionOptions session;
  MetricOptions metrics;
  /// When > 0, each report carries a trajectory with this stride.
  std::size_t trajectory_stride = 0;
};

/// One session + evaluation per config. Configs run concurrently; results are
/// ordered by enumeration order. Per-config failures are recorded, not thrown.
std::vector<ExperimentReport> run_sweep(const ScoreDataset& ds, const SweepGrid& grid,
                                        const SweepOptions& options = {});

/// Runs a single configuration.
ExperimentReport run_config(const ScoreDataset& ds, const ConfigId& config,
                            const SweepOptions& options = {});

enum class MetricKey { Ndcg, Ef, Gini, Mmf };

MetricKey parse_metric_key(const std::string& name);

/// Metric value oriented so that larger is better (GINI is negated).
double oriented_value(const MetricBundle& m, MetricKey key);

/** \brief Indices of reports not dominated on (accuracy, fairness).
 *
 * A report is dominated when another has >= on both keys and > on one.
 * Sets pareto_optimal on every report; failed reports are never optimal.
 */
std::vector<std::size_t> pareto_frontier(std::vector<ExperimentReport>& reports,
                                         MetricKey accuracy = MetricKey::Ndcg,
                                         MetricKey fairness = MetricKey::Ef);

/// Among reports with ndcg >= floor: max EF, then max MMF, then min GINI,
/// then earliest. Returns the index or nullopt.
std::optional<std::size_t> constrained_best(std::span<const ExperimentReport> reports,
                                            double ndcg_floor = 0.99);

/// Snapshots cumulative NDCG and current EF every `stride` users (and after
/// the last user when the count is not a multiple of the stride).
std::vector<TrajectoryPoint> trajectory(const ScoreDataset& ds, const TaxationParams& params,
                                        const Policy& policy, std::size_t stride,
                                        const SessionOptions& session = {},
                                        const MetricOptions& metrics = {});

/// Spearman rank correlation with average ranks for ties; 0 for constant input.
double spearman(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Demand-side feature regression

/// Population excess kurtosis m4 / m2^2 - 3; 0 when m2 < 1e-12.
double score_excess_kurtosis(std::span<const double> s);

/// Names of the ten per-dataset features, in column order.
const std::vector<std::string>& demand_feature_names();

/// Mean and variance across users of {entropy, skewness, kurtosis, mean, std}
/// of each user's candidate scores.
std::vector<double> demand_features(const ScoreDataset& ds);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct RegressionResult {
  Coefficient intercept;
  std::vector<Coefficient> coefficients;
  std::size_t observations = 0;
  std::size_t dof = 0;
  double residual_variance = 0.0;
};

/** \brief OLS of y on column-standardized features with an intercept.
 *
 * Returns estimates with t-based confidence intervals at `level`
 * (dof = n - p - 1). Throws SingularDesign naming the dependent columns, and
 * InvalidSpec when n < p + 2.
 */
RegressionResult fit_ols(const std::vector<std::vector<double>>& features,
                         std::span<const double> target, const std::vector<std::string>& names,
                         double level = 0.95);

struct DemandRegressionOptions {
  /// Constant demand multiplier used while tuning (the demand term is disabled).
  double fixed_zeta = 1.0;
  /// The tuned EF is the constrained_best over the grid at this NDCG floor.
  double ndcg_floor = 0.99;
  std::size_t workers = 1;
  MetricOptions metrics;
};

struct DemandRegression {
  RegressionResult fit;
  std::vector<std::vector<double>> features;  // one row per used dataset
  std::vector<double> target;                 // tuned EF per used dataset
  std::vector<std::size_t> skipped;           // datasets with no feasible config
};

/// Tunes ManifoldRank with a fixed demand multiplier on each dataset, then
/// regresses the tuned EF on the demand features.
DemandRegression demand_regression(std::span<const ScoreDataset> datasets, const SweepGrid& grid,
                                   const DemandRegressionOptions& options = {});

}  // namespace manifoldrank
