#include "manifoldrank/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "manifoldrank/error.hpp"
#include "manifoldrank/gradient.hpp"
#include "manifoldrank/random.hpp"

namespace manifoldrank {

namespace {

double parse_number(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') {
    throw Error(ErrorCode::InvalidSpec, "bad number '" + text + "' in '" + context + "'");
  }
  return value;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

ScoreDistribution ScoreDistribution::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (name == "uniform" && colon == std::string::npos) return uniform();
  if (colon != std::string::npos) {
    const double value = parse_number(text.substr(colon + 1), text);
    if (name == "lognormal") return lognormal(value);
    if (name == "point_mass_mix") return point_mass_mix(value);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown score distribution '" + text + "'");
}

std::string ScoreDistribution::to_string() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::LogNormal: return "lognormal:" + short_number(parameter);
    case Kind::PointMassMix: return "point_mass_mix:" + short_number(parameter);
  }
  return "uniform";
}

GroupSizing GroupSizing::parse(const std::string& text) {
  if (text == "balanced") return balanced();
  if (text.rfind("zipf:", 0) == 0) return zipf(parse_number(text.substr(5), text));
  throw Error(ErrorCode::InvalidSpec, "unknown group sizing '" + text + "'");
}

std::string GroupSizing::to_string() const {
  return kind == Kind::Balanced ? std::string("balanced") : "zipf:" + short_number(exponent);
}

SynthSpec reference_synth_spec() {
  SynthSpec spec;
  spec.users = 200;
  spec.items = 500;
  spec.groups = 20;
  spec.k = 10;
  spec.scores = ScoreDistribution::lognormal(1.0);
  spec.sizing = GroupSizing::zipf(1.1);
  spec.seed = 20240601;
  return spec;
}

std::vector<std::size_t> synth_group_sizes(std::size_t items, std::size_t groups,
                                           const GroupSizing& sizing) {
  if (groups == 0 || items < groups) {
    throw Error(ErrorCode::InvalidSpec, "need at least one item per group");
  }
  if (sizing.kind == GroupSizing::Kind::Balanced) {
    std::vector<std::size_t> sizes(groups, items / groups);
    for (std::size_t g = 0; g < items % groups; ++g) ++sizes[g];
    return sizes;
  }
  if (!(sizing.exponent >= 0.0) || !std::isfinite(sizing.exponent)) {
    throw Error(ErrorCode::InvalidSpec, "zipf exponent must be finite and >= 0");
  }
  // One item per group up front, the rest by largest remainder on r^-s weights.
  std::vector<double> weight(groups);
  double total_weight = 0.0;
  for (std::size_t r = 0; r < groups; ++r) {
    weight[r] = std::pow(static_cast<double>(r + 1), -sizing.exponent);
    total_weight += weight[r];
  }
  const std::size_t spare = items - groups;
  std::vector<std::size_t> sizes(groups, 1);
  std::vector<double> remainder(groups);
  std::size_t assigned = 0;
  for (std::size_t r = 0; r < groups; ++r) {
    const double share = static_cast<double>(spare) * weight[r] / total_weight;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    sizes[r] += whole;
    assigned += whole;
    remainder[r] = share - static_cast<double>(whole);
  }
  std::vector<std::size_t> order(groups);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t n = 0; assigned < spare; ++n, ++assigned) ++sizes[order[n % groups]];
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

ScoreDataset synth_dataset(const SynthSpec& spec) {
  if (spec.users == 0 || spec.items == 0 || spec.groups == 0 || spec.k == 0) {
    throw Error(ErrorCode::InvalidSpec, "dimensions must be positive");
  }
  if (spec.items < spec.k) throw Error(ErrorCode::InvalidSpec, "need at least K items");
  const auto& dist = spec.scores;
  if (dist.kind == ScoreDistribution::Kind::LogNormal &&
      !(dist.parameter > 0.0 && std::isfinite(dist.parameter))) {
    throw Error(ErrorCode::InvalidSpec, "lognormal sigma must be positive");
  }
  if (dist.kind == ScoreDistribution::Kind::PointMassMix &&
      !(dist.parameter >= 0.0 && dist.parameter < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "point-mass probability must lie in [0, 1)");
  }
  const auto sizes = synth_group_sizes(spec.items, spec.groups, spec.sizing);

  ScoreDataset ds;
  auto label = [](char prefix, std::size_t n, std::size_t width) {
    std::string digits = std::to_string(n);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
  };
  const std::size_t uw = std::to_string(spec.users - 1).size();
  const std::size_t iw = std::to_string(spec.items - 1).size();
  const std::size_t gw = std::to_string(spec.groups - 1).size();
  for (std::size_t u = 0; u < spec.users; ++u) ds.users.push_back(label('u', u, uw));
  for (std::size_t i = 0; i < spec.items; ++i) ds.items.push_back(label('i', i, iw));
  for (std::size_t g = 0; g < spec.groups; ++g) ds.groups.push_back(label('g', g, gw));

  Rng rng(spec.seed);
  const auto placement = seeded_permutation(spec.items, rng.below(UINT64_MAX));
  ds.group_of.assign(spec.items, 0);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < spec.groups; ++g) {
    for (std::size_t n = 0; n < sizes[g]; ++n) ds.group_of[placement[pos++]] = g;
  }

  ds.scores.assign(spec.users, std::vector<double>(spec.items, 0.0));
  for (auto& row : ds.scores) {
    for (double& s : row) {
      switch (dist.kind) {
        case ScoreDistribution::Kind::Uniform: s = rng.uniform(); break;
        case ScoreDistribution::Kind::LogNormal: s = std::exp(dist.parameter * rng.normal()); break;
        case ScoreDistribution::Kind::PointMassMix: {
          const double mass = rng.uniform();
          const double value = 1.0 - rng.uniform();  // (0, 1]
          s = mass < dist.parameter ? 0.0 : value;
          break;
        }
      }
    }
  }
  return validate_dataset(std::move(ds), spec.k);
}

std::vector<ScoreDataset> synthetic_family(std::size_t count, std::uint64_t seed) {
  std::vector<ScoreDataset> out;
  Rng rng(seed);
  for (std::size_t n = 0; n < count; ++n) {
    SynthSpec spec;
    spec.users = 40;
    spec.items = 80;
    spec.groups = 8;
    spec.k = 5;
    spec.seed = seed * 1000003 + n;
    switch (n % 3) {
      case 0: spec.scores = ScoreDistribution::lognormal(0.3 + 1.2 * rng.uniform()); break;
      case 1: spec.scores = ScoreDistribution::uniform(); break;
      default: spec.scores = ScoreDistribution::point_mass_mix(0.1 + 0.5 * rng.uniform()); break;
    }
    spec.sizing = GroupSizing::zipf(0.5 + rng.uniform());
    out.push_back(synth_dataset(spec));
  }
  return out;
}

// ---------------------------------------------------------------------------

void SweepGrid::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidGrid, what); };
  auto check_list = [&](const std::vector<double>& values, const char* name, double lo, double hi) {
    if (values.empty()) fail(std::string(name) + " is empty");
    if (!std::is_sorted(values.begin(), values.end())) fail(std::string(name) + " must be sorted");
    for (double x : values) {
      if (!std::isfinite(x) || x < lo || x > hi) {
        fail(std::string(name) + " value " + short_number(x) + " outside [" + short_number(lo) +
             ", " + short_number(hi) + "]");
      }
    }
  };
  if (policies.empty()) fail("policies is empty");
  if (k_values.empty()) fail("k_values is empty");
  for (std::size_t k : k_values) {
    if (k == 0) fail("k must be positive");
  }
  for (const auto& p : policies) {
    if (p != "manifold_rank" && p != "top_k" && p != "min_regularizer") fail("unknown policy " + p);
  }
  check_list(alpha_values, "alpha_values", -rate_box, rate_box);
  check_list(beta_values, "beta_values", -rate_box, rate_box);
  for (double b : beta_values) {
    if (std::abs(b) < kMinAbsBeta) fail("beta_values must satisfy |beta| >= 1e-6");
  }
  check_list(a_e_values, "a_e_values", demand_min, demand_max);
  check_list(a_s_values, "a_s_values", demand_min, demand_max);
  if (demand_min <= 0.0) fail("demand weights must be positive");
  check_list(lambda_values, "lambda_values", 0.0, 1e300);
}

std::vector<ConfigId> enumerate_configs(const SweepGrid& grid) {
  grid.validate();
  std::vector<ConfigId> out;
  for (std::size_t k : grid.k_values) {
    for (const std::string& policy : grid.policies) {
      ConfigId base;
      base.policy = policy;
      base.k = k;
      if (policy == "manifold_rank") {
        for (double a : grid.alpha_values) {
          for (double b : grid.beta_values) {
            for (double ae : grid.a_e_values) {
              for (double as : grid.a_s_values) {
                ConfigId c = base;
                c.alpha = a;
                c.beta = b;
                c.a_e = ae;
                c.a_s = as;
                out.push_back(c);
              }
            }
          }
        }
      } else if (policy == "min_regularizer") {
        for (double l : grid.lambda_values) {
          ConfigId c = base;
          c.lambda = l;
          out.push_back(c);
        }
      } else {
        out.push_back(base);
      }
    }
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n].index = n;
  return out;
}

ExperimentReport run_config(const ScoreDataset& ds, const ConfigId& config,
                            const SweepOptions& options) {
  ExperimentReport report;
  report.config = config;
  try {
    const TaxationParams params = config.params();
    const Policy policy = config.make_policy();
    RerankSession session(ds, params, policy, options.session);
    const auto reranked = run_session(session);
    auto original = original_lists(ds, params.k);
    // Align the reference lists with the arrival order.
    std::vector<RankedList> aligned;
    aligned.reserve(reranked.size());
    for (const RankedList& list : reranked) aligned.push_back(original[list.user]);
    report.metrics = evaluate(aligned, reranked, session.state(), ds, params.k, options.metrics);
    if (options.trajectory_stride > 0) {
      report.trajectory =
          trajectory(ds, params, policy, options.trajectory_stride, options.session, options.metrics);
    }
  } catch (const Error& e) {
    report.metrics.reset();
    report.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  return report;
}

std::vector<ExperimentReport> run_sweep(const ScoreDataset& ds, const SweepGrid& grid,
                                        const SweepOptions& options) {
  const auto configs = enumerate_configs(grid);
  std::vector<ExperimentReport> reports(configs.size());
  std::size_t workers = options.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, configs.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t n = next++; n < configs.size(); n = next++) {
      reports[n] = run_config(ds, configs[n], options);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return reports;
}

MetricKey parse_metric_key(const std::string& name) {
  if (name == "ndcg") return MetricKey::Ndcg;
  if (name == "ef") return MetricKey::Ef;
  if (name == "gini") return MetricKey::Gini;
  if (name == "mmf") return MetricKey::Mmf;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + name + "'");
}

double oriented_value(const MetricBundle& m, MetricKey key) {
  switch (key) {
    case MetricKey::Ndcg: return m.ndcg;
    case MetricKey::Ef: return m.ef;
    case MetricKey::Gini: return -m.gini;
    case MetricKey::Mmf: return m.mmf;
  }
  return 0.0;
}

std::vector<std::size_t> pareto_frontier(std::vector<ExperimentReport>& reports,
                                         MetricKey accuracy, MetricKey fairness) {
  struct Point {
    double acc;
    double fair;
    std::size_t index;
  };
  std::vector<Point> points;
  for (std::size_t n = 0; n < reports.size(); ++n) {
    reports[n].pareto_optimal = false;
    if (reports[n].metrics) {
      points.push_back({oriented_value(*reports[n].metrics, accuracy),
                        oriented_value(*reports[n].metrics, fairness), n});
    }
  }
  // Sweep by accuracy descending; within equal accuracy, best fairness first.
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.acc != b.acc) return a.acc > b.acc;
    if (a.fair != b.fair) return a.fair > b.fair;
    return a.index < b.index;
  });
  std::vector<std::size_t> frontier;
  double best_fair = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Point& p = points[n];
    // Exact duplicates of an optimal point are not dominated either.
    const bool duplicate_of_prev = n > 0 && points[n - 1].acc == p.acc &&
                                   points[n - 1].fair == p.fair &&
                                   reports[points[n - 1].index].pareto_optimal;
    if (first || p.fair > best_fair || duplicate_of_prev) {
      reports[p.index].pareto_optimal = true;
      frontier.push_back(p.index);
    }
    if (first || p.fair > best_fair) best_fair = p.fair;
    first = false;
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

std::optional<std::size_t> constrained_best(std::span<const ExperimentReport> reports,
                                            double ndcg_floor) {
  std::optional<std::size_t> best;
  for (std::size_t n = 0; n < reports.size(); ++n) {
    const auto& m = reports[n].metrics;
    if (!m || m->ndcg < ndcg_floor) continue;
    if (!best) {
      best = n;
      continue;
    }
    const MetricBundle& b = *reports[*best].metrics;
    const bool better = m->ef > b.ef || (m->ef == b.ef && m->mmf > b.mmf) ||
                        (m->ef == b.ef && m->mmf == b.mmf && m->gini < b.gini);
    if (better) best = n;
  }
  return best;
}

std::vector<TrajectoryPoint> trajectory(const ScoreDataset& ds, const TaxationParams& params,
                                        const Policy& policy, std::size_t stride,
                                        const SessionOptions& session_options,
                                        const MetricOptions& metrics) {
  if (stride == 0) throw Error(ErrorCode::InvalidParams, "trajectory stride must be positive");
  RerankSession session(ds, params, policy, session_options);
  const auto original = original_lists(ds, params.k);
  std::vector<TrajectoryPoint> out;
  double ratio_sum = 0.0;
  std::size_t served = 0;
  auto snapshot = [&] {
    TrajectoryPoint p;
    p.users_served = served;
    p.ndcg = ratio_sum / static_cast<double>(served);
    p.ef = ef_at_k(session.state().accumulated(), metrics.ef_t);
    out.push_back(p);
  };
  while (!session.done()) {
    const RankedList list = session.step();
    const double ideal = dcg(original[list.user], ds);
    if (ideal == 0.0) {
      throw Error(ErrorCode::ZeroIdealGain, "user '" + ds.users[list.user] + "' has zero ideal gain");
    }
    ratio_sum += dcg(list, ds) / ideal;
    ++served;
    if (served % stride == 0) snapshot();
  }
  if (served > 0 && served % stride != 0) snapshot();
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t n = i; n <= j; ++n) ranks[order[n]] = rank;
    i = j + 1;
  }
  return ranks;
}

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments central_moments(std::span<const double> s) {
  Moments m;
  const double n = static_cast<double>(s.size());
  for (double x : s) m.mean += x;
  m.mean /= n;
  for (double x : s) {
    const double d = x - m.mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
    m.m4 += d * d * d * d;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "spearman needs two equal-length series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double score_excess_kurtosis(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorCode::InvalidSpec, "kurtosis of an empty score vector");
  const Moments m = central_moments(s);
  if (m.m2 < 1e-12) return 0.0;
  return m.m4 / (m.m2 * m.m2) - 3.0;
}

const std::vector<std::string>& demand_feature_names() {
  static const std::vector<std::string> names = {
      "mean_entropy", "var_entropy", "mean_skewness", "var_skewness", "mean_kurtosis",
      "var_kurtosis", "mean_mean",   "var_mean",      "mean_std",     "var_std"};
  return names;
}

std::vector<double> demand_features(const ScoreDataset& ds) {
  if (ds.num_users() == 0) throw Error(ErrorCode::InvalidSpec, "dataset has no users");
  constexpr std::size_t kStats = 5;
  std::vector<std::vector<double>> per_user(kStats);
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    const auto s = ds.candidate_scores(u);
    const Moments m = central_moments(s);
    per_user[0].push_back(score_entropy(s));
    per_user[1].push_back(score_skewness(s));
    per_user[2].push_back(score_excess_kurtosis(s));
    per_user[3].push_back(m.mean);
    per_user[4].push_back(std::sqrt(m.m2));
  }
  std::vector<double> out;
  for (const auto& column : per_user) {
    const Moments m = central_moments(column);
    out.push_back(m.mean);
    out.push_back(m.m2);
  }
  return out;
}

RegressionResult fit_ols(const std::vector<std::vector<double>>& features,
                         std::span<const double> target, const std::vector<std::string>& names,
                         double level) {
  const std::size_t n = features.size();
  const std::size_t p = names.size();
  if (target.size() != n) throw Error(ErrorCode::InvalidSpec, "feature rows and targets differ");
  if (n < p + 2) {
    throw Error(ErrorCode::InvalidSpec, "need at least p + 2 observations for " +
                                            std::to_string(p) + " features, got " + std::to_string(n));
  }
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidParams, "level must lie in (0, 1)");

  Eigen::MatrixXd z(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    if (features[r].size() != p) throw Error(ErrorCode::InvalidSpec, "ragged feature matrix");
    for (std::size_t c = 0; c < p; ++c) z(r, c) = features[r][c];
  }
  std::vector<std::string> constant;
  for (std::size_t c = 0; c < p; ++c) {
    const double mean = z.col(c).mean();
    z.col(c).array() -= mean;
    const double sd = std::sqrt(z.col(c).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      constant.push_back(names[c]);
    } else {
      z.col(c) /= sd;
    }
  }
  if (!constant.empty()) {
    std::string list;
    for (const auto& c : constant) list += (list.empty() ? "" : ", ") + c;
    throw Error(ErrorCode::SingularDesign, "constant (intercept-collinear) columns: " + list);
  }

  // Columns whose addition does not raise the rank depend on earlier ones.
  std::vector<std::string> dependent;
  {
    std::vector<Eigen::Index> kept;
    for (std::size_t c = 0; c < p; ++c) {
      Eigen::MatrixXd trial(n, static_cast<Eigen::Index>(kept.size() + 1));
      for (std::size_t j = 0; j < kept.size(); ++j) trial.col(static_cast<Eigen::Index>(j)) = z.col(kept[j]);
      trial.col(static_cast<Eigen::Index>(kept.size())) = z.col(static_cast<Eigen::Index>(c));
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
      qr.setThreshold(1e-10);
      if (static_cast<std::size_t>(qr.rank()) == kept.size() + 1) {
        kept.push_back(static_cast<Eigen::Index>(c));
      } else {
        dependent.push_back(names[c]);
      }
    }
  }
  if (!dependent.empty()) {
    std::string list;
    for (const auto& c : dependent) list += (list.empty() ? "" : ", ") + c;
    throw Error(ErrorCode::SingularDesign, "linearly dependent columns: " + list);
  }

  Eigen::VectorXd y(n);
  for (std::size_t r = 0; r < n; ++r) y(static_cast<Eigen::Index>(r)) = target[r];
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;

  // Standardized columns are centered, so the intercept is mean(y) and decouples.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  const Eigen::VectorXd beta = qr.solve(yc);
  const Eigen::VectorXd residual = yc - z * beta;
  const std::size_t dof = n - p - 1;
  const double sigma2 = residual.squaredNorm() / static_cast<double>(dof);
  const Eigen::MatrixXd gram_inv =
      (z.transpose() * z).ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                                  static_cast<Eigen::Index>(p)));

  const boost::math::students_t dist(static_cast<double>(dof));
  const double t_crit = boost::math::quantile(dist, 0.5 + level / 2.0);

  auto make = [&](const std::string& name, double estimate, double se) {
    return Coefficient{name, estimate, se, estimate - t_crit * se, estimate + t_crit * se};
  };
  RegressionResult out;
  out.observations = n;
  out.dof = dof;
  out.residual_variance = sigma2;
  out.intercept = make("intercept", y_mean, std::sqrt(sigma2 / static_cast<double>(n)));
  for (std::size_t c = 0; c < p; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    out.coefficients.push_back(make(names[c], beta(ci), std::sqrt(sigma2 * gram_inv(ci, ci))));
  }
  return out;
}

DemandRegression demand_regression(std::span<const ScoreDataset> datasets, const SweepGrid& grid,
                                   const DemandRegressionOptions& options) {
  SweepGrid tuned = grid;
  tuned.policies = {"manifold_rank"};
  SweepOptions sweep;
  sweep.workers = options.workers;
  sweep.session.fixed_zeta = options.fixed_zeta;
  sweep.metrics = options.metrics;

  DemandRegression out;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto reports = run_sweep(datasets[d], tuned, sweep);
    const auto best = constrained_best(reports, options.ndcg_floor);
    if (!best || !std::isfinite(reports[*best].metrics->ef)) {
      out.skipped.push_back(d);
      continue;
    }
    out.features.push_back(demand_features(datasets[d]));
    out.target.push_back(reports[*best].metrics->ef);
  }
  out.fit = fit_ols(out.features, out.target, demand_feature_names());
  return out;
}

}  // namespace manifoldrank
