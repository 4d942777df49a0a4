#include "manifoldrank/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "manifoldrank/error.hpp"
#include "manifoldrank/experiments.hpp"
#include "manifoldrank/io.hpp"
#include "manifoldrank/properties.hpp"
#include "manifoldrank/rerank.hpp"

namespace manifoldrank {

namespace {

namespace fs = std::filesystem;

/// Thrown for argument or config problems that should exit with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << content;
}

/// Run-config options shared by rerank, sweep and analyze. Values given on
/// the command line override the config file.
class ConfigOptions {
 public:
  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path_, "key = value run configuration file");
    add(cmd, "--scores", "scores CSV (user_id,item_id,score)", flags_.scores,
        [](RunConfig& c, const RunConfig& f) { c.scores = f.scores; });
    add(cmd, "--groups", "groups CSV (item_id,group_id)", flags_.groups,
        [](RunConfig& c, const RunConfig& f) { c.groups = f.groups; });
    add(cmd, "--candidates", "candidates CSV (user_id,item_id)", flags_.candidates,
        [](RunConfig& c, const RunConfig& f) { c.candidates = f.candidates; });
    add(cmd, "--preset", "p_norm:P, elastic:T, alpha_fair:A or proportional", flags_.preset,
        [](RunConfig& c, const RunConfig& f) { c.preset = f.preset; });
    add(cmd, "--alpha", "global taxation rate", flags_.alpha,
        [](RunConfig& c, const RunConfig& f) { c.alpha = f.alpha; });
    add(cmd, "--beta", "local taxation rate", flags_.beta,
        [](RunConfig& c, const RunConfig& f) { c.beta = f.beta; });
    add(cmd, "--a-e", "entropy weight", flags_.a_e, [](RunConfig& c, const RunConfig& f) { c.a_e = f.a_e; });
    add(cmd, "--a-s", "skewness weight", flags_.a_s, [](RunConfig& c, const RunConfig& f) { c.a_s = f.a_s; });
    add(cmd, "-k,--k", "list length", flags_.k, [](RunConfig& c, const RunConfig& f) { c.k = f.k; });
    add(cmd, "--policy", "manifold_rank, top_k or min_regularizer", flags_.policy,
        [](RunConfig& c, const RunConfig& f) { c.policy = f.policy; });
    add(cmd, "--lambda", "min_regularizer strength", flags_.lambda,
        [](RunConfig& c, const RunConfig& f) { c.lambda = f.lambda; });
    add(cmd, "--seed", "seed for shuffled arrivals", flags_.seed,
        [](RunConfig& c, const RunConfig& f) { c.seed = f.seed; });
    add(cmd, "-o,--output", "output directory", flags_.output,
        [](RunConfig& c, const RunConfig& f) { c.output = f.output; });
    add(cmd, "--merge-threshold", "fold groups with fewer items (0 disables)", flags_.merge_threshold,
        [](RunConfig& c, const RunConfig& f) { c.merge_threshold = f.merge_threshold; });
    add_flag(cmd, "--normalize-scores", "per-user min-max scaling to [0, 1]", flags_.normalize_scores,
             [](RunConfig& c, const RunConfig& f) { c.normalize_scores = f.normalize_scores; });
    add_flag(cmd, "--clamp-zeta", "clamp the demand multiplier at 0", flags_.clamp_zeta,
             [](RunConfig& c, const RunConfig& f) { c.clamp_zeta = f.clamp_zeta; });
    add_flag(cmd, "--shuffle-arrivals", "serve users in seeded random order", flags_.shuffle_arrivals,
             [](RunConfig& c, const RunConfig& f) { c.shuffle_arrivals = f.shuffle_arrivals; });
    add_flag(cmd, "--full-catalog", "missing pairs score 0; every item is a candidate", flags_.full_catalog,
             [](RunConfig& c, const RunConfig& f) { c.full_catalog = f.full_catalog; });
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path_.empty()) config = RunConfig::parse(read_file(config_path_));
    for (const auto& [option, apply] : setters_) {
      if (option->count() > 0) apply(config, flags_);
    }
    return config;
  }

 private:
  using Setter = std::function<void(RunConfig&, const RunConfig&)>;

  template <class T>
  void add(CLI::App& cmd, const std::string& name, const std::string& help, T& field, Setter setter) {
    setters_.emplace_back(cmd.add_option(name, field, help), std::move(setter));
  }

  void add_flag(CLI::App& cmd, const std::string& name, const std::string& help, bool& field, Setter setter) {
    setters_.emplace_back(cmd.add_flag(name, field, help), std::move(setter));
  }

  std::string config_path_;
  RunConfig flags_;
  std::vector<std::pair<CLI::Option*, Setter>> setters_;
};

SessionOptions session_options(const RunConfig& c) {
  SessionOptions s;
  s.clamp_zeta = c.clamp_zeta;
  s.shuffle_arrivals = c.shuffle_arrivals;
  s.seed = c.seed;
  return s;
}

std::size_t workers_from_env(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return n;
    throw UsageError(std::string(kWorkersEnv) + " must be a positive integer");
  }
  return 0;
}

int cmd_rerank(const RunConfig& config, std::ostream& out) {
  const ScoreDataset ds = load_dataset(config);
  const TaxationParams params = config.params();
  params.validate();
  const Policy policy = parse_policy(config.policy, config.lambda);
  RerankSession session(ds, params, policy, session_options(config));
  std::vector<RankedList> lists = run_session(session);
  std::vector<RankedList> original = original_lists(ds, params.k);
  std::vector<RankedList> by_user(ds.num_users());
  for (auto& l : lists) by_user[l.user] = l;
  const MetricBundle metrics = evaluate(original, by_user, session.state(), ds, params.k);

  RerankOutput result{config, params, lists, metrics, session.state().accumulated()};
  const fs::path dir = config.output;
  write_file(dir / "rerank.json", rerank_json(ds, result));
  write_file(dir / "lists.csv", lists_csv(ds, lists));
  write_file(dir / "config.txt", config.serialize());
  out << "ndcg=" << format_number(metrics.ndcg) << " ef=" << format_number(metrics.ef)
      << " gini=" << format_number(metrics.gini) << " mmf=" << format_number(metrics.mmf) << '\n';
  return kExitOk;
}

struct SweepArgs {
  std::string grid_path;
  std::size_t workers = 0;
  std::size_t trajectory_stride = 0;
  double ndcg_floor = 0.99;
};

int cmd_sweep(const RunConfig& config, const SweepArgs& args, std::ostream& out) {
  SweepGrid grid;
  try {
    grid = parse_grid(read_file(args.grid_path), config.k);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidGrid || e.code() == ErrorCode::IoError) throw UsageError(e.what());
    throw;
  }
  RunConfig load = config;
  load.k = *std::max_element(grid.k_values.begin(), grid.k_values.end());
  const ScoreDataset ds = load_dataset(load);
  SweepOptions options;
  options.workers = workers_from_env(args.workers);
  options.session = session_options(config);
  options.trajectory_stride = args.trajectory_stride;
  std::vector<ExperimentReport> reports = run_sweep(ds, grid, options);
  pareto_frontier(reports);
  const auto best = constrained_best(reports, args.ndcg_floor);
  const fs::path dir = config.output;
  write_file(dir / "reports.json", reports_json(reports, best));
  write_file(dir / "reports.csv", reports_csv(reports));
  const auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.metrics; });
  out << reports.size() << " configs, " << failed << " failed";
  if (best) out << ", constrained best #" << *best;
  out << '\n';
  return kExitOk;
}

struct ParetoArgs {
  std::string reports_path;
  std::string accuracy = "ndcg";
  std::string fairness = "ef";
  double ndcg_floor = 0.99;
  std::string output = "out";
};

int cmd_pareto(const ParetoArgs& args, std::ostream& out) {
  std::vector<ExperimentReport> reports = parse_reports_json(read_file(args.reports_path));
  MetricKey acc, fair;
  try {
    acc = parse_metric_key(args.accuracy);
    fair = parse_metric_key(args.fairness);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const std::vector<std::size_t> frontier = pareto_frontier(reports, acc, fair);
  const auto best = constrained_best(reports, args.ndcg_floor);
  std::vector<ExperimentReport> selected;
  for (std::size_t i : frontier) selected.push_back(reports[i]);
  const fs::path dir = args.output;
  write_file(dir / "pareto.json", reports_json(selected, std::nullopt));
  write_file(dir / "pareto.csv", reports_csv(selected));
  out << frontier.size() << " of " << reports.size() << " configs on the frontier";
  if (best) out << ", constrained best #" << reports[*best].config.index;
  out << '\n';
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, const std::string& suite, std::ostream& out) {
  std::vector<PropertyResult> results;
  if (suite == "fairness") results = fairness_properties(seed);
  else if (suite == "gradient") results = gradient_properties(seed);
  else if (suite == "rerank") results = rerank_properties(seed);
  else if (suite == "all") results = all_properties(seed);
  else throw UsageError("unknown suite '" + suite + "'");
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << '.' << r.name << " (" << r.checked << " checks";
    if (!r.passed) out << ", " << r.failures << " failed: " << r.detail;
    out << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitProperty;
}

struct AnalyzeArgs {
  std::string manifest;
  std::size_t synthetic = 0;
  std::uint64_t seed = 1;
  std::string grid_path;
  double ndcg_floor = 0.99;
  std::size_t workers = 0;
};

int cmd_analyze(const RunConfig& config, const AnalyzeArgs& args, std::ostream& out) {
  if (args.manifest.empty() == (args.synthetic == 0)) {
    throw UsageError("give exactly one of --manifest or --synthetic");
  }
  SweepGrid grid;
  if (args.grid_path.empty()) {
    grid.alpha_values = {0.5, 1.0, 1.5, 2.0};
    grid.beta_values = {0.5, 1.0, 2.0};
    grid.k_values = {config.k};
  } else {
    try {
      grid = parse_grid(read_file(args.grid_path));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidGrid || e.code() == ErrorCode::IoError) throw UsageError(e.what());
      throw;
    }
  }
  std::vector<ScoreDataset> datasets;
  if (args.synthetic > 0) {
    datasets = synthetic_family(args.synthetic, args.seed);
  } else {
    std::istringstream lines(read_file(args.manifest));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw UsageError("manifest lines are 'scores_path,groups_path'");
      RunConfig each = config;
      each.scores = line.substr(0, comma);
      each.groups = line.substr(comma + 1);
      each.k = *std::max_element(grid.k_values.begin(), grid.k_values.end());
      datasets.push_back(load_dataset(each));
    }
  }
  DemandRegressionOptions options;
  options.ndcg_floor = args.ndcg_floor;
  options.workers = workers_from_env(args.workers);
  const DemandRegression result = demand_regression(datasets, grid, options);
  const fs::path dir = config.output;
  write_file(dir / "regression.json", regression_json(result));
  write_file(dir / "regression.csv", regression_csv(result));
  out << result.fit.observations << " datasets, " << result.skipped.size() << " skipped\n";
  return kExitOk;
}

struct SynthArgs {
  std::size_t users = 200;
  std::size_t items = 500;
  std::size_t groups = 20;
  std::size_t k = 10;
  std::string scores = "lognormal:1";
  std::string sizing = "zipf:1.1";
  std::uint64_t seed = 20240601;
  std::string output = "out";
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  SynthSpec spec;
  spec.users = args.users;
  spec.items = args.items;
  spec.groups = args.groups;
  spec.k = args.k;
  spec.scores = ScoreDistribution::parse(args.scores);
  spec.sizing = GroupSizing::parse(args.sizing);
  spec.seed = args.seed;
  const ScoreDataset ds = synth_dataset(spec);
  std::ostringstream scores, groups;
  write_scores_csv(scores, ds);
  write_groups_csv(groups, ds);
  const fs::path dir = args.output;
  write_file(dir / "scores.csv", scores.str());
  write_file(dir / "groups.csv", groups.str());
  out << ds.num_users() << " users, " << ds.num_items() << " items, " << ds.num_groups() << " groups\n";
  return kExitOk;
}

bool is_usage_code(ErrorCode code) {
  return code == ErrorCode::InvalidConfig || code == ErrorCode::InvalidGrid || code == ErrorCode::IoError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair re-ranking of recommendation lists and experiment harness", "manifoldrank"};
  app.require_subcommand(1);

  ConfigOptions rerank_config, sweep_config, analyze_config;
  auto* rerank = app.add_subcommand("rerank", "run one online re-ranking session");
  rerank_config.attach(*rerank);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write reports");
  sweep_config.attach(*sweep);
  sweep->add_option("--grid", sweep_args.grid_path, "grid file (key = v1, v2, ...)")->required();
  sweep->add_option("--workers", sweep_args.workers, std::string("worker threads (default: $") + kWorkersEnv + ")");
  sweep->add_option("--trajectory-stride", sweep_args.trajectory_stride, "record a trajectory every N users");
  sweep->add_option("--ndcg-floor", sweep_args.ndcg_floor, "accuracy floor for the constrained best");

  ParetoArgs pareto_args;
  auto* pareto = app.add_subcommand("pareto", "extract the frontier from a reports file");
  pareto->add_option("--reports", pareto_args.reports_path, "reports.json from sweep")->required();
  pareto->add_option("--accuracy", pareto_args.accuracy, "ndcg, ef, gini or mmf");
  pareto->add_option("--fairness", pareto_args.fairness, "ndcg, ef, gini or mmf");
  pareto->add_option("--ndcg-floor", pareto_args.ndcg_floor, "accuracy floor for the constrained best");
  pareto->add_option("-o,--output", pareto_args.output, "output directory");

  std::uint64_t verify_seed = kDefaultPropertySeed;
  std::string verify_suite = "all";
  auto* verify = app.add_subcommand("verify", "run the randomized invariant suites");
  verify->add_option("--seed", verify_seed, "base seed");
  verify->add_option("--suite", verify_suite, "fairness, gradient, rerank or all");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "regress tuned fairness on demand features");
  analyze_config.attach(*analyze);
  analyze->add_option("--manifest", analyze_args.manifest, "file of 'scores_path,groups_path' lines");
  analyze->add_option("--synthetic", analyze_args.synthetic, "number of generated datasets");
  analyze->add_option("--synthetic-seed", analyze_args.seed, "seed of the generated family");
  analyze->add_option("--grid", analyze_args.grid_path, "grid file for tuning");
  analyze->add_option("--ndcg-floor", analyze_args.ndcg_floor, "accuracy floor while tuning");
  analyze->add_option("--workers", analyze_args.workers, "worker threads");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a generated dataset");
  synth->add_option("--users", synth_args.users);
  synth->add_option("--items", synth_args.items);
  synth->add_option("--groups", synth_args.groups);
  synth->add_option("-k,--k", synth_args.k);
  synth->add_option("--scores", synth_args.scores, "uniform, lognormal:SIGMA or point_mass_mix:P");
  synth->add_option("--sizing", synth_args.sizing, "balanced or zipf:S");
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("-o,--output", synth_args.output, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = nullptr;
  try {
    if (rerank->parsed()) {
      active = rerank;
      return cmd_rerank(rerank_config.resolve(), out);
    }
    if (sweep->parsed()) {
      active = sweep;
      return cmd_sweep(sweep_config.resolve(), sweep_args, out);
    }
    if (pareto->parsed()) {
      active = pareto;
      return cmd_pareto(pareto_args, out);
    }
    if (verify->parsed()) {
      active = verify;
      return cmd_verify(verify_seed, verify_suite, out);
    }
    if (analyze->parsed()) {
      active = analyze;
      return cmd_analyze(analyze_config.resolve(), analyze_args, out);
    }
    if (synth->parsed()) {
      active = synth;
      return cmd_synth(synth_args, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error[" << to_string(e.code()) << "]: " << e.what() << '\n';
    if (is_usage_code(e.code())) {
      err << '\n' << active->help();
      return kExitUsage;
    }
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error[IoError]: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace manifoldrank
