#include "manifoldrank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "manifoldrank/error.hpp"
#include "manifoldrank/fairness.hpp"

namespace manifoldrank {

using Json = nlohmann::ordered_json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round_to_12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

/// Reads a CSV with the given header; calls `row(fields, line_number)`.
template <class F>
void read_csv(std::istream& in, const std::vector<std::string>& header, F&& row) {
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!have_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        parse_fail(number, "expected header '" + expected + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      parse_fail(number, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) parse_fail(number, "empty field");
    }
    row(fields, number);
  }
  if (!have_header) parse_fail(number == 0 ? 1 : number, "missing header");
}

double parse_score(const std::string& text, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') parse_fail(line, "score '" + text + "' is not a number");
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::NonFiniteScore, "line " + std::to_string(line) + ": score is not finite");
  }
  return x;
}

struct Interner {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string>* names;

  std::size_t get(const std::string& key) {
    auto [it, inserted] = index.try_emplace(key, names->size());
    if (inserted) names->push_back(key);
    return it->second;
  }
};

Interner make_interner(std::vector<std::string>& names) {
  Interner in{{}, &names};
  for (std::size_t i = 0; i < names.size(); ++i) in.index.emplace(names[i], i);
  return in;
}

void resize_scores(ScoreDataset& ds) {
  ds.scores.resize(ds.users.size());
  for (auto& row : ds.scores) row.resize(ds.items.size(), 0.0);
  ds.group_of.resize(ds.items.size(), kUnmappedGroup);
}

}  // namespace

ScoreDataset ingest_scores(std::istream& in, const IngestOptions& options) {
  ScoreDataset ds;
  auto users = make_interner(ds.users);
  auto items = make_interner(ds.items);
  struct Triplet {
    std::size_t u, i;
    double s;
  };
  std::vector<Triplet> rows;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  read_csv(in, {"user_id", "item_id", "score"}, [&](const std::vector<std::string>& f, std::size_t line) {
    const double s = parse_score(f[2], line);
    const std::size_t u = users.get(f[0]);
    const std::size_t i = items.get(f[1]);
    if (!seen.emplace(u, i).second) {
      throw Error(ErrorCode::DuplicateTriplet,
                  "line " + std::to_string(line) + ": duplicate pair (" + f[0] + ", " + f[1] + ")");
    }
    rows.push_back({u, i, s});
  });
  resize_scores(ds);
  if (!options.full_catalog) ds.candidates.assign(ds.users.size(), {});
  for (const auto& t : rows) {
    ds.scores[t.u][t.i] = t.s;
    if (!options.full_catalog) ds.candidates[t.u].push_back(t.i);
  }
  for (auto& c : ds.candidates) std::sort(c.begin(), c.end());
  if (options.normalize_scores) normalize_min_max(ds);
  return ds;
}

void ingest_groups(std::istream& in, ScoreDataset& ds, bool full_catalog) {
  auto items = make_interner(ds.items);
  auto groups = make_interner(ds.groups);
  std::vector<bool> mapped(ds.items.size(), false);
  ds.group_of.resize(ds.items.size(), kUnmappedGroup);
  read_csv(in, {"item_id", "group_id"}, [&](const std::vector<std::string>& f, std::size_t line) {
    const std::size_t i = items.get(f[0]);
    if (i >= mapped.size()) {
      mapped.resize(i + 1, false);
      ds.group_of.resize(i + 1, kUnmappedGroup);
    }
    if (mapped[i]) parse_fail(line, "item '" + f[0] + "' is mapped twice");
    mapped[i] = true;
    ds.group_of[i] = groups.get(f[1]);
  });
  resize_scores(ds);
  if (full_catalog) ds.candidates.clear();
}

void ingest_candidates(std::istream& in, ScoreDataset& ds) {
  std::unordered_map<std::string, std::size_t> users, items;
  for (std::size_t u = 0; u < ds.users.size(); ++u) users.emplace(ds.users[u], u);
  for (std::size_t i = 0; i < ds.items.size(); ++i) items.emplace(ds.items[i], i);
  std::vector<std::vector<ItemIndex>> explicit_pools(ds.users.size());
  std::vector<bool> listed(ds.users.size(), false);
  read_csv(in, {"user_id", "item_id"}, [&](const std::vector<std::string>& f, std::size_t line) {
    auto u = users.find(f[0]);
    if (u == users.end()) parse_fail(line, "unknown user '" + f[0] + "'");
    auto i = items.find(f[1]);
    if (i == items.end()) parse_fail(line, "unknown item '" + f[1] + "'");
    listed[u->second] = true;
    explicit_pools[u->second].push_back(i->second);
  });
  if (ds.candidates.empty()) {
    ds.candidates.assign(ds.users.size(), {});
    for (auto& c : ds.candidates) {
      c.resize(ds.items.size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = i;
    }
  }
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    if (!listed[u]) continue;
    auto& pool = explicit_pools[u];
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    ds.candidates[u] = std::move(pool);
  }
}

void normalize_min_max(ScoreDataset& ds) {
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    std::vector<ItemIndex> pool;
    if (ds.candidates.empty()) {
      pool.resize(ds.items.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    } else {
      pool = ds.candidates[u];
    }
    if (pool.empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (ItemIndex i : pool) {
      lo = std::min(lo, ds.scores[u][i]);
      hi = std::max(hi, ds.scores[u][i]);
    }
    for (ItemIndex i : pool) {
      ds.scores[u][i] = hi > lo ? (ds.scores[u][i] - lo) / (hi - lo) : 1.0;
    }
  }
}

void write_scores_csv(std::ostream& out, const ScoreDataset& ds) {
  out << "user_id,item_id,score\n";
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    auto emit = [&](ItemIndex i) {
      out << ds.users[u] << ',' << ds.items[i] << ',' << format_number(ds.scores[u][i]) << '\n';
    };
    if (ds.candidates.empty()) {
      for (std::size_t i = 0; i < ds.items.size(); ++i) emit(i);
    } else {
      for (ItemIndex i : ds.candidates[u]) emit(i);
    }
  }
}

void write_groups_csv(std::ostream& out, const ScoreDataset& ds) {
  out << "item_id,group_id\n";
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    out << ds.items[i] << ',' << ds.groups.at(ds.group_of[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// RunConfig

namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidConfig, key + ": '" + value + "' is not a finite number");
  }
  return x;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (value.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::InvalidConfig, key + ": '" + value + "' is not a nonnegative integer");
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": '" + value + "' is not a boolean");
}

/// Shortest text that parses back to exactly x.
std::string exact_number(double x) {
  char buf[40];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// `key = value` lines; `#` starts a comment; keys must be unique.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  ErrorCode code) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(code, "line " + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw Error(code, "line " + std::to_string(number) + ": empty key");
    for (const auto& [k, v] : out) {
      if (k == key) throw Error(code, "line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  for (const auto& [key, value] : parse_key_values(text, ErrorCode::InvalidConfig)) {
    if (key == "scores") c.scores = value;
    else if (key == "groups") c.groups = value;
    else if (key == "candidates") c.candidates = value;
    else if (key == "preset") c.preset = value;
    else if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "beta") c.beta = parse_double(key, value);
    else if (key == "a_e") c.a_e = parse_double(key, value);
    else if (key == "a_s") c.a_s = parse_double(key, value);
    else if (key == "k") c.k = parse_unsigned(key, value);
    else if (key == "policy") c.policy = value;
    else if (key == "lambda") c.lambda = parse_double(key, value);
    else if (key == "seed") c.seed = parse_unsigned(key, value);
    else if (key == "output") c.output = value;
    else if (key == "normalize_scores") c.normalize_scores = parse_bool(key, value);
    else if (key == "clamp_zeta") c.clamp_zeta = parse_bool(key, value);
    else if (key == "merge_threshold") c.merge_threshold = parse_unsigned(key, value);
    else if (key == "shuffle_arrivals") c.shuffle_arrivals = parse_bool(key, value);
    else if (key == "full_catalog") c.full_catalog = parse_bool(key, value);
    else throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
  }
  return c;
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "scores = " << scores << '\n'
      << "groups = " << groups << '\n'
      << "candidates = " << candidates << '\n'
      << "preset = " << preset << '\n'
      << "alpha = " << exact_number(alpha) << '\n'
      << "beta = " << exact_number(beta) << '\n'
      << "a_e = " << exact_number(a_e) << '\n'
      << "a_s = " << exact_number(a_s) << '\n'
      << "k = " << k << '\n'
      << "policy = " << policy << '\n'
      << "lambda = " << exact_number(lambda) << '\n'
      << "seed = " << seed << '\n'
      << "output = " << output << '\n'
      << "normalize_scores = " << flag(normalize_scores) << '\n'
      << "clamp_zeta = " << flag(clamp_zeta) << '\n'
      << "merge_threshold = " << merge_threshold << '\n'
      << "shuffle_arrivals = " << flag(shuffle_arrivals) << '\n'
      << "full_catalog = " << flag(full_catalog) << '\n';
  return out.str();
}

TaxationParams RunConfig::params() const {
  TaxationParams p{alpha, beta, a_e, a_s, k};
  if (!preset.empty()) {
    const RatePair rates = resolve_preset(FairnessPreset::parse(preset));
    p.alpha = rates.alpha;
    p.beta = rates.beta;
  }
  return p;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return in;
}

}  // namespace

ScoreDataset load_dataset(const RunConfig& config) {
  if (config.scores.empty() || config.groups.empty()) {
    throw Error(ErrorCode::InvalidConfig, "both scores and groups paths are required");
  }
  IngestOptions options;
  options.full_catalog = config.full_catalog;
  auto scores_in = open_input(config.scores);
  ScoreDataset ds = ingest_scores(scores_in, options);
  auto groups_in = open_input(config.groups);
  ingest_groups(groups_in, ds, config.full_catalog);
  if (!config.candidates.empty()) {
    auto cand_in = open_input(config.candidates);
    ingest_candidates(cand_in, ds);
  }
  if (config.normalize_scores) normalize_min_max(ds);
  ds = validate_dataset(std::move(ds), config.k);
  if (config.merge_threshold > 0) ds = merge_infrequent_groups(ds, config.merge_threshold);
  return ds;
}

SweepGrid parse_grid(const std::string& text, std::size_t default_k) {
  const auto entries = parse_key_values(text, ErrorCode::InvalidGrid);
  if (entries.empty()) throw Error(ErrorCode::InvalidGrid, "grid file has no entries");
  SweepGrid grid;
  grid.k_values = {default_k};
  auto doubles = [](const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& f : split(value, ',')) {
      try {
        out.push_back(parse_double(key, f));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidGrid, e.what());
      }
    }
    return out;
  };
  for (const auto& [key, value] : entries) {
    if (key == "alpha") grid.alpha_values = doubles(key, value);
    else if (key == "beta") grid.beta_values = doubles(key, value);
    else if (key == "a_e") grid.a_e_values = doubles(key, value);
    else if (key == "a_s") grid.a_s_values = doubles(key, value);
    else if (key == "lambda") grid.lambda_values = doubles(key, value);
    else if (key == "policy") grid.policies = split(value, ',');
    else if (key == "k") {
      grid.k_values.clear();
      for (const auto& f : split(value, ',')) {
        try {
          grid.k_values.push_back(parse_unsigned(key, f));
        } catch (const Error& e) {
          throw Error(ErrorCode::InvalidGrid, e.what());
        }
      }
    } else {
      throw Error(ErrorCode::InvalidGrid, "unknown grid key '" + key + "'");
    }
  }
  grid.validate();
  return grid;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

Json number(double x) {
  if (!std::isfinite(x)) return Json(nullptr);
  return Json(round_to_12(x));
}

double read_number(const Json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

Json metrics_json(const MetricBundle& m) {
  Json j;
  j["k"] = m.k;
  j["ndcg"] = number(m.ndcg);
  j["ef"] = number(m.ef);
  j["gini"] = number(m.gini);
  j["mmf"] = number(m.mmf);
  return j;
}

Json config_json(const ConfigId& c) {
  Json j;
  j["index"] = c.index;
  j["policy"] = c.policy;
  j["k"] = c.k;
  j["alpha"] = number(c.alpha);
  j["beta"] = number(c.beta);
  j["a_e"] = number(c.a_e);
  j["a_s"] = number(c.a_s);
  j["lambda"] = number(c.lambda);
  return j;
}

Json coefficient_json(const Coefficient& c) {
  Json j;
  j["name"] = c.name;
  j["estimate"] = number(c.estimate);
  j["std_error"] = number(c.std_error);
  j["ci_low"] = number(c.ci_low);
  j["ci_high"] = number(c.ci_high);
  return j;
}

}  // namespace

std::string rerank_json(const ScoreDataset& ds, const RerankOutput& out) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "rerank";
  Json params;
  params["alpha"] = number(out.params.alpha);
  params["beta"] = number(out.params.beta);
  params["a_e"] = number(out.params.a_e);
  params["a_s"] = number(out.params.a_s);
  params["k"] = out.params.k;
  j["params"] = params;
  j["policy"] = out.config.policy;
  if (out.config.policy == "min_regularizer") j["lambda"] = number(out.config.lambda);
  j["preset"] = out.config.preset;
  j["seed"] = out.config.seed;
  j["shuffle_arrivals"] = out.config.shuffle_arrivals;
  j["clamp_zeta"] = out.config.clamp_zeta;
  j["metrics"] = metrics_json(out.metrics);
  j["groups"] = ds.groups;
  Json utility = Json::array();
  for (double v : out.group_utility) utility.push_back(number(v));
  j["group_utility"] = utility;
  Json lists = Json::array();
  for (const auto& list : out.lists) {
    Json l;
    l["user"] = ds.users[list.user];
    Json items = Json::array();
    Json adjusted = Json::array();
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      items.push_back(ds.items[list.items[r]]);
      adjusted.push_back(number(list.adjusted_scores[r]));
    }
    l["items"] = items;
    l["adjusted_scores"] = adjusted;
    lists.push_back(l);
  }
  j["lists"] = lists;
  return j.dump(2) + "\n";
}

std::string lists_csv(const ScoreDataset& ds, const std::vector<RankedList>& lists) {
  std::ostringstream out;
  out << "user_id,rank,item_id,group_id,score,adjusted_score\n";
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      const ItemIndex i = list.items[r];
      out << ds.users[list.user] << ',' << r + 1 << ',' << ds.items[i] << ','
          << ds.groups[ds.group_of[i]] << ',' << format_number(ds.scores[list.user][i]) << ','
          << format_number(list.adjusted_scores[r]) << '\n';
    }
  }
  return out.str();
}

std::string reports_json(const std::vector<ExperimentReport>& reports,
                         const std::optional<std::size_t>& best) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "sweep";
  j["constrained_best"] = best ? Json(*best) : Json(nullptr);
  Json arr = Json::array();
  for (const auto& r : reports) {
    Json e;
    e["config"] = config_json(r.config);
    e["metrics"] = r.metrics ? metrics_json(*r.metrics) : Json(nullptr);
    e["error"] = r.error;
    e["pareto_optimal"] = r.pareto_optimal;
    if (!r.trajectory.empty()) {
      Json t = Json::array();
      for (const auto& p : r.trajectory) {
        Json q;
        q["users_served"] = p.users_served;
        q["ndcg"] = number(p.ndcg);
        q["ef"] = number(p.ef);
        t.push_back(q);
      }
      e["trajectory"] = t;
    }
    arr.push_back(e);
  }
  j["reports"] = arr;
  return j.dump(2) + "\n";
}

std::string reports_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "index,policy,k,alpha,beta,a_e,a_s,lambda,ndcg,ef,gini,mmf,pareto_optimal,error\n";
  for (const auto& r : reports) {
    const auto& c = r.config;
    out << c.index << ',' << c.policy << ',' << c.k << ',' << format_number(c.alpha) << ','
        << format_number(c.beta) << ',' << format_number(c.a_e) << ',' << format_number(c.a_s) << ','
        << format_number(c.lambda) << ',';
    if (r.metrics) {
      out << format_number(r.metrics->ndcg) << ',' << format_number(r.metrics->ef) << ','
          << format_number(r.metrics->gini) << ',' << format_number(r.metrics->mmf);
    } else {
      out << ",,,";
    }
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    out << ',' << (r.pareto_optimal ? 1 : 0) << ',' << error << '\n';
  }
  return out.str();
}

std::vector<ExperimentReport> parse_reports_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("reports file: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion || !j.contains("reports")) {
    throw Error(ErrorCode::ParseError, "reports file lacks schema_version 1 or reports");
  }
  std::vector<ExperimentReport> out;
  try {
    for (const auto& e : j["reports"]) {
      ExperimentReport r;
      const auto& c = e.at("config");
      r.config.index = c.at("index").get<std::size_t>();
      r.config.policy = c.at("policy").get<std::string>();
      r.config.k = c.at("k").get<std::size_t>();
      r.config.alpha = c.at("alpha").get<double>();
      r.config.beta = c.at("beta").get<double>();
      r.config.a_e = c.at("a_e").get<double>();
      r.config.a_s = c.at("a_s").get<double>();
      r.config.lambda = c.at("lambda").get<double>();
      if (!e.at("metrics").is_null()) {
        const auto& m = e["metrics"];
        MetricBundle b;
        b.k = m.at("k").get<std::size_t>();
        b.ndcg = read_number(m.at("ndcg"), std::numeric_limits<double>::quiet_NaN());
        b.ef = read_number(m.at("ef"), -std::numeric_limits<double>::infinity());
        b.gini = read_number(m.at("gini"), std::numeric_limits<double>::quiet_NaN());
        b.mmf = read_number(m.at("mmf"), std::numeric_limits<double>::quiet_NaN());
        r.metrics = b;
      }
      r.error = e.value("error", "");
      r.pareto_optimal = e.value("pareto_optimal", false);
      if (e.contains("trajectory")) {
        for (const auto& q : e["trajectory"]) {
          r.trajectory.push_back({q.at("users_served").get<std::size_t>(),
                                  read_number(q.at("ndcg"), std::numeric_limits<double>::quiet_NaN()),
                                  read_number(q.at("ef"), -std::numeric_limits<double>::infinity())});
        }
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("reports file: ") + e.what());
  }
  return out;
}

std::string regression_json(const DemandRegression& result) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "analyze";
  j["observations"] = result.fit.observations;
  j["dof"] = result.fit.dof;
  j["residual_variance"] = number(result.fit.residual_variance);
  j["intercept"] = coefficient_json(result.fit.intercept);
  Json coefs = Json::array();
  for (const auto& c : result.fit.coefficients) coefs.push_back(coefficient_json(c));
  j["coefficients"] = coefs;
  j["skipped"] = result.skipped;
  return j.dump(2) + "\n";
}

std::string regression_csv(const DemandRegression& result) {
  std::ostringstream out;
  out << "name,estimate,std_error,ci_low,ci_high\n";
  auto row = [&](const Coefficient& c) {
    out << c.name << ',' << format_number(c.estimate) << ',' << format_number(c.std_error) << ','
        << format_number(c.ci_low) << ',' << format_number(c.ci_high) << '\n';
  };
  row(result.fit.intercept);
  for (const auto& c : result.fit.coefficients) row(c);
  return out.str();
}

}  // namespace manifoldrank
