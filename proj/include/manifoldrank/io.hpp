#pragma once

/** \file io.hpp
 *  \brief CSV ingestion, run configuration text and report serialization.
 *
 * Number formatting is fixed at 12 significant digits so that outputs are
 * byte-identical across runs and platforms.
 */

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "manifoldrank/core.hpp"
#include "manifoldrank/experiments.hpp"
#include "manifoldrank/metrics.hpp"

namespace manifoldrank {

inline constexpr int kSchemaVersion = 1;

/// "%.12g"; non-finite values print as "inf", "-inf" or "nan".
std::string format_number(double x);

/// Rounds to 12 significant digits (the value format_number would print).
double round_to_12(double x);

struct IngestOptions {
  /// Missing (user, item) pairs score 0 and every item is a candidate.
  /// Otherwise a user's candidates are exactly the items in its rows.
  bool full_catalog = false;
  /// Per-user min-max scaling of candidate scores to [0, 1].
  bool normalize_scores = false;
};

/** \brief Parses `user_id,item_id,score` rows.
 *
 * Users and items are numbered by first appearance. Groups are left
 * unmapped. Errors: ParseError (with line number), DuplicateTriplet,
 * NonFiniteScore.
 */
ScoreDataset ingest_scores(std::istream& in, const IngestOptions& options = {});

/// Parses `item_id,group_id` rows into the dataset's catalog. Items only
/// present in the group file are appended (score 0, never a candidate unless
/// full_catalog).
void ingest_groups(std::istream& in, ScoreDataset& ds, bool full_catalog = false);

/// Parses `user_id,item_id` rows; listed users get exactly those candidates.
void ingest_candidates(std::istream& in, ScoreDataset& ds);

/// Applies the per-user min-max normalization to [0, 1] over candidates.
/// A constant row maps to 1.
void normalize_min_max(ScoreDataset& ds);

/// Writes `user_id,item_id,score` (dense over candidates) and `item_id,group_id`.
void write_scores_csv(std::ostream& out, const ScoreDataset& ds);
void write_groups_csv(std::ostream& out, const ScoreDataset& ds);

/// Every setting a command can take. Serialized as `key = value` lines.
struct RunConfig {
  std::string scores;
  std::string groups;
  std::string candidates;
  std::string preset;  // empty: use alpha/beta
  double alpha = 1.0;
  double beta = 1.0;
  double a_e = 1.0;
  double a_s = 1.0;
  std::size_t k = 10;
  std::string policy = "manifold_rank";
  double lambda = 0.1;
  std::uint64_t seed = 0;
  std::string output = "out";
  bool normalize_scores = false;
  bool clamp_zeta = false;
  std::size_t merge_threshold = 0;  // 0 disables merging
  bool shuffle_arrivals = false;
  bool full_catalog = false;

  bool operator==(const RunConfig&) const = default;

  /// Throws InvalidConfig on unknown keys, malformed lines or bad values.
  static RunConfig parse(const std::string& text);
  std::string serialize() const;

  /// alpha/beta (or the preset), a_e, a_s and k.
  TaxationParams params() const;
};

/// Loads scores, groups and candidates named by the config, then validates
/// and optionally merges infrequent groups.
ScoreDataset load_dataset(const RunConfig& config);

/// Grid file of `key = v1, v2, ...` lines (alpha, beta, a_e, a_s, lambda,
/// policy, k). K falls back to `default_k` when the file has no k line.
/// Throws InvalidGrid when the file has no entries.
SweepGrid parse_grid(const std::string& text, std::size_t default_k = 10);

// Report writers -------------------------------------------------------------

struct RerankOutput {
  RunConfig config;
  TaxationParams params;
  std::vector<RankedList> lists;
  MetricBundle metrics;
  std::vector<double> group_utility;  // accumulated, init removed
};

std::string rerank_json(const ScoreDataset& ds, const RerankOutput& out);
std::string lists_csv(const ScoreDataset& ds, const std::vector<RankedList>& lists);

std::string reports_json(const std::vector<ExperimentReport>& reports,
                         const std::optional<std::size_t>& best = std::nullopt);
std::string reports_csv(const std::vector<ExperimentReport>& reports);

/// Reads a reports JSON file produced by reports_json.
std::vector<ExperimentReport> parse_reports_json(const std::string& text);

std::string regression_json(const DemandRegression& result);
std::string regression_csv(const DemandRegression& result);

}  // namespace manifoldrank
