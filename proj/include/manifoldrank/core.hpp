#pragma once

/** \file core.hpp
 *  \brief Domain types shared by the re-ranking engine, metrics and experiments.
 *
 * External identifiers (users, items, groups) are arbitrary strings; internally
 * everything is addressed by dense indices. Orderings are stable: users keep
 * arrival order, items keep catalog order, groups keep the order in which
 * they were declared. Ties anywhere break by ascending item index.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace manifoldrank {

using UserIndex = std::size_t;
using ItemIndex = std::size_t;
using GroupIndex = std::size_t;

/// Marks an item whose group is unknown in a not-yet-validated dataset.
inline constexpr GroupIndex kUnmappedGroup = static_cast<GroupIndex>(-1);

/// Smallest admissible |beta|; beta = 0 is a removable singularity of the cost.
inline constexpr double kMinAbsBeta = 1e-6;

/** \brief Per-user relevance scores plus the item -> group catalog.
 *
 * `scores[u][i]` is dense over the whole catalog. `candidates[u]` lists the
 * items user u may be shown, ascending; an empty outer vector means "every
 * item for every user" and is materialized by validate_dataset.
 */
struct ScoreDataset {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<std::string> groups;
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<ItemIndex>> candidates;
  std::vector<GroupIndex> group_of;

  std::size_t num_users() const noexcept { return users.size(); }
  std::size_t num_items() const noexcept { return items.size(); }
  std::size_t num_groups() const noexcept { return groups.size(); }

  /// Number of items in each group.
  std::vector<std::size_t> group_sizes() const;

  /// Scores of user u restricted to its candidate set, in candidate order.
  std::vector<double> candidate_scores(UserIndex u) const;

  bool operator==(const ScoreDataset&) const = default;
};

/// Global/local taxation rates, demand weights and ranking size.
struct TaxationParams {
  double alpha = 1.0;
  double beta = 1.0;
  double a_e = 1.0;
  double a_s = 1.0;
  std::size_t k = 10;

  /// Throws InvalidParams unless |beta| >= 1e-6, a_e > 0, a_s > 0, k > 0 and
  /// alpha, beta lie in [-box, box].
  void validate(double box = 3.0) const;

  bool operator==(const TaxationParams&) const = default;
};

/// Running group utilities. Starts at 1 per group and only grows.
class UtilityState {
 public:
  explicit UtilityState(std::size_t num_groups) : v_(num_groups, 1.0) {}

  std::span<const double> values() const noexcept { return v_; }
  std::size_t size() const noexcept { return v_.size(); }
  double operator[](GroupIndex g) const { return v_[g]; }

  /// Adds a nonnegative score to group g.
  void add(GroupIndex g, double score);

  /// Utilities with the all-ones initialization removed.
  std::vector<double> accumulated() const;

 private:
  std::vector<double> v_;
};

/// One emitted top-K list, sorted by adjusted score descending.
struct RankedList {
  UserIndex user = 0;
  std::vector<ItemIndex> items;
  std::vector<double> adjusted_scores;

  bool operator==(const RankedList&) const = default;
};

/** \brief Checks every dataset invariant and re-densifies groups.
 *
 * Groups without items are dropped and the survivors renumbered densely in
 * their original order, so validating a validated dataset is a no-op.
 * Errors: NegativeScore, NonFiniteScore, UnmappedItem, CandidateTooSmall,
 * InvalidSpec for shape mismatches.
 */
ScoreDataset validate_dataset(ScoreDataset raw, std::size_t k);

/// Folds every group with fewer than `threshold` items into one trailing
/// group named "infrequent". No-op when no group is below the threshold.
ScoreDataset merge_infrequent_groups(const ScoreDataset& ds, std::size_t threshold = 10);

}  // namespace manifoldrank
