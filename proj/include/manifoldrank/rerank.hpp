#pragma once

/** \file rerank.hpp
 *  \brief Online re-ranking sessions, baseline policies and the exhaustive welfare oracle.
 *
 * A session serves users one at a time. For each arriving user it computes a
 * per-group penalty from the current group utilities, selects the K
 * candidates with the largest penalized score, then credits the selected raw
 * scores to their groups. The utility vector is a data dependence across
 * users, so one session is strictly sequential.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "manifoldrank/core.hpp"

namespace manifoldrank {

/// Supply gradient times demand gradient.
struct ManifoldRankPolicy {
  bool operator==(const ManifoldRankPolicy&) const = default;
};

/// Raw score order.
struct TopKPolicy {
  bool operator==(const TopKPolicy&) const = default;
};

/// Penalty lambda * (v_g - min v) / sum v on each group.
struct MinRegularizerPolicy {
  double lambda = 0.1;
  bool operator==(const MinRegularizerPolicy&) const = default;
};

using Policy = std::variant<ManifoldRankPolicy, TopKPolicy, MinRegularizerPolicy>;

/// "manifold_rank", "top_k" or "min_regularizer".
std::string policy_name(const Policy& policy);

/// Inverse of policy_name; min_regularizer takes `lambda`.
Policy parse_policy(const std::string& name, double lambda = 0.1);

struct SessionOptions {
  /// Clamp the demand multiplier at zero so the penalty never turns into a bonus.
  bool clamp_zeta = false;
  /// Replace the demand multiplier by a constant (e.g. 1 to disable it).
  std::optional<double> fixed_zeta;
  /// Serve users in a seeded random order instead of dataset order.
  bool shuffle_arrivals = false;
  std::uint64_t seed = 0;
};

/** \brief Selects the k candidates maximizing scores[i] - penalty[group_of[i]].
 *
 * Ties break by ascending item index. `adjusted`, when non-null, receives the
 * penalized scores of the selected items in list order.
 */
std::vector<ItemIndex> select_top_k(std::span<const double> scores,
                                    std::span<const ItemIndex> candidates,
                                    std::span<const GroupIndex> group_of,
                                    std::span<const double> group_penalty, std::size_t k,
                                    std::vector<double>* adjusted = nullptr);

/// Raw top-K lists for every user (the accuracy reference).
std::vector<RankedList> original_lists(const ScoreDataset& ds, std::size_t k);

/// Deterministic seeded permutation of 0..n-1 (portable across standard libraries).
std::vector<UserIndex> seeded_permutation(std::size_t n, std::uint64_t seed);

class RerankSession {
 public:
  /// `ds` must outlive the session.
  RerankSession(const ScoreDataset& ds, TaxationParams params, Policy policy,
                SessionOptions options = {});

  bool done() const noexcept { return cursor_ >= order_.size(); }
  std::size_t cursor() const noexcept { return cursor_; }
  const UtilityState& state() const noexcept { return state_; }
  const TaxationParams& params() const noexcept { return params_; }
  const Policy& policy() const noexcept { return policy_; }
  std::span<const UserIndex> arrival_order() const noexcept { return order_; }

  /// Serves the next user. Throws SessionExhausted past the last user.
  RankedList step();

  /// Per-group penalty the next step would apply to `user`.
  std::vector<double> group_penalty(UserIndex user) const;

 private:
  const ScoreDataset* ds_;
  TaxationParams params_;
  Policy policy_;
  SessionOptions options_;
  UtilityState state_;
  std::vector<UserIndex> order_;
  std::size_t cursor_ = 0;
};

/// Steps until exhaustion; returns the lists in arrival order.
std::vector<RankedList> run_session(RerankSession& session);

/// Sum of selected scores minus total_cost of (1 + accumulated group scores).
double welfare_objective(const ScoreDataset& ds, std::span<const RankedList> lists,
                         const TaxationParams& params);

/// prod_u C(|candidates_u|, k), saturating at UINT64_MAX.
std::uint64_t enumeration_count(const ScoreDataset& ds, std::size_t k);

inline constexpr std::uint64_t kOracleLimit = 2'000'000;

struct WelfareOptimum {
  std::vector<RankedList> allocation;  // items ascending within each list
  double welfare = 0.0;
  std::uint64_t enumerated = 0;
};

/** \brief Exhaustive maximizer of sum_u w_u - total_cost(v) over all per-user K-subsets.
 *
 * Utilities start at 1, as in the online engine. Throws InstanceTooLarge when
 * enumeration_count exceeds `limit`. Objectives within 1e-12 relative tie;
 * ties go to the larger total score, then to the first allocation in
 * lexicographic subset order.
 */
WelfareOptimum welfare_oracle(const ScoreDataset& ds, const TaxationParams& params,
                              std::uint64_t limit = kOracleLimit);

/// Per-group count of selected items when every user picks the K items
/// maximizing s_{u,i} - price[g(i)].
std::vector<std::size_t> demand_response(const ScoreDataset& ds, std::span<const double> prices,
                                         std::size_t k);

}  // namespace manifoldrank
