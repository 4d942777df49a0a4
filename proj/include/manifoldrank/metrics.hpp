#pragma once

/** \file metrics.hpp
 *  \brief Accuracy (NDCG@K) and provider-fairness (EF@K, GINI@K, MMF@K) metrics.
 *
 * Fairness metrics read a group utility vector. For a finished session that
 * vector is the accumulated exposure, i.e. the final utilities with the
 * all-ones initialization removed.
 */

#include <span>
#include <vector>

#include "manifoldrank/core.hpp"

namespace manifoldrank {

struct MetricBundle {
  double ndcg = 1.0;
  /// -inf when some group received no utility (the t > 1 limit).
  double ef = 0.0;
  double gini = 0.0;
  double mmf = 0.0;
  std::size_t k = 0;

  bool operator==(const MetricBundle&) const = default;
};

struct MetricOptions {
  double ef_t = 2.0;
  double mmf_fraction = 0.2;
};

/** \brief Mean over users of DCG(reranked) / DCG(original), log base 2, 1-based ranks.
 *
 * Lists are matched by position and must carry the same user. Throws
 * ZeroIdealGain when an original list has no gain.
 */
double ndcg_at_k(std::span<const RankedList> original, std::span<const RankedList> reranked,
                 const ScoreDataset& ds);

/// DCG of one list using raw scores.
double dcg(const RankedList& list, const ScoreDataset& ds);

/// sum_ij |v_i - v_j| / (2 n^2 mean v). Throws AllZero.
double gini_index(std::span<const double> v);

/// Utility share of the ceil(fraction * n) worst-off groups. Throws AllZero.
double mmf_at_k(std::span<const double> v, double fraction = 0.2);

/** \brief sign(1-t) * (sum_i vbar_i^(1-t))^(1/t) with vbar = v / sum v.
 *
 * Throws DegenerateT for t in {0, 1}, AllZero for a zero vector and
 * InvalidUtility for negative entries. A zero entry with t > 1 yields -inf.
 */
double ef_at_k(std::span<const double> v, double t = 2.0);

MetricBundle evaluate(std::span<const RankedList> original, std::span<const RankedList> reranked,
                      const UtilityState& final_state, const ScoreDataset& ds, std::size_t k,
                      const MetricOptions& options = {});

}  // namespace manifoldrank
