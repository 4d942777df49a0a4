#include "manifoldrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "manifoldrank/error.hpp"

namespace manifoldrank {

namespace {

double checked_total(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::AllZero, "empty utility vector");
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::InvalidUtility, "utilities must be finite and nonnegative");
    }
    total += x;
  }
  if (total == 0.0) throw Error(ErrorCode::AllZero, "every group utility is zero");
  return total;
}

}  // namespace

double dcg(const RankedList& list, const ScoreDataset& ds) {
  double gain = 0.0;
  for (std::size_t r = 0; r < list.items.size(); ++r) {
    gain += ds.scores[list.user][list.items[r]] / std::log2(static_cast<double>(r) + 2.0);
  }
  return gain;
}

double ndcg_at_k(std::span<const RankedList> original, std::span<const RankedList> reranked,
                 const ScoreDataset& ds) {
  if (original.size() != reranked.size()) {
    throw Error(ErrorCode::InvalidSpec, "original and reranked lists differ in count");
  }
  if (original.empty()) return 1.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < original.size(); ++n) {
    if (original[n].user != reranked[n].user) {
      throw Error(ErrorCode::InvalidSpec, "original and reranked lists are not aligned by user");
    }
    const double ideal = dcg(original[n], ds);
    if (ideal == 0.0) {
      throw Error(ErrorCode::ZeroIdealGain,
                  "user '" + ds.users[original[n].user] + "' has zero ideal gain");
    }
    sum += dcg(reranked[n], ds) / ideal;
  }
  return sum / static_cast<double>(original.size());
}

double gini_index(std::span<const double> v) {
  const double total = checked_total(v);
  const double n = static_cast<double>(v.size());
  // Sorted form of sum_ij |v_i - v_j| = 2 * sum_i (2i - n + 1) * x_(i).
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  double pairwise = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    pairwise += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  }
  pairwise *= 2.0;
  const double mean = total / n;
  return pairwise / (2.0 * n * n * mean);
}

double mmf_at_k(std::span<const double> v, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "mmf fraction must lie in (0, 1]");
  }
  const double total = checked_total(v);
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  const auto count = std::min(
      sorted.size(), static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sorted.size()))));
  double bottom = 0.0;
  for (std::size_t i = 0; i < count; ++i) bottom += sorted[i];
  return bottom / total;
}

double ef_at_k(std::span<const double> v, double t) {
  if (t == 0.0 || t == 1.0 || !std::isfinite(t)) {
    throw Error(ErrorCode::DegenerateT, "elastic fairness needs finite t not in {0, 1}");
  }
  const double total = checked_total(v);
  const double exponent = 1.0 - t;
  double sum = 0.0;
  for (double x : v) {
    const double share = x / total;
    // exponent < 0 only when t > 1, so the sum diverges and EF -> -inf.
    if (share == 0.0 && exponent < 0.0) return -std::numeric_limits<double>::infinity();
    sum += std::pow(share, exponent);
  }
  const double sign = exponent > 0.0 ? 1.0 : -1.0;
  return sign * std::pow(sum, 1.0 / t);
}

MetricBundle evaluate(std::span<const RankedList> original, std::span<const RankedList> reranked,
                      const UtilityState& final_state, const ScoreDataset& ds, std::size_t k,
                      const MetricOptions& options) {
  const std::vector<double> exposure = final_state.accumulated();
  MetricBundle out;
  out.k = k;
  out.ndcg = ndcg_at_k(original, reranked, ds);
  out.ef = ef_at_k(exposure, options.ef_t);
  out.gini = gini_index(exposure);
  out.mmf = mmf_at_k(exposure, options.mmf_fraction);
  return out;
}

}  // namespace manifoldrank
