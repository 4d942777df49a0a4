#include "manifoldrank/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "manifoldrank/error.hpp"
#include "manifoldrank/fairness.hpp"
#include "manifoldrank/gradient.hpp"
#include "manifoldrank/random.hpp"

namespace manifoldrank {

std::string policy_name(const Policy& policy) {
  struct Visitor {
    std::string operator()(const ManifoldRankPolicy&) const { return "manifold_rank"; }
    std::string operator()(const TopKPolicy&) const { return "top_k"; }
    std::string operator()(const MinRegularizerPolicy&) const { return "min_regularizer"; }
  };
  return std::visit(Visitor{}, policy);
}

Policy parse_policy(const std::string& name, double lambda) {
  if (name == "manifold_rank") return ManifoldRankPolicy{};
  if (name == "top_k") return TopKPolicy{};
  if (name == "min_regularizer") {
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw Error(ErrorCode::InvalidParams, "min_regularizer lambda must be finite and >= 0");
    }
    return MinRegularizerPolicy{lambda};
  }
  throw Error(ErrorCode::InvalidConfig, "unknown policy '" + name + "'");
}

std::vector<ItemIndex> select_top_k(std::span<const double> scores,
                                    std::span<const ItemIndex> candidates,
                                    std::span<const GroupIndex> group_of,
                                    std::span<const double> group_penalty, std::size_t k,
                                    std::vector<double>* adjusted) {
  if (candidates.size() < k) {
    throw Error(ErrorCode::CandidateTooSmall, "fewer candidates than the ranking size");
  }
  struct Entry {
    double value;
    ItemIndex item;
  };
  std::vector<Entry> entries;
  entries.reserve(candidates.size());
  for (ItemIndex i : candidates) {
    const double value = scores[i] - group_penalty[group_of[i]];
    if (std::isnan(value)) throw Error(ErrorCode::NonFiniteGradient, "penalized score is NaN");
    entries.push_back({value, i});
  }
  auto better = [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.item < b.item;
  };
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(),
                    better);
  std::vector<ItemIndex> out(k);
  if (adjusted) adjusted->resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    out[r] = entries[r].item;
    if (adjusted) (*adjusted)[r] = entries[r].value;
  }
  return out;
}

std::vector<RankedList> original_lists(const ScoreDataset& ds, std::size_t k) {
  const std::vector<double> zero(ds.num_groups(), 0.0);
  std::vector<RankedList> lists;
  lists.reserve(ds.num_users());
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    RankedList list;
    list.user = u;
    list.items = select_top_k(ds.scores[u], ds.candidates[u], ds.group_of, zero, k,
                              &list.adjusted_scores);
    lists.push_back(std::move(list));
  }
  return lists;
}

std::vector<UserIndex> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<UserIndex> order(n);
  std::iota(order.begin(), order.end(), UserIndex{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

RerankSession::RerankSession(const ScoreDataset& ds, TaxationParams params, Policy policy,
                             SessionOptions options)
    : ds_(&ds),
      params_(params),
      policy_(std::move(policy)),
      options_(options),
      state_(ds.num_groups()) {
  if (params_.k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  if (std::holds_alternative<ManifoldRankPolicy>(policy_) &&
      std::abs(params_.beta) < kMinAbsBeta) {
    throw Error(ErrorCode::InvalidParams, "|beta| must be >= 1e-6");
  }
  if (options_.shuffle_arrivals) {
    order_ = seeded_permutation(ds.num_users(), options_.seed);
  } else {
    order_.resize(ds.num_users());
    std::iota(order_.begin(), order_.end(), UserIndex{0});
  }
}

std::vector<double> RerankSession::group_penalty(UserIndex user) const {
  const std::size_t n_groups = state_.size();
  std::vector<double> penalty(n_groups, 0.0);
  if (std::holds_alternative<ManifoldRankPolicy>(policy_)) {
    const SupplyGradient supply = supply_gradient(state_, params_);
    double zeta = 0.0;
    if (options_.fixed_zeta) {
      zeta = *options_.fixed_zeta;
    } else {
      zeta = demand_gradient(ds_->candidate_scores(user), params_).zeta;
    }
    if (options_.clamp_zeta) zeta = std::max(zeta, 0.0);
    for (GroupIndex g = 0; g < n_groups; ++g) penalty[g] = supply.eta[g] * zeta;
  } else if (const auto* reg = std::get_if<MinRegularizerPolicy>(&policy_)) {
    const auto v = state_.values();
    const double lowest = *std::min_element(v.begin(), v.end());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (GroupIndex g = 0; g < n_groups; ++g) penalty[g] = reg->lambda * (v[g] - lowest) / total;
  }
  return penalty;
}

RankedList RerankSession::step() {
  if (done()) throw Error(ErrorCode::SessionExhausted, "every user has already been served");
  const UserIndex user = order_[cursor_];
  RankedList list;
  list.user = user;
  if (ds_->num_groups() == 0) throw Error(ErrorCode::InvalidSpec, "dataset has no groups");
  const std::vector<double> penalty = group_penalty(user);
  list.items = select_top_k(ds_->scores[user], ds_->candidates[user], ds_->group_of, penalty,
                            params_.k, &list.adjusted_scores);
  for (ItemIndex i : list.items) state_.add(ds_->group_of[i], ds_->scores[user][i]);
  ++cursor_;
  return list;
}

std::vector<RankedList> run_session(RerankSession& session) {
  std::vector<RankedList> lists;
  lists.reserve(session.arrival_order().size() - session.cursor());
  while (!session.done()) lists.push_back(session.step());
  return lists;
}

double welfare_objective(const ScoreDataset& ds, std::span<const RankedList> lists,
                         const TaxationParams& params) {
  std::vector<double> v(ds.num_groups(), 1.0);
  double welfare = 0.0;
  for (const RankedList& list : lists) {
    for (ItemIndex i : list.items) {
      const double s = ds.scores[list.user][i];
      welfare += s;
      v[ds.group_of[i]] += s;
    }
  }
  return welfare - total_cost(v, params);
}

namespace {

std::uint64_t saturating_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // Exact while the running value fits; C(n, j) = C(n, j-1) * (n-j+1) / j.
  unsigned __int128 value = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    value = value * (n - j + 1) / j;
    if (value > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(value);
}

struct Choice {
  std::vector<ItemIndex> items;
  double gain = 0.0;
  std::vector<std::pair<GroupIndex, double>> credits;
};

std::vector<Choice> enumerate_choices(const ScoreDataset& ds, UserIndex u, std::size_t k) {
  const auto& cand = ds.candidates[u];
  std::vector<Choice> out;
  std::vector<std::size_t> pos(k);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  const std::size_t n = cand.size();
  while (true) {
    Choice c;
    for (std::size_t p : pos) {
      const ItemIndex item = cand[p];
      const double s = ds.scores[u][item];
      c.items.push_back(item);
      c.gain += s;
      c.credits.emplace_back(ds.group_of[item], s);
    }
    out.push_back(std::move(c));
    // Advance to the next k-combination in lexicographic order.
    std::size_t j = k;
    while (j > 0 && pos[j - 1] == n - k + (j - 1)) --j;
    if (j == 0) break;
    ++pos[j - 1];
    for (std::size_t r = j; r < k; ++r) pos[r] = pos[r - 1] + 1;
  }
  return out;
}

struct OracleSearch {
  const TaxationParams& params;
  const std::vector<std::vector<Choice>>& choices;
  // levels[u] holds the utilities after users 0..u-1 have been allocated.
  std::vector<std::vector<double>> levels;
  std::vector<std::size_t> picked;
  std::vector<std::size_t> best_pick;
  double best = -std::numeric_limits<double>::infinity();
  double best_gain = -std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;

  void descend(std::size_t u, double gain) {
    if (u == choices.size()) {
      ++visited;
      const double objective = gain - total_cost(levels[u], params);
      // Objectives within rounding of each other tie; the larger raw gain wins.
      const double tol = 1e-12 * std::max(1.0, std::abs(best));
      if (objective > best + tol || (objective >= best - tol && gain > best_gain)) {
        best = objective;
        best_gain = gain;
        best_pick = picked;
      }
      return;
    }
    for (std::size_t c = 0; c < choices[u].size(); ++c) {
      const Choice& choice = choices[u][c];
      levels[u + 1] = levels[u];
      for (const auto& [g, s] : choice.credits) levels[u + 1][g] += s;
      picked[u] = c;
      descend(u + 1, gain + choice.gain);
    }
  }
};

}  // namespace

std::uint64_t enumeration_count(const ScoreDataset& ds, std::size_t k) {
  std::uint64_t total = 1;
  for (const auto& cand : ds.candidates) {
    const std::uint64_t c = saturating_binomial(cand.size(), k);
    if (c == 0) return 0;
    if (total > UINT64_MAX / c) return UINT64_MAX;
    total *= c;
  }
  return total;
}

WelfareOptimum welfare_oracle(const ScoreDataset& ds, const TaxationParams& params,
                              std::uint64_t limit) {
  const std::size_t k = params.k;
  const std::uint64_t count = enumeration_count(ds, k);
  if (count > limit) {
    throw Error(ErrorCode::InstanceTooLarge,
                "exhaustive search needs " + std::to_string(count) + " allocations; limit is " +
                    std::to_string(limit));
  }
  if (count == 0) throw Error(ErrorCode::CandidateTooSmall, "some user has fewer than K candidates");

  std::vector<std::vector<Choice>> choices;
  choices.reserve(ds.num_users());
  for (UserIndex u = 0; u < ds.num_users(); ++u) choices.push_back(enumerate_choices(ds, u, k));

  OracleSearch search{params, choices,
                      std::vector<std::vector<double>>(ds.num_users() + 1,
                                                       std::vector<double>(ds.num_groups(), 1.0)),
                      std::vector<std::size_t>(ds.num_users(), 0), {}};
  search.descend(0, 0.0);

  WelfareOptimum out;
  out.welfare = search.best;
  out.enumerated = search.visited;
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    RankedList list;
    list.user = u;
    list.items = choices[u][search.best_pick[u]].items;
    for (ItemIndex i : list.items) list.adjusted_scores.push_back(ds.scores[u][i]);
    out.allocation.push_back(std::move(list));
  }
  return out;
}

std::vector<std::size_t> demand_response(const ScoreDataset& ds, std::span<const double> prices,
                                         std::size_t k) {
  if (prices.size() != ds.num_groups()) {
    throw Error(ErrorCode::InvalidSpec, "one price per group is required");
  }
  for (double p : prices) {
    if (!std::isfinite(p)) throw Error(ErrorCode::InvalidParams, "prices must be finite");
  }
  std::vector<std::size_t> counts(ds.num_groups(), 0);
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    for (ItemIndex i : select_top_k(ds.scores[u], ds.candidates[u], ds.group_of, prices, k)) {
      ++counts[ds.group_of[i]];
    }
  }
  return counts;
}

}  // namespace manifoldrank
