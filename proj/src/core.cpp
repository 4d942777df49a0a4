#include "manifoldrank/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "manifoldrank/error.hpp"

namespace manifoldrank {

std::vector<std::size_t> ScoreDataset::group_sizes() const {
  std::vector<std::size_t> sizes(groups.size(), 0);
  for (GroupIndex g : group_of) {
    if (g < sizes.size()) ++sizes[g];
  }
  return sizes;
}

std::vector<double> ScoreDataset::candidate_scores(UserIndex u) const {
  std::vector<double> out;
  out.reserve(candidates[u].size());
  for (ItemIndex i : candidates[u]) out.push_back(scores[u][i]);
  return out;
}

void TaxationParams::validate(double box) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
  if (!std::isfinite(alpha) || !std::isfinite(beta)) fail("alpha and beta must be finite");
  if (std::abs(beta) < kMinAbsBeta) fail("|beta| must be >= 1e-6");
  if (std::abs(alpha) > box || std::abs(beta) > box) {
    fail("alpha and beta must lie in [-" + std::to_string(box) + ", " + std::to_string(box) + "]");
  }
  if (!(a_e > 0.0) || !(a_s > 0.0)) fail("a_e and a_s must be positive");
  if (k == 0) fail("k must be positive");
}

void UtilityState::add(GroupIndex g, double score) {
  if (!(score >= 0.0)) throw Error(ErrorCode::InvalidUtility, "utility increments must be nonnegative");
  v_.at(g) += score;
}

std::vector<double> UtilityState::accumulated() const {
  std::vector<double> out(v_);
  for (double& x : out) x -= 1.0;
  return out;
}

ScoreDataset validate_dataset(ScoreDataset raw, std::size_t k) {
  const std::size_t n_users = raw.users.size();
  const std::size_t n_items = raw.items.size();
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  if (raw.scores.size() != n_users) {
    throw Error(ErrorCode::InvalidSpec, "score rows do not match user count");
  }
  if (raw.group_of.size() != n_items) {
    throw Error(ErrorCode::UnmappedItem, "group map does not cover every item");
  }
  for (ItemIndex i = 0; i < n_items; ++i) {
    if (raw.group_of[i] == kUnmappedGroup || raw.group_of[i] >= raw.groups.size()) {
      throw Error(ErrorCode::UnmappedItem, "item '" + raw.items[i] + "' has no group");
    }
  }
  for (UserIndex u = 0; u < n_users; ++u) {
    if (raw.scores[u].size() != n_items) {
      throw Error(ErrorCode::InvalidSpec, "user '" + raw.users[u] + "' has a short score row");
    }
    for (ItemIndex i = 0; i < n_items; ++i) {
      const double s = raw.scores[u][i];
      if (!std::isfinite(s)) {
        throw Error(ErrorCode::NonFiniteScore,
                    "score of (" + raw.users[u] + ", " + raw.items[i] + ") is not finite");
      }
      if (s < 0.0) {
        throw Error(ErrorCode::NegativeScore,
                    "score of (" + raw.users[u] + ", " + raw.items[i] + ") is negative");
      }
    }
  }

  if (raw.candidates.empty()) {
    std::vector<ItemIndex> all(n_items);
    std::iota(all.begin(), all.end(), ItemIndex{0});
    raw.candidates.assign(n_users, all);
  } else if (raw.candidates.size() != n_users) {
    throw Error(ErrorCode::InvalidSpec, "candidate lists do not match user count");
  }
  for (UserIndex u = 0; u < n_users; ++u) {
    auto& cand = raw.candidates[u];
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (!cand.empty() && cand.back() >= n_items) {
      throw Error(ErrorCode::InvalidSpec, "candidate index out of range");
    }
    if (cand.size() < k) {
      throw Error(ErrorCode::CandidateTooSmall,
                  "user '" + raw.users[u] + "' has " + std::to_string(cand.size()) +
                      " candidates, fewer than K=" + std::to_string(k));
    }
  }

  // Drop groups without items; survivors keep their relative order.
  std::vector<bool> used(raw.groups.size(), false);
  for (GroupIndex g : raw.group_of) used[g] = true;
  std::vector<GroupIndex> remap(raw.groups.size(), kUnmappedGroup);
  std::vector<std::string> dense_names;
  for (GroupIndex g = 0; g < raw.groups.size(); ++g) {
    if (used[g]) {
      remap[g] = dense_names.size();
      dense_names.push_back(raw.groups[g]);
    }
  }
  for (GroupIndex& g : raw.group_of) g = remap[g];
  raw.groups = std::move(dense_names);
  return raw;
}

ScoreDataset merge_infrequent_groups(const ScoreDataset& ds, std::size_t threshold) {
  const auto sizes = ds.group_sizes();
  std::vector<bool> small(sizes.size());
  bool any_small = false;
  for (GroupIndex g = 0; g < sizes.size(); ++g) {
    small[g] = sizes[g] < threshold;
    any_small = any_small || small[g];
  }
  if (!any_small) return ds;

  ScoreDataset out = ds;
  std::vector<GroupIndex> remap(sizes.size());
  out.groups.clear();
  for (GroupIndex g = 0; g < sizes.size(); ++g) {
    if (!small[g]) {
      remap[g] = out.groups.size();
      out.groups.push_back(ds.groups[g]);
    }
  }
  const GroupIndex merged = out.groups.size();
  out.groups.emplace_back("infrequent");
  for (GroupIndex g = 0; g < sizes.size(); ++g) {
    if (small[g]) remap[g] = merged;
  }
  for (GroupIndex& g : out.group_of) g = remap[g];
  return out;
}

}  // namespace manifoldrank
