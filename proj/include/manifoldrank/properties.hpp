#pragma once

/** \file properties.hpp
 *  \brief Randomized self-checks of the fairness, gradient and re-ranking invariants.
 *
 * Derivatives are checked against finite differences evaluated in 50-digit
 * arithmetic, so the tolerances measure the double-precision code and not
 * the difference scheme.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "manifoldrank/core.hpp"
#include "manifoldrank/random.hpp"

namespace manifoldrank {

struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = true;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string detail;  // first failure, if any
};

inline constexpr std::uint64_t kDefaultPropertySeed = 20240601;

std::vector<PropertyResult> fairness_properties(std::uint64_t seed = kDefaultPropertySeed);
std::vector<PropertyResult> gradient_properties(std::uint64_t seed = kDefaultPropertySeed);
std::vector<PropertyResult> rerank_properties(std::uint64_t seed = kDefaultPropertySeed);

/// All three suites in order.
std::vector<PropertyResult> all_properties(std::uint64_t seed = kDefaultPropertySeed);

/// Random validated dataset with 1..max_users users, k..max_items items,
/// 2..max_groups groups (every group non-empty) and lognormal(sigma) scores.
ScoreDataset random_tiny_dataset(Rng& rng, std::size_t max_users, std::size_t max_items,
                                 std::size_t max_groups, std::size_t k, double sigma = 1.0);

}  // namespace manifoldrank
