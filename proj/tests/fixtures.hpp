#pragma once

#include <string>
#include <vector>

#include "manifoldrank/core.hpp"

namespace fixtures {

/// Full-catalog dataset with users u0.., items i0.., groups g0..
inline manifoldrank::ScoreDataset make_dataset(std::vector<std::vector<double>> scores,
                                               std::vector<std::size_t> group_of,
                                               std::size_t num_groups) {
  manifoldrank::ScoreDataset ds;
  for (std::size_t u = 0; u < scores.size(); ++u) ds.users.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < group_of.size(); ++i) ds.items.push_back("i" + std::to_string(i));
  for (std::size_t g = 0; g < num_groups; ++g) ds.groups.push_back("g" + std::to_string(g));
  ds.scores = std::move(scores);
  ds.group_of = std::move(group_of);
  return ds;
}

inline manifoldrank::ScoreDataset make_valid(std::vector<std::vector<double>> scores,
                                             std::vector<std::size_t> group_of, std::size_t num_groups,
                                             std::size_t k) {
  return manifoldrank::validate_dataset(make_dataset(std::move(scores), std::move(group_of), num_groups), k);
}

}  // namespace fixtures
