#pragma once

#include <cstddef>
#include <vector>

#include "polytree/distribution.hpp"
#include "polytree/structure.hpp"

namespace polytree {

// Edges with mutual information at or below this are left out of the forest.
inline constexpr double kZeroWeightThreshold = 1e-12;

struct WeightedEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;  // I(X_a; X_b) in bits
};

/// All n(n-1)/2 mutual-information edge weights, in (a, b) order.
/// Evaluation may be split over `jobs` threads; the result does not depend on it.
std::vector<WeightedEdge> mutual_information_edges(const Distribution& dist, std::size_t jobs = 1);

/// Maximum-likelihood branching (Chow-Liu forest).
///
/// Kruskal over mutual-information weights, heaviest first with ties broken
/// by (a, b) ascending; near-zero edges are dropped. Each component is then
/// oriented away from its smallest-index node.
Structure learn_optimal_branching(const Distribution& dist, std::size_t jobs = 1);

/// Orients an undirected forest as a branching rooted at each component's
/// smallest node.
Structure orient_forest(std::size_t n, const std::vector<WeightedEdge>& forest_edges);

inline constexpr std::size_t kBruteForceBranchingCap = 8;

/// Exhaustive minimizer of the score over all branchings. Test oracle; n <= 8.
Structure brute_force_branching(const Distribution& dist);

}  // namespace polytree
