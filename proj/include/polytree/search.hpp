#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include <json.hpp>

#include "polytree/distribution.hpp"
#include "polytree/structure.hpp"

namespace polytree {

inline constexpr std::size_t kDefaultExactCap = 7;
inline constexpr std::size_t kDefaultSearchBudget = 10'000;

// Scores at or below this count as zero when forming ratios.
inline constexpr double kDegenerateScore = 1e-9;

struct SearchReport {
  Structure best;
  double best_score = 0.0;
  double branching_score = 0.0;
  std::optional<double> ratio;   // branching / best; empty when best is ~0
  double additive_excess = 0.0;  // branching - best
  std::size_t instances_enumerated = 0;
  std::size_t iterations = 0;  // local search only
};

struct ExactSearchOptions {
  std::size_t max_variables = kDefaultExactCap;
  std::size_t jobs = 1;
};

/// Globally optimal polytree with at most `k` parents per node.
///
/// Enumerates every forest on the skeleton (edge-by-edge with union-find
/// rejection of cycles), then every orientation of it. Ties on score go to
/// the lexicographically smallest sequence of parent bitmasks.
SearchReport exact_optimal_polytree(const Distribution& dist, std::size_t k = kUnbounded,
                                    const ExactSearchOptions& options = {});

struct LocalSearchOptions {
  std::size_t budget = kDefaultSearchBudget;
  std::size_t jobs = 1;
  /// Called with the seed and after every accepted move.
  std::function<void(const Structure&)> on_step;
};

/// Steepest-descent local search over k-polytrees.
///
/// Moves: add, remove, reverse, and swap (remove one edge, add another).
/// Stops when no move improves the score by more than 1e-9 or the budget is
/// spent. If the optimal branching scores better than the descent result, the
/// branching is returned instead.
SearchReport local_search_polytree(const Distribution& dist, std::size_t k, const Structure& seed,
                                   const LocalSearchOptions& options = {});
/// Same, seeded with the optimal branching.
SearchReport local_search_polytree(const Distribution& dist, std::size_t k,
                                   const LocalSearchOptions& options = {});

/// Optimal branching score relative to the exact optimal k-polytree.
SearchReport approximation_ratio(const Distribution& dist, std::size_t k = kUnbounded,
                                 const ExactSearchOptions& options = {});

nlohmann::json search_report_json(const SearchReport& report, const std::vector<std::string>& names,
                                  std::size_t k);

}  // namespace polytree
