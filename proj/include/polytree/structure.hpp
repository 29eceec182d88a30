#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "polytree/distribution.hpp"

namespace polytree {

/// Parent bound for k-polytrees; kUnbounded means plain polytrees.
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Parent-set assignment over n variables.
///
/// Only well-formedness (no self-parents, indices in range) is enforced here.
/// Branching / polytree / k-polytree membership is checked by the separate
/// predicates below so that search code can hold and reject invalid candidates.
class Structure {
 public:
  Structure() = default;
  explicit Structure(std::size_t n) : parents_(n) {}
  explicit Structure(std::vector<std::vector<std::size_t>> parents);

  std::size_t size() const { return parents_.size(); }
  const std::vector<std::size_t>& parents(std::size_t child) const { return parents_.at(child); }
  std::uint64_t parent_mask(std::size_t child) const;
  bool has_edge(std::size_t parent, std::size_t child) const;
  std::size_t edge_count() const;
  /// Directed edges (parent, child), ordered by child then parent.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::vector<std::vector<std::size_t>> children() const;

  void add_edge(std::size_t parent, std::size_t child);
  void remove_edge(std::size_t parent, std::size_t child);

  bool operator==(const Structure&) const = default;

 private:
  std::vector<std::vector<std::size_t>> parents_;
};

/// True iff the skeleton is a forest. Each directed edge contributes one
/// undirected edge, so a pair a→b, b→a counts as a cycle.
bool is_polytree(const Structure& s);
std::size_t max_indegree(const Structure& s);
bool is_branching(const Structure& s);
bool is_k_polytree(const Structure& s, std::size_t k);

struct SourceCounts {
  std::size_t sources = 0;        // nodes with no parents
  std::size_t multi_parent = 0;   // nodes with two or more parents
};
SourceCounts count_sources_and_multiparents(const Structure& s);

/// Connected components of the skeleton; each is a sorted node list, ordered
/// by smallest member.
std::vector<std::vector<std::size_t>> skeleton_components(const Structure& s);

struct ScoreBreakdown {
  std::vector<double> per_node;  // H(X_i | parents_i) in bits
  double total = 0.0;
};

/// Negative log-likelihood Σ H(X_i | Π_i) under `dist`.
ScoreBreakdown score(const Structure& s, const Distribution& dist);
ScoreBreakdown score(const Structure& s, EntropyCache& cache);

std::string structure_to_dot(const Structure& s, const std::vector<std::string>& names);
Structure structure_from_dot(const std::string& text, const std::vector<std::string>& names);

// {"nodes":[{"name","parents":[...]}...]}
nlohmann::json structure_to_json(const Structure& s, const std::vector<std::string>& names);
Structure structure_from_json(const nlohmann::json& j, const std::vector<std::string>& names);

// {"total_bits", "per_node":[{"name","parents","h_bits"}...]}
nlohmann::json score_report_json(const Structure& s, const ScoreBreakdown& breakdown,
                                 const std::vector<std::string>& names);

}  // namespace polytree
