#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "polytree/distribution.hpp"
#include "polytree/structure.hpp"

namespace polytree {

inline constexpr double kBoundTolerance = 1e-6;
// L at or below this makes the U/L-dependent bounds not applicable.
inline constexpr double kMinLowerEntropy = 1e-9;

struct EntropyRange {
  double upper = 0.0;  // U = max_i H(X_i)
  double lower = 0.0;  // L = min_i H(X_i)
};

EntropyRange compute_UL(const Distribution& dist);

struct NodeCharge {
  double residual = 0.0;              // Δ(Z) = H(Z | parents)
  std::vector<std::size_t> subtree;   // T_Z: Z and all its ancestors, sorted
  double subtree_residual = 0.0;      // Δ(T_Z)
  double charge = 0.0;                // C(Z)
  double capped_charge = 0.0;         // C'(Z) = min(C(Z), U)
};

/// Charge accounting for one polytree, normally the optimal one.
struct ChargeReport {
  Structure polytree;
  std::vector<double> node_entropy;  // H(X_i)
  std::vector<NodeCharge> nodes;
  EntropyRange range;
  double h_star = 0.0;  // Σ Δ(Z)
  SourceCounts counts;
};

ChargeReport charge_report(const Distribution& dist, const Structure& polytree);

/// One per-subtree inequality lhs <= rhs (+ tolerance), rooted at `node`.
struct SubtreeCheck {
  std::size_t node = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Skeleton components that have exactly one sink.
std::vector<std::vector<std::size_t>> single_sink_components(const Structure& s);
bool all_components_single_sink(const Structure& s);

/// Σ_{X ∈ T_Z} C(X) <= ½ Δ(T_Z) log2 |T_Z| for every node Z.
/// Throws DomainError if some component has more than one sink.
std::vector<SubtreeCheck> verify_lemma2(const ChargeReport& report);

/// Σ_{X ∈ T_Z} C'(X) <= (5/2 + ½ log2(U/L)) Δ(T_Z) for every node Z.
/// Same single-sink precondition; also requires L > 0.
std::vector<SubtreeCheck> verify_lemma4(const ChargeReport& report);

struct BoundCheck {
  std::string name;
  double factor = 0.0;
  double lhs = 0.0;  // branching score
  double rhs = 0.0;  // factor * optimal score
  bool applicable = true;
  bool pass = true;
};

struct BoundTable {
  double branching_score = 0.0;
  double optimal_score = 0.0;
  std::vector<BoundCheck> theorems;
  // Subtree checks, restricted to single-sink components of the optimum.
  std::vector<SubtreeCheck> lemma2;
  std::vector<SubtreeCheck> lemma4;
  std::size_t skipped_components = 0;  // multi-sink components not checked
  ChargeReport charges;

  bool all_pass() const;
};

/// Compares the branching against the (exact) optimal polytree under every
/// guarantee: (1 + U/L), (1 + ½ log2 n), the same with n replaced by
/// n₀ + n≥₂ of the optimum, and (7/2 + ½ log2(U/L)); plus the per-subtree
/// charge lemmas on single-sink components.
BoundTable verify_bounds(const Distribution& dist, const Structure& optimal,
                         const Structure& branching);

nlohmann::json charge_report_json(const ChargeReport& report, const std::vector<std::string>& names);
nlohmann::json bound_table_json(const BoundTable& table, const std::vector<std::string>& names);

}  // namespace polytree
