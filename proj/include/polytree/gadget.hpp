#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polytree/distribution.hpp"
#include "polytree/generators.hpp"

namespace polytree {

/// CNF over variables 1..num_vars; literals are signed DIMACS integers.
struct CnfFormula {
  std::size_t num_vars = 0;
  std::vector<std::vector<int>> clauses;
};

CnfFormula parse_dimacs(const std::string& text);
std::string to_dimacs(const CnfFormula& formula);

/// Throws DomainError("invalid_formula") unless every clause has 1..3 literals
/// with no repeated variable, and every variable occurs exactly three times
/// with both polarities.
void validate_max3sat3(const CnfFormula& formula);

struct GadgetParams {
  double p = 0.0;      // clause-coin bias, H(p) = 1/2
  double delta = 0.0;  // 1 - H(2p(1-p))
  bool include_inedge_blockers = false;
  double blocker_q = 0.1;
  std::size_t blocker_copies = 5;
};

/// Solves for p and δ; with blockers enabled, checks k(H(2q(1-q)) - H(q)) > 1.
GadgetParams make_gadget_params(bool include_inedge_blockers = false, double blocker_q = 0.1,
                                std::size_t blocker_copies = 5);

/// Boolean network whose nodes are tuples of XORs over independent coins.
///
/// Exact entropy queries only enumerate the coins that the queried nodes
/// depend on, so they stay cheap however large the whole network is.
class LayeredNet {
 public:
  struct Coin {
    std::string name;
    double p_one = 0.5;
  };
  struct Node {
    std::string name;
    std::string layer;
    // Each component is the XOR of the listed coins.
    std::vector<std::vector<std::size_t>> components;
  };

  std::size_t add_coin(std::string name, double p_one);
  std::size_t add_node(std::string name, std::string layer,
                       std::vector<std::vector<std::size_t>> components);

  const std::vector<Coin>& coins() const { return coins_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  std::vector<std::string> node_names() const;

  /// Coins that the given nodes depend on, sorted.
  std::vector<std::size_t> ancestral_coins(std::span<const std::size_t> nodes) const;

  double entropy(std::span<const std::size_t> nodes) const;
  double conditional_entropy(std::size_t target, std::span<const std::size_t> given) const;

  /// Value of a node (component j is bit j) given every coin's value.
  std::uint64_t node_value(std::size_t node, const std::vector<std::uint8_t>& coin_values) const;
  int node_arity(std::size_t node) const { return 1 << nodes_.at(node).components.size(); }

 private:
  std::vector<Coin> coins_;
  std::vector<Node> nodes_;
};

inline constexpr std::size_t kMaxEnumeratedCoins = 26;

/// Dense joint table over all nodes of a small net, by enumerating every coin.
Distribution dense_distribution(const LayeredNet& net, std::size_t max_states = kDefaultMaxStates);

/// Exact sampler: draws coins independently, then evaluates every node.
class LayeredSampler {
 public:
  LayeredSampler(const LayeredNet& net, std::uint64_t seed, std::uint64_t stream = 0);
  Dataset sample(std::size_t rows);

 private:
  const LayeredNet* net_;
  Rng rng_;
};

/// Occurrences of one CNF variable, split by polarity.
struct VariableOccurrences {
  std::size_t same_first = 0;   // C1: clause index, majority polarity
  std::size_t same_second = 0;  // C2
  std::size_t opposite = 0;     // C3: the lone opposite-polarity clause
  bool majority_positive = true;
};

struct LayerEntropy {
  double measured = 0.0;  // sum of node entropies in the layer
  double target = 0.0;
};

struct CompiledGadget {
  CnfFormula formula;
  GadgetParams params;
  LayeredNet net;
  std::vector<std::size_t> clause_nodes;     // C_j
  std::vector<std::size_t> satellite_nodes;  // R_i
  std::vector<std::size_t> principal_nodes;  // X_i
  std::vector<std::size_t> link_nodes;       // N_i xor P_{i+1}
  std::vector<std::size_t> blocker_nodes;    // A_i, B_i when enabled
  std::vector<VariableOccurrences> occurrences;
  LayerEntropy top, middle, third;
};

/// Builds the three-layer reduction network for a MAX3SAT(3) formula.
///
/// X_i = (P_i, N_i, C1 xor C2, R_i xor C3 xor Z_i), where C1, C2 are the
/// clause coins of x_i's two same-polarity occurrences, C3 the opposite one,
/// and Z_i a private B(p) coin.
CompiledGadget compile_cnf(const CnfFormula& formula, const GadgetParams& params);

struct DecreaseRow {
  std::size_t variable = 0;
  std::string parents;  // e.g. "R,C1"
  double measured = 0.0;
  double expected = 0.0;
  bool pass = false;
};

struct CostDropRow {
  std::vector<bool> assignment;
  std::size_t satisfied = 0;
  double measured = 0.0;
  double expected = 0.0;
  bool pass = false;
};

struct GadgetReport {
  std::vector<DecreaseRow> decreases;
  std::vector<CostDropRow> cost_drops;
  std::size_t best_satisfied = 0;
  bool exhaustive_assignments = true;
  bool all_pass() const;
};

inline constexpr double kGadgetTolerance = 1e-9;

/// Checks every principal node's entropy-decrease table and, for each
/// assignment, that the induced clause choices lower the second-layer cost by
/// m'(1/2 - δ) + nδ.
GadgetReport verify_gadget(const CompiledGadget& gadget);

nlohmann::json gadget_metadata_json(const CompiledGadget& gadget);
nlohmann::json gadget_report_json(const GadgetReport& report, const CompiledGadget& gadget);

}  // namespace polytree
