#include "polytree/gadget.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "polytree/error.hpp"
#include "polytree/io.hpp"

namespace polytree {

namespace {

constexpr std::size_t kExhaustiveAssignmentLimit = 12;
constexpr std::size_t kSampledAssignments = 256;

[[noreturn]] void formula_error(const std::string& message) {
  throw DomainError("invalid_formula", message);
}

std::size_t var_of(int literal) { return static_cast<std::size_t>(std::abs(literal)); }

}  // namespace

CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CnfFormula formula;
  bool saw_header = false;
  std::size_t declared_clauses = 0;
  std::vector<int> current;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c") continue;
    if (first == "%") break;
    if (first == "p") {
      std::string kind;
      long vars = -1;
      long clauses = -1;
      if (saw_header || !(ls >> kind >> vars >> clauses) || kind != "cnf" || vars < 0 || clauses < 0) {
        throw DomainError("parse_error", "DIMACS line " + std::to_string(line_no) + ": bad header");
      }
      saw_header = true;
      formula.num_vars = static_cast<std::size_t>(vars);
      declared_clauses = static_cast<std::size_t>(clauses);
      continue;
    }
    if (!saw_header) {
      throw DomainError("parse_error", "DIMACS clause before the 'p cnf' header");
    }
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      char* end = nullptr;
      const long lit = std::strtol(token.c_str(), &end, 10);
      if (*end != '\0') {
        throw DomainError("parse_error",
                          "DIMACS line " + std::to_string(line_no) + ": bad literal '" + token + "'");
      }
      if (lit == 0) {
        formula.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (static_cast<std::size_t>(std::labs(lit)) > formula.num_vars) {
        throw DomainError("parse_error", "DIMACS line " + std::to_string(line_no) +
                                             ": literal exceeds declared variable count");
      }
      current.push_back(static_cast<int>(lit));
    }
  }
  if (!saw_header) throw DomainError("parse_error", "DIMACS input has no 'p cnf' header");
  if (!current.empty()) throw DomainError("parse_error", "last DIMACS clause is not 0-terminated");
  if (formula.clauses.size() != declared_clauses) {
    throw DomainError("parse_error", "DIMACS header declares " + std::to_string(declared_clauses) +
                                         " clauses but " + std::to_string(formula.clauses.size()) +
                                         " were read");
  }
  return formula;
}

std::string to_dimacs(const CnfFormula& formula) {
  std::ostringstream out;
  out << "p cnf " << formula.num_vars << ' ' << formula.clauses.size() << '\n';
  for (const auto& clause : formula.clauses) {
    for (int lit : clause) out << lit << ' ';
    out << "0\n";
  }
  return out.str();
}

void validate_max3sat3(const CnfFormula& formula) {
  if (formula.num_vars == 0) formula_error("formula has no variables");
  std::vector<std::size_t> positive(formula.num_vars + 1, 0);
  std::vector<std::size_t> negative(formula.num_vars + 1, 0);
  for (std::size_t j = 0; j < formula.clauses.size(); ++j) {
    const auto& clause = formula.clauses[j];
    if (clause.empty() || clause.size() > 3) {
      formula_error("clause " + std::to_string(j + 1) + " must have 1 to 3 literals");
    }
    for (std::size_t a = 0; a < clause.size(); ++a) {
      for (std::size_t b = a + 1; b < clause.size(); ++b) {
        if (var_of(clause[a]) == var_of(clause[b])) {
          formula_error("clause " + std::to_string(j + 1) + " mentions variable " +
                        std::to_string(var_of(clause[a])) + " twice");
        }
      }
      const std::size_t v = var_of(clause[a]);
      if (v == 0 || v > formula.num_vars) formula_error("literal out of range");
      ++(clause[a] > 0 ? positive : negative)[v];
    }
  }
  for (std::size_t v = 1; v <= formula.num_vars; ++v) {
    if (positive[v] + negative[v] != 3) {
      formula_error("variable " + std::to_string(v) + " occurs " +
                    std::to_string(positive[v] + negative[v]) + " times (must be exactly 3)");
    }
    if (positive[v] == 0 || negative[v] == 0) {
      formula_error("variable " + std::to_string(v) + " occurs with only one polarity");
    }
  }
}

GadgetParams make_gadget_params(bool include_inedge_blockers, double blocker_q,
                                std::size_t blocker_copies) {
  GadgetParams params;
  params.p = solve_binary_entropy(0.5);
  params.delta = 1.0 - binary_entropy(2.0 * params.p * (1.0 - params.p));
  params.include_inedge_blockers = include_inedge_blockers;
  params.blocker_q = blocker_q;
  params.blocker_copies = blocker_copies;
  if (include_inedge_blockers) {
    if (!(blocker_q > 0.0 && blocker_q < 0.5) || blocker_copies < 2) {
      throw DomainError("invalid_argument", "blockers need 0 < q < 1/2 and k > 1");
    }
    const double gap = binary_entropy(2.0 * blocker_q * (1.0 - blocker_q)) - binary_entropy(blocker_q);
    if (static_cast<double>(blocker_copies) * gap <= 1.0) {
      throw DomainError("invalid_argument",
                        "blocker parameters violate k(H(2q(1-q)) - H(q)) > 1 (got " +
                            std::to_string(static_cast<double>(blocker_copies) * gap) + ")");
    }
  }
  return params;
}

std::size_t LayeredNet::add_coin(std::string name, double p_one) {
  if (!(p_one >= 0.0 && p_one <= 1.0)) throw DomainError("invalid_argument", "coin bias out of range");
  coins_.push_back({std::move(name), p_one});
  return coins_.size() - 1;
}

std::size_t LayeredNet::add_node(std::string name, std::string layer,
                                 std::vector<std::vector<std::size_t>> components) {
  if (components.empty() || components.size() > 20) {
    throw DomainError("invalid_argument", "a node needs 1 to 20 components");
  }
  for (auto& component : components) {
    std::sort(component.begin(), component.end());
    for (std::size_t c : component) {
      if (c >= coins_.size()) throw DomainError("invalid_argument", "unknown coin");
    }
  }
  nodes_.push_back({std::move(name), std::move(layer), std::move(components)});
  return nodes_.size() - 1;
}

std::vector<std::string> LayeredNet::node_names() const {
  std::vector<std::string> out;
  for (const auto& node : nodes_) out.push_back(node.name);
  return out;
}

std::vector<std::size_t> LayeredNet::ancestral_coins(std::span<const std::size_t> nodes) const {
  std::vector<std::size_t> out;
  for (std::size_t i : nodes) {
    for (const auto& component : node(i).components) out.insert(out.end(), component.begin(), component.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t LayeredNet::node_value(std::size_t node_index,
                                     const std::vector<std::uint8_t>& coin_values) const {
  std::uint64_t value = 0;
  const auto& components = node(node_index).components;
  for (std::size_t j = 0; j < components.size(); ++j) {
    std::uint8_t bit = 0;
    for (std::size_t c : components[j]) bit ^= coin_values[c];
    value |= static_cast<std::uint64_t>(bit) << j;
  }
  return value;
}

double LayeredNet::entropy(std::span<const std::size_t> nodes) const {
  if (nodes.empty()) return 0.0;
  const auto coins = ancestral_coins(nodes);
  if (coins.size() > kMaxEnumeratedCoins) {
    throw DomainError("cap_exceeded", "entropy query depends on " + std::to_string(coins.size()) +
                                          " coins (limit " + std::to_string(kMaxEnumeratedCoins) + ")");
  }
  std::vector<std::uint8_t> values(coins_.size(), 0);
  std::map<std::vector<std::uint64_t>, double> joint;
  std::vector<std::uint64_t> key(nodes.size());
  for (std::uint64_t assignment = 0; assignment < (std::uint64_t{1} << coins.size()); ++assignment) {
    double weight = 1.0;
    for (std::size_t b = 0; b < coins.size(); ++b) {
      const auto bit = static_cast<std::uint8_t>(assignment >> b & 1);
      values[coins[b]] = bit;
      const double p = coins_[coins[b]].p_one;
      weight *= bit ? p : 1.0 - p;
    }
    if (weight == 0.0) continue;
    for (std::size_t i = 0; i < nodes.size(); ++i) key[i] = node_value(nodes[i], values);
    joint[key] += weight;
  }
  double h = 0.0;
  for (const auto& [k, p] : joint) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return clamp_information(h);
}

double LayeredNet::conditional_entropy(std::size_t target, std::span<const std::size_t> given) const {
  if (std::find(given.begin(), given.end(), target) != given.end()) {
    throw DomainError("invalid_argument", "target node appears in the conditioning set");
  }
  const std::size_t single[] = {target};
  if (given.empty()) return entropy(single);
  std::vector<std::size_t> both(given.begin(), given.end());
  both.push_back(target);
  return clamp_information(entropy(both) - entropy(given));
}

Distribution dense_distribution(const LayeredNet& net, std::size_t max_states) {
  const std::size_t num_coins = net.coins().size();
  if (num_coins > kMaxEnumeratedCoins) {
    throw DomainError("cap_exceeded", "too many coins to enumerate the full joint");
  }
  std::vector<VariableMeta> vars;
  for (std::size_t i = 0; i < net.nodes().size(); ++i) vars.push_back({net.node(i).name, net.node_arity(i)});
  const std::size_t states = joint_state_count(vars, max_states);
  std::vector<double> probs(states, 0.0);
  std::vector<std::uint8_t> values(num_coins, 0);
  for (std::uint64_t assignment = 0; assignment < (std::uint64_t{1} << num_coins); ++assignment) {
    double weight = 1.0;
    for (std::size_t c = 0; c < num_coins; ++c) {
      values[c] = static_cast<std::uint8_t>(assignment >> c & 1);
      weight *= values[c] ? net.coins()[c].p_one : 1.0 - net.coins()[c].p_one;
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      index = index * static_cast<std::size_t>(vars[i].arity) + net.node_value(i, values);
    }
    probs[index] += weight;
  }
  return Distribution(std::move(vars), std::move(probs), max_states);
}

LayeredSampler::LayeredSampler(const LayeredNet& net, std::uint64_t seed, std::uint64_t stream)
    : net_(&net), rng_(seed ^ (stream * 0x9E3779B97F4A7C15ULL)) {}

Dataset LayeredSampler::sample(std::size_t rows) {
  Dataset data;
  for (std::size_t i = 0; i < net_->nodes().size(); ++i) {
    data.variables.push_back({net_->node(i).name, net_->node_arity(i)});
  }
  data.rows.reserve(rows);
  std::vector<std::uint8_t> values(net_->coins().size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < values.size(); ++c) {
      values[c] = rng_.bernoulli(net_->coins()[c].p_one) ? 1 : 0;
    }
    std::vector<int> row(net_->nodes().size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<int>(net_->node_value(i, values));
    data.rows.push_back(std::move(row));
  }
  return data;
}

CompiledGadget compile_cnf(const CnfFormula& formula, const GadgetParams& params) {
  validate_max3sat3(formula);
  CompiledGadget g;
  g.formula = formula;
  g.params = params;
  const std::size_t m = formula.clauses.size();
  const std::size_t n = formula.num_vars;
  auto& net = g.net;

  // Occurrence bookkeeping: which clauses hold x_i, and with which sign.
  std::vector<std::vector<std::pair<std::size_t, bool>>> occ(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (int lit : formula.clauses[j]) occ[var_of(lit) - 1].emplace_back(j, lit > 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (const auto& o : occ[i]) pos += o.second ? 1 : 0;
    VariableOccurrences v;
    v.majority_positive = pos == 2;
    std::vector<std::size_t> same;
    for (const auto& [clause, positive] : occ[i]) {
      if (positive == v.majority_positive) {
        same.push_back(clause);
      } else {
        v.opposite = clause;
      }
    }
    v.same_first = same.at(0);
    v.same_second = same.at(1);
    g.occurrences.push_back(v);
  }

  std::vector<std::size_t> clause_coin(m);
  for (std::size_t j = 0; j < m; ++j) {
    clause_coin[j] = net.add_coin("c" + std::to_string(j + 1), params.p);
    g.clause_nodes.push_back(net.add_node("C" + std::to_string(j + 1), "top", {{clause_coin[j]}}));
  }

  std::vector<std::size_t> p_coin(n);
  std::vector<std::size_t> n_coin(n);
  const std::size_t copies = params.blocker_copies;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = std::to_string(i + 1);
    const std::size_t r = net.add_coin("r" + id, 0.5);
    p_coin[i] = net.add_coin("p" + id, 0.5);
    n_coin[i] = net.add_coin("n" + id, 0.5);
    const std::size_t z = net.add_coin("z" + id, params.p);

    std::vector<std::vector<std::size_t>> satellite{{r}};
    std::vector<std::size_t> a_coins;
    std::vector<std::size_t> b_coins;
    if (params.include_inedge_blockers) {
      for (std::size_t t = 0; t < copies; ++t) {
        a_coins.push_back(net.add_coin("a" + id + "_" + std::to_string(t + 1), params.blocker_q));
        b_coins.push_back(net.add_coin("b" + id + "_" + std::to_string(t + 1), params.blocker_q));
        satellite.push_back({a_coins.back(), b_coins.back()});
      }
    }
    g.satellite_nodes.push_back(net.add_node("R" + id, "middle", std::move(satellite)));

    const auto& o = g.occurrences[i];
    g.principal_nodes.push_back(net.add_node(
        "X" + id, "middle",
        {{p_coin[i]},
         {n_coin[i]},
         {clause_coin[o.same_first], clause_coin[o.same_second]},
         {r, clause_coin[o.opposite], z}}));

    if (params.include_inedge_blockers) {
      std::vector<std::vector<std::size_t>> a_components;
      std::vector<std::vector<std::size_t>> b_components;
      for (std::size_t t = 0; t < copies; ++t) {
        a_components.push_back({a_coins[t]});
        b_components.push_back({b_coins[t]});
      }
      g.blocker_nodes.push_back(net.add_node("A" + id, "blocker", std::move(a_components)));
      g.blocker_nodes.push_back(net.add_node("B" + id, "blocker", std::move(b_components)));
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.link_nodes.push_back(
        net.add_node("L" + std::to_string(i + 1), "third", {{n_coin[i], p_coin[i + 1]}}));
  }

  auto layer_sum = [&](const std::vector<std::size_t>& nodes) {
    double total = 0.0;
    for (std::size_t v : nodes) {
      const std::size_t single[] = {v};
      total += net.entropy(single);
    }
    return total;
  };
  const double hq = binary_entropy(2.0 * params.p * (1.0 - params.p));
  g.top = {layer_sum(g.clause_nodes), static_cast<double>(m) * binary_entropy(params.p)};
  double middle_target = static_cast<double>(n) * (hq + 4.0);
  if (params.include_inedge_blockers) {
    const double q = params.blocker_q;
    middle_target += static_cast<double>(n * copies) * binary_entropy(2.0 * q * (1.0 - q));
  }
  g.middle = {layer_sum(g.satellite_nodes) + layer_sum(g.principal_nodes), middle_target};
  g.third = {layer_sum(g.link_nodes), static_cast<double>(n - 1)};
  return g;
}

bool GadgetReport::all_pass() const {
  return std::all_of(decreases.begin(), decreases.end(), [](const auto& r) { return r.pass; }) &&
         std::all_of(cost_drops.begin(), cost_drops.end(), [](const auto& r) { return r.pass; });
}

namespace {

// Parent sets of X_i, in the order the decrease table lists them.
enum ParentChoice : std::size_t {
  kR = 0, kRC1, kRC2, kRC3, kC1C2, kC1C3, kC2C3, kNumChoices
};

constexpr const char* kChoiceLabels[kNumChoices] = {"R", "R,C1", "R,C2", "R,C3", "C1,C2", "C1,C3", "C2,C3"};

std::vector<std::size_t> choice_nodes(const CompiledGadget& g, std::size_t i, ParentChoice choice) {
  const std::size_t r = g.satellite_nodes[i];
  const auto& o = g.occurrences[i];
  const std::size_t c1 = g.clause_nodes[o.same_first];
  const std::size_t c2 = g.clause_nodes[o.same_second];
  const std::size_t c3 = g.clause_nodes[o.opposite];
  switch (choice) {
    case kR: return {r};
    case kRC1: return {r, c1};
    case kRC2: return {r, c2};
    case kRC3: return {r, c3};
    case kC1C2: return {c1, c2};
    case kC1C3: return {c1, c3};
    case kC2C3: return {c2, c3};
    default: break;
  }
  throw InternalError("bad parent choice");
}

}  // namespace

GadgetReport verify_gadget(const CompiledGadget& g) {
  const double delta = g.params.delta;
  const double expected[kNumChoices] = {delta, 0.5, 0.5, 0.5, 1.0 - delta, 0.5 - delta, 0.5 - delta};
  const std::size_t n = g.formula.num_vars;
  const std::size_t m = g.formula.clauses.size();

  GadgetReport report;
  std::vector<std::array<double, kNumChoices>> decrease(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = g.principal_nodes[i];
    const std::size_t single[] = {x};
    const double hx = g.net.entropy(single);
    for (std::size_t c = 0; c < kNumChoices; ++c) {
      const auto given = choice_nodes(g, i, static_cast<ParentChoice>(c));
      decrease[i][c] = hx - g.net.conditional_entropy(x, given);
      report.decreases.push_back({i, kChoiceLabels[c], decrease[i][c], expected[c],
                                  std::abs(decrease[i][c] - expected[c]) <= kGadgetTolerance});
    }
  }

  std::vector<std::vector<bool>> assignments;
  if (n <= kExhaustiveAssignmentLimit) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
      std::vector<bool> a(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = bits >> i & 1;
      assignments.push_back(std::move(a));
    }
  } else {
    report.exhaustive_assignments = false;
    Rng rng(0);
    for (std::size_t s = 0; s < kSampledAssignments; ++s) {
      std::vector<bool> a(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = rng.bernoulli(0.5);
      assignments.push_back(std::move(a));
    }
  }

  for (const auto& a : assignments) {
    // Each satisfied clause chooses the variable of its first true literal.
    std::vector<std::vector<std::size_t>> chosen_by(n);
    std::size_t satisfied = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (int lit : g.formula.clauses[j]) {
        const std::size_t v = var_of(lit) - 1;
        if (a[v] == (lit > 0)) {
          chosen_by[v].push_back(j);
          ++satisfied;
          break;
        }
      }
    }
    double drop = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = g.occurrences[i];
      ParentChoice choice = kR;
      if (chosen_by[i].size() == 2) {
        choice = kC1C2;
      } else if (chosen_by[i].size() == 1) {
        const std::size_t j = chosen_by[i][0];
        choice = j == o.same_first ? kRC1 : j == o.same_second ? kRC2 : kRC3;
      }
      drop += decrease[i][choice];
    }
    const double want = static_cast<double>(satisfied) * (0.5 - delta) + static_cast<double>(n) * delta;
    report.best_satisfied = std::max(report.best_satisfied, satisfied);
    report.cost_drops.push_back({a, satisfied, drop, want, std::abs(drop - want) <= kGadgetTolerance});
  }
  return report;
}

nlohmann::json gadget_metadata_json(const CompiledGadget& g) {
  auto layer = [](const LayerEntropy& e) {
    return nlohmann::json{{"measured_bits", round_report(e.measured)},
                          {"target_bits", round_report(e.target)},
                          {"pass", std::abs(e.measured - e.target) <= kGadgetTolerance}};
  };
  nlohmann::json j{{"m", g.formula.clauses.size()},
                   {"n", g.formula.num_vars},
                   {"p", round_report(g.params.p)},
                   {"delta", round_report(g.params.delta)},
                   {"layer_entropies",
                    {{"top", layer(g.top)}, {"middle", layer(g.middle)}, {"third", layer(g.third)}}},
                   {"nodes", g.net.node_names()},
                   {"inedge_blockers", g.params.include_inedge_blockers}};
  if (g.params.include_inedge_blockers) {
    j["blocker_q"] = round_report(g.params.blocker_q);
    j["blocker_copies"] = g.params.blocker_copies;
  }
  return j;
}

nlohmann::json gadget_report_json(const GadgetReport& report, const CompiledGadget& g) {
  nlohmann::json decreases = nlohmann::json::array();
  for (const auto& r : report.decreases) {
    decreases.push_back({{"variable", "x" + std::to_string(r.variable + 1)},
                         {"parents", r.parents},
                         {"measured_bits", round_report(r.measured)},
                         {"expected_bits", round_report(r.expected)},
                         {"pass", r.pass}});
  }
  nlohmann::json drops = nlohmann::json::array();
  for (const auto& r : report.cost_drops) {
    std::string bits;
    for (bool b : r.assignment) bits += b ? '1' : '0';
    drops.push_back({{"assignment", bits},
                     {"satisfied", r.satisfied},
                     {"measured_bits", round_report(r.measured)},
                     {"expected_bits", round_report(r.expected)},
                     {"pass", r.pass}});
  }
  return {{"metadata", gadget_metadata_json(g)},
          {"decrease_table", decreases},
          {"cost_drops", drops},
          {"best_satisfied", report.best_satisfied},
          {"exhaustive_assignments", report.exhaustive_assignments},
          {"all_pass", report.all_pass()}};
}

}  // namespace polytree
