#include "polytree/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polytree/error.hpp"
#include "polytree/io.hpp"

namespace polytree {

namespace {

std::vector<std::size_t> ancestors_and_self(const Structure& s, std::size_t node) {
  std::vector<bool> seen(s.size(), false);
  std::vector<std::size_t> stack{node};
  seen[node] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t p : s.parents(u)) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

double subtree_sum(const ChargeReport& report, std::size_t node, double NodeCharge::*field) {
  double total = 0.0;
  for (std::size_t x : report.nodes[node].subtree) total += report.nodes[x].*field;
  return total;
}

void require_single_sink(const ChargeReport& report) {
  if (!all_components_single_sink(report.polytree)) {
    throw DomainError("multi_sink",
                      "polytree has a component with more than one sink; subtree lemmas are "
                      "only checked on single-sink components");
  }
}

nlohmann::json subtree_checks_json(const std::vector<SubtreeCheck>& checks,
                                   const std::vector<std::string>& names) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) {
    out.push_back({{"node", names.at(c.node)},
                   {"lhs_bits", round_report(c.lhs)},
                   {"rhs_bits", round_report(c.rhs)},
                   {"pass", c.pass}});
  }
  return out;
}

std::vector<SubtreeCheck> lemma2_checks(const ChargeReport& report,
                                        const std::vector<std::size_t>& nodes) {
  std::vector<SubtreeCheck> out;
  for (std::size_t z : nodes) {
    const auto& node = report.nodes[z];
    const double lhs = subtree_sum(report, z, &NodeCharge::charge);
    const double rhs =
        0.5 * node.subtree_residual * std::log2(static_cast<double>(node.subtree.size()));
    out.push_back({z, lhs, rhs, lhs <= rhs + kBoundTolerance});
  }
  return out;
}

double lemma4_factor(const EntropyRange& range) {
  return 2.5 + 0.5 * std::log2(range.upper / range.lower);
}

std::vector<SubtreeCheck> lemma4_checks(const ChargeReport& report,
                                        const std::vector<std::size_t>& nodes) {
  const double factor = lemma4_factor(report.range);
  std::vector<SubtreeCheck> out;
  for (std::size_t z : nodes) {
    const double lhs = subtree_sum(report, z, &NodeCharge::capped_charge);
    const double rhs = factor * report.nodes[z].subtree_residual;
    out.push_back({z, lhs, rhs, lhs <= rhs + kBoundTolerance});
  }
  return out;
}

std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

EntropyRange compute_UL(const Distribution& dist) {
  EntropyRange range{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < dist.num_variables(); ++i) {
    const double h = entropy(dist, {i});
    range.upper = std::max(range.upper, h);
    range.lower = std::min(range.lower, h);
  }
  return range;
}

ChargeReport charge_report(const Distribution& dist, const Structure& polytree) {
  if (polytree.size() != dist.num_variables()) {
    throw DomainError("invalid_argument", "structure size does not match the distribution");
  }
  if (!is_polytree(polytree)) {
    throw DomainError("not_polytree", "charge accounting requires a polytree");
  }
  EntropyCache cache(dist);
  const std::size_t n = polytree.size();

  ChargeReport report;
  report.polytree = polytree;
  report.counts = count_sources_and_multiparents(polytree);
  report.nodes.resize(n);
  report.node_entropy.resize(n);
  report.range = {0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    report.node_entropy[i] = cache.joint(std::uint64_t{1} << i);
    report.range.upper = std::max(report.range.upper, report.node_entropy[i]);
    report.range.lower = std::min(report.range.lower, report.node_entropy[i]);
    report.nodes[i].residual = cache.conditional(i, polytree.parent_mask(i));
    report.h_star += report.nodes[i].residual;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = report.nodes[i];
    node.subtree = ancestors_and_self(polytree, i);
    for (std::size_t x : node.subtree) node.subtree_residual += report.nodes[x].residual;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = report.nodes[i];
    const auto& parents = polytree.parents(i);
    if (parents.size() >= 2) {
      double sum = 0.0;
      double largest = 0.0;
      for (std::size_t p : parents) {
        sum += report.nodes[p].subtree_residual;
        largest = std::max(largest, report.nodes[p].subtree_residual);
      }
      node.charge = sum - largest;
    }
    node.capped_charge = std::min(node.charge, report.range.upper);
  }
  return report;
}

std::vector<std::vector<std::size_t>> single_sink_components(const Structure& s) {
  const auto children = s.children();
  std::vector<std::vector<std::size_t>> out;
  for (auto& component : skeleton_components(s)) {
    const auto sinks = std::count_if(component.begin(), component.end(),
                                     [&](std::size_t v) { return children[v].empty(); });
    if (sinks == 1) out.push_back(std::move(component));
  }
  return out;
}

bool all_components_single_sink(const Structure& s) {
  return single_sink_components(s).size() == skeleton_components(s).size();
}

std::vector<SubtreeCheck> verify_lemma2(const ChargeReport& report) {
  require_single_sink(report);
  return lemma2_checks(report, all_nodes(report.nodes.size()));
}

std::vector<SubtreeCheck> verify_lemma4(const ChargeReport& report) {
  require_single_sink(report);
  if (report.range.lower <= kMinLowerEntropy) {
    throw DomainError("not_applicable", "L is zero; the U/L subtree bound does not apply");
  }
  return lemma4_checks(report, all_nodes(report.nodes.size()));
}

bool BoundTable::all_pass() const {
  auto ok = [](const auto& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  };
  return ok(theorems) && ok(lemma2) && ok(lemma4);
}

BoundTable verify_bounds(const Distribution& dist, const Structure& optimal,
                         const Structure& branching) {
  if (!is_branching(branching)) {
    throw DomainError("invalid_argument", "the branching argument is not a branching");
  }
  BoundTable table;
  table.charges = charge_report(dist, optimal);
  table.optimal_score = table.charges.h_star;
  table.branching_score = score(branching, dist).total;

  const auto& range = table.charges.range;
  const bool ul_applicable = range.lower > kMinLowerEntropy;
  const double n = static_cast<double>(dist.num_variables());
  const double reduced_n =
      static_cast<double>(table.charges.counts.sources + table.charges.counts.multi_parent);

  auto add = [&](std::string name, double factor, bool applicable) {
    BoundCheck check{std::move(name), factor, table.branching_score, 0.0, applicable, true};
    if (applicable) {
      check.rhs = factor * table.optimal_score;
      check.pass = check.lhs <= check.rhs + kBoundTolerance;
    }
    table.theorems.push_back(check);
  };
  add("theorem1", ul_applicable ? 1.0 + range.upper / range.lower : 0.0, ul_applicable);
  add("theorem3", 1.0 + 0.5 * std::log2(n), true);
  add("theorem3_remark", 1.0 + 0.5 * std::log2(reduced_n), true);
  add("theorem5", ul_applicable ? 3.5 + 0.5 * std::log2(range.upper / range.lower) : 0.0,
      ul_applicable);

  std::vector<std::size_t> checked;
  const auto single = single_sink_components(optimal);
  table.skipped_components = skeleton_components(optimal).size() - single.size();
  for (const auto& component : single) checked.insert(checked.end(), component.begin(), component.end());
  std::sort(checked.begin(), checked.end());
  table.lemma2 = lemma2_checks(table.charges, checked);
  if (ul_applicable) table.lemma4 = lemma4_checks(table.charges, checked);
  return table;
}

nlohmann::json charge_report_json(const ChargeReport& report, const std::vector<std::string>& names) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < report.nodes.size(); ++i) {
    const auto& node = report.nodes[i];
    nlohmann::json subtree = nlohmann::json::array();
    for (std::size_t x : node.subtree) subtree.push_back(names.at(x));
    nodes.push_back({{"name", names.at(i)},
                     {"entropy_bits", round_report(report.node_entropy[i])},
                     {"delta_bits", round_report(node.residual)},
                     {"subtree", subtree},
                     {"subtree_size", node.subtree.size()},
                     {"subtree_delta_bits", round_report(node.subtree_residual)},
                     {"charge_bits", round_report(node.charge)},
                     {"capped_charge_bits", round_report(node.capped_charge)}});
  }
  return {{"nodes", nodes},
          {"U_bits", round_report(report.range.upper)},
          {"L_bits", round_report(report.range.lower)},
          {"h_star_bits", round_report(report.h_star)},
          {"n_sources", report.counts.sources},
          {"n_multi_parent", report.counts.multi_parent}};
}

nlohmann::json bound_table_json(const BoundTable& table, const std::vector<std::string>& names) {
  nlohmann::json theorems = nlohmann::json::object();
  for (const auto& t : table.theorems) {
    if (t.applicable) {
      theorems[t.name] = {{"factor", round_report(t.factor)},
                          {"lhs_bits", round_report(t.lhs)},
                          {"rhs_bits", round_report(t.rhs)},
                          {"pass", t.pass},
                          {"applicable", true}};
    } else {
      theorems[t.name] = {{"factor", nullptr},
                          {"lhs_bits", round_report(t.lhs)},
                          {"rhs_bits", nullptr},
                          {"pass", nullptr},
                          {"applicable", false}};
    }
  }
  return {{"branching_bits", round_report(table.branching_score)},
          {"optimal_bits", round_report(table.optimal_score)},
          {"theorems", theorems},
          {"lemma2", subtree_checks_json(table.lemma2, names)},
          {"lemma4", subtree_checks_json(table.lemma4, names)},
          {"skipped_multi_sink_components", table.skipped_components},
          {"charges", charge_report_json(table.charges, names)},
          {"all_pass", table.all_pass()}};
}

}  // namespace polytree
