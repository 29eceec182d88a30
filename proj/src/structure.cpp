#include "polytree/structure.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>

#include "polytree/error.hpp"
#include "polytree/io.hpp"
#include "union_find.hpp"

namespace polytree {

namespace {

std::map<std::string, std::size_t> index_names(const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  return index;
}

std::size_t lookup(const std::map<std::string, std::size_t>& index, const std::string& name) {
  auto it = index.find(name);
  if (it == index.end()) throw DomainError("parse_error", "unknown variable '" + name + "'");
  return it->second;
}

std::string quote(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Structure::Structure(std::vector<std::vector<std::size_t>> parents) : parents_(std::move(parents)) {
  const std::size_t n = parents_.size();
  for (std::size_t child = 0; child < n; ++child) {
    auto& ps = parents_[child];
    std::sort(ps.begin(), ps.end());
    if (std::adjacent_find(ps.begin(), ps.end()) != ps.end()) {
      throw DomainError("invalid_argument", "duplicate parent of node " + std::to_string(child));
    }
    for (std::size_t p : ps) {
      if (p >= n) throw DomainError("invalid_argument", "parent index out of range");
      if (p == child) {
        throw DomainError("invalid_argument", "node " + std::to_string(child) + " is its own parent");
      }
    }
  }
}

std::uint64_t Structure::parent_mask(std::size_t child) const { return to_mask(parents(child)); }

bool Structure::has_edge(std::size_t parent, std::size_t child) const {
  const auto& ps = parents(child);
  return std::binary_search(ps.begin(), ps.end(), parent);
}

std::size_t Structure::edge_count() const {
  std::size_t count = 0;
  for (const auto& ps : parents_) count += ps.size();
  return count;
}

std::vector<std::pair<std::size_t, std::size_t>> Structure::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t child = 0; child < parents_.size(); ++child) {
    for (std::size_t p : parents_[child]) out.emplace_back(p, child);
  }
  return out;
}

std::vector<std::vector<std::size_t>> Structure::children() const {
  std::vector<std::vector<std::size_t>> out(parents_.size());
  for (std::size_t child = 0; child < parents_.size(); ++child) {
    for (std::size_t p : parents_[child]) out[p].push_back(child);
  }
  return out;
}

void Structure::add_edge(std::size_t parent, std::size_t child) {
  if (parent >= size() || child >= size() || parent == child) {
    throw DomainError("invalid_argument", "invalid edge");
  }
  auto& ps = parents_[child];
  auto it = std::lower_bound(ps.begin(), ps.end(), parent);
  if (it == ps.end() || *it != parent) ps.insert(it, parent);
}

void Structure::remove_edge(std::size_t parent, std::size_t child) {
  auto& ps = parents_.at(child);
  auto it = std::lower_bound(ps.begin(), ps.end(), parent);
  if (it != ps.end() && *it == parent) ps.erase(it);
}

bool is_polytree(const Structure& s) {
  detail::DisjointSets sets(s.size());
  for (const auto& [p, c] : s.edges()) {
    if (!sets.unite(p, c)) return false;
  }
  return true;
}

std::size_t max_indegree(const Structure& s) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) best = std::max(best, s.parents(i).size());
  return best;
}

bool is_branching(const Structure& s) { return max_indegree(s) <= 1 && is_polytree(s); }

bool is_k_polytree(const Structure& s, std::size_t k) {
  return max_indegree(s) <= k && is_polytree(s);
}

SourceCounts count_sources_and_multiparents(const Structure& s) {
  SourceCounts counts;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto indegree = s.parents(i).size();
    if (indegree == 0) ++counts.sources;
    if (indegree >= 2) ++counts.multi_parent;
  }
  return counts;
}

std::vector<std::vector<std::size_t>> skeleton_components(const Structure& s) {
  detail::DisjointSets sets(s.size());
  for (const auto& [p, c] : s.edges()) sets.unite(p, c);
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(s.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] == static_cast<std::size_t>(-1)) {
      slot[root] = out.size();
      out.emplace_back();
    }
    out[slot[root]].push_back(i);
  }
  return out;
}

ScoreBreakdown score(const Structure& s, EntropyCache& cache) {
  if (s.size() != cache.num_variables()) {
    throw DomainError("invalid_argument", "structure has " + std::to_string(s.size()) +
                                              " nodes but the distribution has " +
                                              std::to_string(cache.num_variables()) +
                                              " variables");
  }
  ScoreBreakdown out;
  out.per_node.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double h = cache.conditional(i, s.parent_mask(i));
    out.per_node.push_back(h);
    out.total += h;
  }
  return out;
}

ScoreBreakdown score(const Structure& s, const Distribution& dist) {
  EntropyCache cache(dist);
  return score(s, cache);
}

std::string structure_to_dot(const Structure& s, const std::vector<std::string>& names) {
  if (names.size() != s.size()) throw DomainError("invalid_argument", "name count mismatch");
  std::ostringstream out;
  out << "digraph polytree {\n";
  for (const auto& name : names) out << "  " << quote(name) << ";\n";
  for (const auto& [p, c] : s.edges()) {
    out << "  " << quote(names[p]) << " -> " << quote(names[c]) << ";\n";
  }
  out << "}\n";
  return out.str();
}

Structure structure_from_dot(const std::string& text, const std::vector<std::string>& names) {
  const auto index = index_names(names);
  // An identifier is either a bare word or a double-quoted string with escapes.
  static const std::string id = R"((\"(?:[^\"\\]|\\.)*\"|[A-Za-z0-9_.]+))";
  static const std::regex edge_re("^\\s*" + id + "\\s*->\\s*" + id + "\\s*(\\[[^\\]]*\\])?\\s*;?\\s*$");
  static const std::regex header_re(R"(^\s*(strict\s+)?digraph\b[^{]*\{\s*$)");
  static const std::regex close_re(R"(^\s*\}\s*$)");
  static const std::regex node_re("^\\s*" + id + "\\s*(\\[[^\\]]*\\])?\\s*;?\\s*$");

  auto unquote = [](const std::string& token) {
    if (token.size() < 2 || token.front() != '"') return token;
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
      if (token[i] == '\\' && i + 2 < token.size()) ++i;
      out += token[i];
    }
    return out;
  };

  Structure s(names.size());
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::smatch m;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (std::regex_match(line, header_re)) {
      saw_header = true;
    } else if (std::regex_match(line, m, edge_re)) {
      s.add_edge(lookup(index, unquote(m[1].str())), lookup(index, unquote(m[2].str())));
    } else if (std::regex_match(line, close_re)) {
      continue;
    } else if (std::regex_match(line, m, node_re)) {
      lookup(index, unquote(m[1].str()));
    } else {
      throw DomainError("parse_error", "DOT line " + std::to_string(line_no) + " not understood");
    }
  }
  if (!saw_header) throw DomainError("parse_error", "DOT input has no digraph header");
  return s;
}

nlohmann::json structure_to_json(const Structure& s, const std::vector<std::string>& names) {
  if (names.size() != s.size()) throw DomainError("invalid_argument", "name count mismatch");
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    nlohmann::json ps = nlohmann::json::array();
    for (std::size_t p : s.parents(i)) ps.push_back(names[p]);
    nodes.push_back({{"name", names[i]}, {"parents", ps}});
  }
  return {{"nodes", nodes}};
}

Structure structure_from_json(const nlohmann::json& j, const std::vector<std::string>& names) {
  const auto index = index_names(names);
  std::vector<std::vector<std::size_t>> parents(names.size());
  std::vector<bool> seen(names.size(), false);
  try {
    for (const auto& node : j.at("nodes")) {
      const std::size_t child = lookup(index, node.at("name").get<std::string>());
      if (seen[child]) throw DomainError("parse_error", "node listed twice in structure JSON");
      seen[child] = true;
      for (const auto& p : node.at("parents")) {
        parents[child].push_back(lookup(index, p.get<std::string>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("parse_error", std::string("malformed structure JSON: ") + e.what());
  }
  return Structure(std::move(parents));
}

nlohmann::json score_report_json(const Structure& s, const ScoreBreakdown& breakdown,
                                 const std::vector<std::string>& names) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    nlohmann::json ps = nlohmann::json::array();
    for (std::size_t p : s.parents(i)) ps.push_back(names.at(p));
    nodes.push_back({{"name", names.at(i)}, {"parents", ps}, {"h_bits", round_report(breakdown.per_node[i])}});
  }
  return {{"total_bits", round_report(breakdown.total)}, {"per_node", nodes}};
}

}  // namespace polytree
