#include "polytree/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "polytree/error.hpp"

namespace polytree {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, const std::optional<ArityMap>& arities) {
  std::string line;
  std::size_t line_no = 0;
  Dataset data;

  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DomainError("parse_error", "CSV input is empty");
  for (auto& name : split_csv_line(trim(line))) {
    if (name.empty()) throw DomainError("parse_error", "CSV header has an empty variable name");
    data.variables.push_back({name, 0});
  }

  std::vector<int> max_seen(data.variables.size(), -1);
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != data.variables.size()) {
      throw DomainError("parse_error", "CSV line " + std::to_string(line_no) + " has " +
                                           std::to_string(cells.size()) + " fields, expected " +
                                           std::to_string(data.variables.size()));
    }
    std::vector<int> row;
    row.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      char* end = nullptr;
      const long value = std::strtol(cell.c_str(), &end, 10);
      if (cell.empty() || *end != '\0' || value < 0 || value > 1'000'000) {
        throw DomainError("parse_error", "CSV line " + std::to_string(line_no) +
                                             ": invalid category value '" + cell + "'");
      }
      row.push_back(static_cast<int>(value));
      max_seen[i] = std::max(max_seen[i], static_cast<int>(value));
    }
    data.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < data.variables.size(); ++i) {
    auto& var = data.variables[i];
    if (arities) {
      if (auto it = arities->find(var.name); it != arities->end()) {
        var.arity = it->second;
        continue;
      }
    }
    var.arity = std::max(2, max_seen[i] + 1);
  }
  validate_dataset(data);
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < data.variables.size(); ++i) {
    out << (i ? "," : "") << data.variables[i].name;
  }
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

ArityMap arity_map_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("parse_error", "arity sidecar must be a JSON object");
  ArityMap out;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number_integer() || value.get<int>() < 2) {
      throw DomainError("parse_error", "arity for '" + name + "' must be an integer >= 2");
    }
    out[name] = value.get<int>();
  }
  return out;
}

nlohmann::json distribution_to_json(const Distribution& dist) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : dist.variables()) vars.push_back({{"name", v.name}, {"arity", v.arity}});
  return {{"variables", vars}, {"probabilities", dist.probabilities()}};
}

Distribution distribution_from_json(const nlohmann::json& j, std::size_t max_states) {
  try {
    std::vector<VariableMeta> vars;
    for (const auto& v : j.at("variables")) {
      vars.push_back({v.at("name").get<std::string>(), v.at("arity").get<int>()});
    }
    // Checked before materializing the table so oversized inputs fail fast.
    joint_state_count(vars, max_states);
    auto probs = j.at("probabilities").get<std::vector<double>>();
    return Distribution(std::move(vars), std::move(probs), max_states);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("parse_error", std::string("malformed distribution JSON: ") + e.what());
  }
}

double round_report(double value) {
  if (value == 0.0) return 0.0;  // folds -0.0
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

nlohmann::json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("parse_error", path + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("io_error", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace polytree
