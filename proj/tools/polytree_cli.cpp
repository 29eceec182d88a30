#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polytree/bounds.hpp"
#include "polytree/branching.hpp"
#include "polytree/distribution.hpp"
#include "polytree/error.hpp"
#include "polytree/gadget.hpp"
#include "polytree/generators.hpp"
#include "polytree/io.hpp"
#include "polytree/search.hpp"
#include "polytree/structure.hpp"

using namespace polytree;
using nlohmann::json;

namespace {

// Bad flag combinations detected after parsing; reported like CLI11 errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  // inputs
  std::string data_path;
  std::string arity_path;
  std::string dist_path;
  std::string fixture;
  std::string structure_path;
  std::string cnf_path;
  double pseudocount = 0.0;
  // search
  std::string k = "unbounded";
  std::uint64_t seed = 0;
  std::size_t max_states = kDefaultMaxStates;
  std::size_t exact_cap = kDefaultExactCap;
  std::size_t budget = kDefaultSearchBudget;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  // output
  std::string out_path;
  std::string dot_path;
  std::string format = "json";
  // generators
  int depth = 2;
  double eps = 0.3;
  std::optional<std::string> sweep;
  std::string name = "example2";
  std::size_t n = 4;
  int min_arity = 2;
  int max_arity = 2;
  double edge_drop = 0.1;
  std::size_t rows = 0;
  bool blockers = false;
  double blocker_q = 0.1;
  std::size_t blocker_copies = 5;
};

std::size_t parse_k(const std::string& text) {
  if (text == "unbounded") return kUnbounded;
  std::size_t k = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc() || ptr != text.data() + text.size() || k == 0) {
    throw UsageError("--k must be a positive integer or 'unbounded', got '" + text + "'");
  }
  return k;
}

std::vector<int> parse_sweep(const std::string& text) {
  std::vector<int> depths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    int d = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("--sweep expects comma-separated depths, got '" + text + "'");
    }
    depths.push_back(d);
  }
  return depths;
}

Distribution load_distribution(const Config& c) {
  const int sources = !c.data_path.empty() + !c.dist_path.empty() + !c.fixture.empty();
  if (sources != 1) throw UsageError("give exactly one of --data, --dist, --fixture");
  if (!c.arity_path.empty() && c.data_path.empty()) throw UsageError("--arity needs --data");
  if (!c.dist_path.empty()) return distribution_from_json(read_json_file(c.dist_path), c.max_states);
  if (!c.fixture.empty()) return example_fixture(fixture_from_name(c.fixture));

  std::optional<ArityMap> arities;
  if (!c.arity_path.empty()) arities = arity_map_from_json(read_json_file(c.arity_path));
  std::istringstream in(read_text_file(c.data_path));
  const Dataset data = read_dataset_csv(in, arities);
  return empirical_distribution(data, {.pseudocount = c.pseudocount, .max_states = c.max_states});
}

Structure load_structure(const Config& c, const std::vector<std::string>& names) {
  if (c.structure_path.empty()) throw UsageError("--structure is required");
  const std::string text = read_text_file(c.structure_path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw DomainError("parse_error", c.structure_path + ": " + e.what());
    }
    return structure_from_json(j, names);
  }
  return structure_from_dot(text, names);
}

CnfFormula load_cnf(const Config& c) {
  if (c.cnf_path.empty()) throw UsageError("--cnf is required");
  CnfFormula f = parse_dimacs(read_text_file(c.cnf_path));
  validate_max3sat3(f);
  return f;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("io_error", "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DomainError("io_error", "failed writing '" + path + "'");
}

void emit_json(const Config& c, const json& j) { write_output(c.out_path, j.dump(2) + "\n"); }

void require_format(const Config& c, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (c.format == f) return;
  }
  throw UsageError("--format " + c.format + " is not supported by this command");
}

// JSON report, or the structure as DOT; an extra DOT copy goes to --dot.
void emit_structure_report(const Config& c, const json& report, const Structure& s,
                           const std::vector<std::string>& names) {
  require_format(c, {"json", "dot"});
  if (!c.dot_path.empty()) write_output(c.dot_path, structure_to_dot(s, names));
  if (c.format == "dot") {
    write_output(c.out_path, structure_to_dot(s, names));
  } else {
    emit_json(c, report);
  }
}

// Draws rows from the joint table by inverse-CDF lookup.
Dataset sample_distribution(const Distribution& dist, std::size_t rows, std::uint64_t seed) {
  std::vector<double> cdf(dist.num_states());
  double acc = 0.0;
  for (std::size_t s = 0; s < cdf.size(); ++s) cdf[s] = acc += dist.probabilities()[s];
  Rng rng(seed);
  Dataset data{dist.variables(), {}};
  data.rows.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    data.rows.push_back(dist.decode_state(static_cast<std::size_t>(it - cdf.begin())));
  }
  return data;
}

std::string dataset_csv(const Dataset& data) {
  std::ostringstream out;
  write_dataset_csv(out, data);
  return out.str();
}

// Distribution and generating structure as JSON, DOT, or a sampled CSV.
void emit_instance(const Config& c, const GeneratedInstance& inst, json extra) {
  const auto names = inst.distribution.names();
  if (c.format == "csv") {
    if (c.rows == 0) throw UsageError("--format csv needs --rows");
    write_output(c.out_path, dataset_csv(sample_distribution(inst.distribution, c.rows, c.seed)));
    return;
  }
  extra["distribution"] = distribution_to_json(inst.distribution);
  extra["structure"] = structure_to_json(inst.structure, names);
  extra["generating_bits"] = round_report(score(inst.structure, inst.distribution).total);
  emit_structure_report(c, extra, inst.structure, names);
}

ExactSearchOptions exact_options(const Config& c) { return {c.exact_cap, c.jobs}; }

void run_learn_branching(const Config& c) {
  const auto dist = load_distribution(c);
  const auto names = dist.names();
  const auto edges = mutual_information_edges(dist, c.jobs);
  const auto branching = learn_optimal_branching(dist, c.jobs);
  json mi = json::array();
  for (const auto& e : edges) {
    mi.push_back({{"a", names[e.a]}, {"b", names[e.b]}, {"mi_bits", round_report(e.weight)}});
  }
  json report = {{"structure", structure_to_json(branching, names)},
                 {"score", score_report_json(branching, score(branching, dist), names)},
                 {"mutual_information", mi}};
  emit_structure_report(c, report, branching, names);
}

void run_exact(const Config& c) {
  const auto dist = load_distribution(c);
  const std::size_t k = parse_k(c.k);
  const auto report = exact_optimal_polytree(dist, k, exact_options(c));
  emit_structure_report(c, search_report_json(report, dist.names(), k), report.best, dist.names());
}

void run_heuristic(const Config& c) {
  const auto dist = load_distribution(c);
  const std::size_t k = parse_k(c.k);
  const LocalSearchOptions opts{.budget = c.budget, .jobs = c.jobs, .on_step = {}};
  const auto report = c.structure_path.empty()
                          ? local_search_polytree(dist, k, opts)
                          : local_search_polytree(dist, k, load_structure(c, dist.names()), opts);
  emit_structure_report(c, search_report_json(report, dist.names(), k), report.best, dist.names());
}

void run_score(const Config& c) {
  const auto dist = load_distribution(c);
  const auto names = dist.names();
  const auto s = load_structure(c, names);
  json report = score_report_json(s, score(s, dist), names);
  report["is_polytree"] = is_polytree(s);
  report["max_indegree"] = max_indegree(s);
  emit_structure_report(c, report, s, names);
}

void run_ratio(const Config& c) {
  const auto dist = load_distribution(c);
  const std::size_t k = parse_k(c.k);
  const auto report = approximation_ratio(dist, k, exact_options(c));
  emit_structure_report(c, search_report_json(report, dist.names(), k), report.best, dist.names());
}

void run_verify_bounds(const Config& c) {
  require_format(c, {"json"});
  const auto dist = load_distribution(c);
  const auto optimal = exact_optimal_polytree(dist, kUnbounded, exact_options(c)).best;
  const auto branching = learn_optimal_branching(dist, c.jobs);
  emit_json(c, bound_table_json(verify_bounds(dist, optimal, branching), dist.names()));
}

void run_gen_xor(const Config& c) {
  if (!c.sweep) {
    const auto inst = xor_tree_family(c.depth, c.eps, c.max_states);
    const auto branching = learn_optimal_branching(inst.distribution, c.jobs);
    emit_instance(c, inst,
                  {{"depth", c.depth},
                   {"eps", round_report(c.eps)},
                   {"branching_bits", round_report(score(branching, inst.distribution).total)}});
    return;
  }
  require_format(c, {"json", "csv"});
  json rows = json::array();
  std::ostringstream csv;
  csv << "depth,branching_bits,polytree_bits,ratio\n";
  for (int depth : parse_sweep(*c.sweep)) {
    const auto inst = xor_tree_family(depth, c.eps, c.max_states);
    const auto& d = inst.distribution;
    const double b = round_report(score(learn_optimal_branching(d, c.jobs), d).total);
    const double p = round_report(score(inst.structure, d).total);
    const double ratio = round_report(b / p);
    rows.push_back({{"depth", depth}, {"branching_bits", b}, {"polytree_bits", p}, {"ratio", ratio}});
    csv << depth << ',' << json(b).dump() << ',' << json(p).dump() << ',' << json(ratio).dump() << '\n';
  }
  if (c.format == "csv") {
    write_output(c.out_path, csv.str());
  } else {
    emit_json(c, {{"eps", round_report(c.eps)}, {"rows", rows}});
  }
}

void run_gen_example(const Config& c) {
  const auto dist = example_fixture(fixture_from_name(c.name));
  emit_instance(c, {dist, Structure(dist.num_variables())}, {{"name", c.name}});
}

void run_gen_random(const Config& c) {
  RandomInstanceOptions opts;
  opts.n = c.n;
  const std::size_t k = parse_k(c.k);
  opts.k = k == kUnbounded ? std::max<std::size_t>(c.n, 1) : k;
  opts.min_arity = c.min_arity;
  opts.max_arity = c.max_arity;
  opts.seed = c.seed;
  opts.edge_drop_probability = c.edge_drop;
  opts.max_states = c.max_states;
  emit_instance(c, random_polytree_instance(opts), {{"seed", c.seed}});
}

GadgetParams gadget_params(const Config& c) {
  return make_gadget_params(c.blockers, c.blocker_q, c.blocker_copies);
}

void run_gen_cnf(const Config& c) {
  require_format(c, {"json", "csv"});
  const auto gadget = compile_cnf(load_cnf(c), gadget_params(c));
  if (c.format == "csv") {
    if (c.rows == 0) throw UsageError("--format csv needs --rows");
    LayeredSampler sampler(gadget.net, c.seed);
    write_output(c.out_path, dataset_csv(sampler.sample(c.rows)));
    return;
  }
  emit_json(c, gadget_metadata_json(gadget));
}

void run_verify_gadget(const Config& c) {
  require_format(c, {"json"});
  const auto gadget = compile_cnf(load_cnf(c), gadget_params(c));
  emit_json(c, gadget_report_json(verify_gadget(gadget), gadget));
}

void add_input_options(CLI::App* cmd, Config& c, bool structure) {
  cmd->add_option("--data", c.data_path, "Dataset CSV (header row of variable names)");
  cmd->add_option("--arity", c.arity_path, "JSON object mapping variable names to arities");
  cmd->add_option("--dist", c.dist_path, "Distribution JSON");
  cmd->add_option("--fixture", c.fixture, "Built-in fixture: example1 | example2");
  cmd->add_option("--pseudocount", c.pseudocount, "Additive smoothing for --data")
      ->check(CLI::NonNegativeNumber);
  if (structure) cmd->add_option("--structure", c.structure_path, "Structure JSON or DOT");
}

void add_common_options(CLI::App* cmd, Config& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--k", c.k, "Parent bound: positive integer or 'unbounded'");
  cmd->add_option("--max-states", c.max_states, "Cap on dense joint states")->check(CLI::PositiveNumber);
  cmd->add_option("--exact-cap", c.exact_cap, "Largest n for exact search")->check(CLI::Range(1, 16));
  cmd->add_option("--budget", c.budget, "Local-search iteration budget");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out_path, "Output file (default: stdout)");
  cmd->add_option("--dot", c.dot_path, "Also write the structure as DOT to this file");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "dot", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Polytree structure learning experiments"};
  app.require_subcommand(1);

  auto sub = [&](const char* name, const char* help, bool inputs, bool structure) {
    CLI::App* cmd = app.add_subcommand(name, help);
    if (inputs) add_input_options(cmd, c, structure);
    add_common_options(cmd, c);
    return cmd;
  };

  auto* learn = sub("learn-branching", "Optimal branching (maximum mutual-information forest)", true, false);
  auto* exact = sub("exact-polytree", "Exact optimal polytree by enumeration", true, false);
  auto* heuristic = sub("heuristic-polytree", "Local search over k-polytrees", true, true);
  auto* score_cmd = sub("score", "Score a given structure", true, true);
  auto* ratio = sub("ratio", "Branching score over exact optimal polytree score", true, false);
  auto* bounds = sub("verify-bounds", "Check the branching guarantees against the exact optimum", true, false);
  auto* verify_gadget_cmd = sub("verify-gadget", "Check the reduction gadget on a CNF formula", false, false);
  verify_gadget_cmd->add_option("--cnf", c.cnf_path, "DIMACS CNF file")->required();

  auto* gen = app.add_subcommand("gen", "Generate instances");
  gen->require_subcommand(1);
  auto gen_sub = [&](const char* name, const char* help) {
    CLI::App* cmd = gen->add_subcommand(name, help);
    add_common_options(cmd, c);
    cmd->add_option("--rows", c.rows, "Rows to sample for --format csv");
    return cmd;
  };
  auto* gen_xor = gen_sub("xor-tree", "Binary XOR tree with a single sink");
  gen_xor->add_option("--depth", c.depth, "Tree depth")->check(CLI::Range(1, kMaxXorTreeDepth));
  gen_xor->add_option("--eps", c.eps, "Source entropy in bits");
  gen_xor->add_option("--sweep", c.sweep, "Comma-separated depths; emits growth rows");
  auto* gen_example = gen_sub("example", "Parity fixtures");
  gen_example->add_option("--name", c.name, "example1 | example2");
  auto* gen_random = gen_sub("random", "Random k-polytree instance");
  gen_random->add_option("--n", c.n, "Number of variables")->check(CLI::PositiveNumber);
  gen_random->add_option("--min-arity", c.min_arity)->check(CLI::Range(2, 64));
  gen_random->add_option("--max-arity", c.max_arity)->check(CLI::Range(2, 64));
  gen_random->add_option("--edge-drop", c.edge_drop, "Probability of dropping each tree edge")
      ->check(CLI::Range(0.0, 1.0));
  auto* gen_cnf = gen_sub("cnf", "Compile a MAX3SAT(3) formula into the layered network");
  gen_cnf->add_option("--cnf", c.cnf_path, "DIMACS CNF file")->required();
  for (CLI::App* cmd : {gen_cnf, verify_gadget_cmd}) {
    cmd->add_flag("--blockers", c.blockers, "Add in-edge blocker nodes");
    cmd->add_option("--blocker-q", c.blocker_q, "Blocker coin bias");
    cmd->add_option("--blocker-copies", c.blocker_copies, "Blocker coin copies");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*learn) run_learn_branching(c);
    else if (*exact) run_exact(c);
    else if (*heuristic) run_heuristic(c);
    else if (*score_cmd) run_score(c);
    else if (*ratio) run_ratio(c);
    else if (*bounds) run_verify_bounds(c);
    else if (*verify_gadget_cmd) run_verify_gadget(c);
    else if (*gen_xor) run_gen_xor(c);
    else if (*gen_example) run_gen_example(c);
    else if (*gen_random) run_gen_random(c);
    else if (*gen_cnf) run_gen_cnf(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal_error"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
