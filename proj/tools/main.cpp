// ltlfbeam command line: compile, check, decode, oracle, gen-constraints,
// bench and replay.
//
// Exit codes: 0 success, 1 internal error or replay mismatch, 2 input
// error, 3 infeasible, 4 budget exceeded.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltlfbeam/compiler.hpp"
#include "ltlfbeam/constraints.hpp"
#include "ltlfbeam/decoder.hpp"
#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/oracle.hpp"
#include "ltlfbeam/parser.hpp"
#include "ltlfbeam/trace.hpp"

namespace fs = std::filesystem;
using namespace ltlfbeam;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kInput = 2, kInfeasible = 3, kBudget = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path);
  out << text;
}

std::string absolute(const std::string& path) { return path.empty() ? path : fs::absolute(path).string(); }

// File-backed scorer specs with absolute paths, so manifests replay from
// any directory.
std::string absolute_scorer(const std::string& spec) {
  for (const std::string kind : {"markov:", "logits:"}) {
    if (spec.rfind(kind, 0) == 0) return kind + absolute(spec.substr(kind.size()));
  }
  return spec;
}

// Where the automaton comes from: a compiled artifact or a formula.
struct Source {
  std::string dfa_file;
  std::string formula;
  std::string formula_file;
  std::vector<std::string> concepts;
  std::string concepts_file;
  std::vector<std::string> costs;  // name=value
  std::size_t state_cap = 1'000'000;

  void add_options(CLI::App* app, bool allow_dfa) {
    if (allow_dfa) app->add_option("--dfa", dfa_file, "compiled DFA JSON")->check(CLI::ExistingFile);
    app->add_option("--formula", formula, "LTLf formula text");
    app->add_option("--formula-file", formula_file, "file of formulas, one per line, conjoined")
        ->check(CLI::ExistingFile);
    app->add_option("--concepts", concepts, "concept names")->delimiter(',');
    app->add_option("--concepts-file", concepts_file, "concept names, one per line")->check(CLI::ExistingFile);
    app->add_option("--cost", costs, "edge cost as NAME=N (default 1)");
    app->add_option("--state-cap", state_cap, "compile budget in states");
  }

  std::vector<std::string> concept_list() const {
    std::vector<std::string> out = concepts;
    if (!concepts_file.empty()) {
      std::istringstream in(read_file(concepts_file));
      for (auto& l : read_formula_lines(in)) {
        while (!l.empty() && std::isspace(static_cast<unsigned char>(l.back()))) l.pop_back();
        out.push_back(l);
      }
    }
    return out;
  }

  std::map<std::string, Cost> cost_map() const {
    std::map<std::string, Cost> out;
    for (const auto& c : costs) {
      const auto eq = c.find('=');
      if (eq == std::string::npos) throw InvalidInputError("--cost expects NAME=N, got '" + c + "'");
      try {
        out[c.substr(0, eq)] = std::stoll(c.substr(eq + 1));
      } catch (const std::exception&) {
        throw InvalidInputError("--cost expects NAME=N, got '" + c + "'");
      }
    }
    return out;
  }

  Formula parsed(const std::vector<std::string>& alphabet) const {
    if (!formula.empty() && !formula_file.empty()) throw InvalidInputError("give --formula or --formula-file, not both");
    if (!formula.empty()) return parse_formula(formula, alphabet);
    if (formula_file.empty()) throw InvalidInputError("a formula is required");
    std::istringstream in(read_file(formula_file));
    std::vector<Formula> parts;
    for (const auto& line : read_formula_lines(in)) parts.push_back(parse_formula(line, alphabet));
    if (parts.empty()) throw InvalidInputError(formula_file + " holds no formulas");
    return parts.size() == 1 ? parts.front() : Formula::conjunction(parts);
  }

  std::vector<std::string> alphabet() const {
    auto a = concept_list();
    if (std::find(a.begin(), a.end(), "noMatch") == a.end()) a.push_back("noMatch");
    return a;
  }

  Dfa load() const {
    if (!dfa_file.empty()) {
      if (!formula.empty() || !formula_file.empty()) throw InvalidInputError("give --dfa or a formula, not both");
      return dfa_from_json(read_json(dfa_file));
    }
    const auto names = concept_list();
    if (names.empty()) throw InvalidInputError("--concepts or --concepts-file is required");
    return compile(parsed(alphabet()), names, cost_map(), {.state_cap = state_cap});
  }

  ojson to_json() const {
    ojson j;
    j["dfa"] = absolute(dfa_file);
    j["formula"] = formula;
    j["formula_file"] = absolute(formula_file);
    j["concepts"] = concepts;
    j["concepts_file"] = absolute(concepts_file);
    j["costs"] = costs;
    j["state_cap"] = state_cap;
    return j;
  }

  static Source from_json(const json& j) {
    Source s;
    s.dfa_file = j.at("dfa");
    s.formula = j.at("formula");
    s.formula_file = j.at("formula_file");
    s.concepts = j.at("concepts").get<std::vector<std::string>>();
    s.concepts_file = j.at("concepts_file");
    s.costs = j.at("costs").get<std::vector<std::string>>();
    s.state_cap = j.at("state_cap");
    return s;
  }
};

std::vector<std::string> dfa_concepts(const Dfa& d) {
  std::vector<std::string> out;
  for (const auto& s : d.symbols()) {
    if (s != "noMatch") out.push_back(s);
  }
  return out;
}

// Decoder inputs shared by decode, oracle and bench.
struct Problem {
  Source source;
  std::string table_file;
  std::string scorer;
  std::vector<OutputId> prompt;
  std::optional<OutputId> stop;
  double timeout_s = 30;

  void add_options(CLI::App* app) {
    source.add_options(app, true);
    app->add_option("--table", table_file, "concept table JSON (default: output i is concept i)")
        ->check(CLI::ExistingFile);
    app->add_option("--scorer", scorer, "markov:FILE | logits:FILE[#ID] | remote:URL | remote:stdio:CMD")->required();
    app->add_option("--prompt", prompt, "prompt output ids")->delimiter(',');
    app->add_option("--stop", stop, "output id that ends a sequence early");
    app->add_option("--timeout", timeout_s, "remote scorer timeout in seconds");
  }

  // The table's vocabulary is the scorer's; without a table, output i is
  // concept i and any further outputs are noMatch.
  Guide guide(std::size_t vocab) const {
    const Dfa d = source.load();
    if (!table_file.empty()) return Guide(d, ConceptTable::from_json(read_json(table_file), vocab), stop);
    std::map<std::string, std::vector<OutputId>> mu;
    const auto names = dfa_concepts(d);
    for (std::size_t i = 0; i < names.size(); ++i) mu[names[i]] = {static_cast<OutputId>(i)};
    return Guide(d, ConceptTable(mu, vocab), stop);
  }

  std::unique_ptr<Scorer> make() const {
    return make_scorer(scorer, std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000)));
  }

  ojson to_json() const {
    ojson j;
    j["source"] = source.to_json();
    j["table"] = absolute(table_file);
    j["scorer"] = absolute_scorer(scorer);
    j["prompt"] = prompt;
    j["stop"] = stop ? ojson(*stop) : ojson(nullptr);
    j["timeout_s"] = timeout_s;
    return j;
  }

  static Problem from_json(const json& j) {
    Problem p;
    p.source = Source::from_json(j.at("source"));
    p.table_file = j.at("table");
    p.scorer = j.at("scorer");
    p.prompt = j.at("prompt").get<std::vector<OutputId>>();
    if (!j.at("stop").is_null()) p.stop = j.at("stop").get<OutputId>();
    p.timeout_s = j.at("timeout_s");
    return p;
  }
};

void add_decode_options(CLI::App* app, DecodeConfig& cfg) {
  app->add_option("--beams,-k", cfg.beams, "beam count");
  app->add_option("--horizon,-T", cfg.horizon, "number of outputs")->required();
  app->add_option("--alpha-min", cfg.alpha_min, "floor of the push-up ramp");
  app->add_option("--gamma", cfg.gamma, "ramp exponent");
  app->add_option("--epsilon", cfg.epsilon, "extra push for distance-decreasing outputs");
  app->add_option("--seed", cfg.seed, "seed for tie jitter");
  app->add_flag("--tie-jitter", cfg.tie_jitter, "break exact ties randomly");
  app->add_flag("--prompt-advances-dfa", cfg.prompt_advances_dfa, "run the prompt through the automaton first");
}

DecodeConfig decode_config_from_json(const json& j) {
  DecodeConfig c;
  c.beams = j.at("beams");
  c.horizon = j.at("horizon");
  c.alpha_min = j.at("alpha_min");
  c.gamma = j.at("gamma");
  c.epsilon = j.at("epsilon");
  c.seed = j.at("seed");
  c.tie_jitter = j.at("tie_jitter");
  c.prompt_advances_dfa = j.at("prompt_advances_dfa");
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cost_text(Cost c) { return c == kInfinity ? "inf" : std::to_string(c); }

// compile

struct CompileArgs {
  Source source;
  std::string format = "text";
  std::string out;
};

int run_compile(const CompileArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dfa d = a.source.load();
  const double secs = seconds_since(t0);
  std::size_t deadlocks = 0;
  std::size_t accepting = 0;
  for (StateId q = 0; q < d.num_states(); ++q) {
    deadlocks += d.is_deadlock(q);
    accepting += d.accepting(q);
  }
  if (!a.out.empty()) {
    write_file(a.out + ".json", dfa_to_json(d).dump(2) + "\n");
    write_file(a.out + ".dot", export_dot(d));
  }
  if (a.format == "json") {
    std::cout << dfa_to_json(d).dump(2) << "\n";
  } else if (a.format == "dot") {
    std::cout << export_dot(d);
  } else {
    std::cout << "states: " << d.num_states() << "\n"
              << "deadlocks: " << deadlocks << "\n"
              << "accepting: " << accepting << "\n"
              << "d0: " << cost_text(d.distance(d.initial())) << "\n"
              << "compile_seconds: " << std::fixed << std::setprecision(4) << secs << "\n";
    const auto m = export_matrix(d);
    std::cout << "\nstate";
    for (const auto& c : m.columns) std::cout << "\t" << c;
    std::cout << "\tdistance\n";
    for (StateId q = 0; q < m.rows.size(); ++q) {
      std::cout << "s" << q << (q == d.initial() ? "*" : "") << (d.accepting(q) ? "+" : "");
      for (const auto& cell : m.rows[q]) std::cout << "\t" << cost_text(cell.cost) << ",s" << cell.next;
      std::cout << "\t" << cost_text(d.distance(q)) << "\n";
    }
  }
  return kOk;
}

// check

int run_check(const std::string& dfa_file, const std::string& traces_file, bool strict) {
  const Dfa d = dfa_from_json(read_json(dfa_file));
  std::istringstream in(read_file(traces_file));
  std::string line;
  std::size_t n = 0;
  bool bad = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Trace w = parse_trace_line(line);
      std::vector<std::string> names;
      for (const auto& s : w.symbols()) {
        if (s.size() != 1) throw InvalidInputError("step with " + std::to_string(s.size()) + " atoms is not one-hot");
        names.push_back(s.front());
      }
      std::cout << (accepts(d, names) ? "accept" : "reject") << "\n";
    } catch (const Error& e) {
      bad = true;
      std::cout << "error line " << n << ": " << e.what() << "\n";
    }
  }
  return bad && strict ? kInput : kOk;
}

// decode

struct DecodeArgs {
  Problem problem;
  DecodeConfig cfg;
  std::string format = "json";
  bool stats = false;
  std::string manifest;
};

ojson decode_json(const DecodeArgs& a, ojson* timing) {
  auto scorer = a.problem.make();
  auto t0 = std::chrono::steady_clock::now();
  const Guide g = a.problem.guide(scorer->vocab_size());
  const double compile_s = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  DecodeStats st;
  const DecodeResult r = decode(*scorer, g, a.problem.prompt, a.cfg, &st);
  const double decode_s = seconds_since(t0);
  ojson j = result_to_json(r);
  if (a.stats) {
    j["stats"] = {{"scorer_calls", st.scorer_calls}, {"candidates", st.candidates}, {"pruned", st.pruned},
                  {"boosted_complete", st.boosted_complete}, {"boosted_quasi", st.boosted_quasi},
                  {"padded", st.padded}, {"worst_slack", st.worst_slack}};
  }
  if (timing) *timing = {{"compile_s", compile_s}, {"decode_s", decode_s}};
  return j;
}

ojson decode_manifest(const DecodeArgs& a, const ojson& result, const ojson& timing) {
  ojson m;
  m["command"] = "decode";
  m["config"] = {{"problem", a.problem.to_json()}, {"decode", a.cfg.to_json()}, {"stats", a.stats}};
  m["seeds"] = {a.cfg.seed};
  m["timing"] = timing;
  m["coverage"] = result["satisfied"].get<bool>() ? 1.0 : 0.0;
  m["output_paths"] = {absolute(a.manifest)};
  m["outputs"] = result;
  return m;
}

int run_decode(const DecodeArgs& a) {
  ojson timing;
  const ojson r = decode_json(a, &timing);
  if (a.format == "text") {
    std::cout << "outputs:";
    for (const auto& x : r["outputs"]) std::cout << " " << x;
    std::cout << "\nconcepts:";
    for (const auto& c : r["concepts"]) std::cout << " " << c.get<std::string>();
    std::cout << "\nnatural_loglik: " << r["natural_loglik"].dump() << "\nsatisfied: " << r["satisfied"].dump()
              << "\n";
  } else {
    std::cout << r.dump() << "\n";
  }
  if (!a.manifest.empty()) write_file(a.manifest, decode_manifest(a, r, timing).dump(2) + "\n");
  return kOk;
}

// oracle

int run_oracle(const Problem& p, std::size_t horizon, std::size_t cap) {
  auto scorer = p.make();
  const Guide g = p.guide(scorer->vocab_size());
  const OracleResult r = brute_force_map(*scorer, g, horizon, {.cap = cap, .formula = std::nullopt, .prompt = p.prompt});
  ojson j;
  j["outputs"] = r.best ? ojson(*r.best) : ojson(nullptr);
  j["nll"] = r.best ? ojson(r.best_nll) : ojson(nullptr);
  j["feasible_count"] = r.feasible_count;
  j["enumerated"] = r.enumerated;
  std::cout << j.dump() << "\n";
  return r.best ? kOk : kInfeasible;
}

// bench

struct BenchArgs {
  Problem problem;
  DecodeConfig cfg;
  std::vector<std::size_t> beams{4, 8, 16};
  std::size_t repeat = 3;
  std::string manifest;
};

ojson bench_json(const BenchArgs& a, bool print) {
  auto scorer = a.problem.make();
  auto t0 = std::chrono::steady_clock::now();
  const Guide g = a.problem.guide(scorer->vocab_size());
  const double compile_s = seconds_since(t0);
  ojson rows = ojson::array();
  ojson outputs = ojson::object();
  std::size_t satisfied = 0;
  std::size_t runs = 0;
  double prev = 0;
  if (print) std::cout << "beams\tseconds/decode\tratio\tsatisfied\n";
  for (std::size_t k : a.beams) {
    DecodeConfig cfg = a.cfg;
    cfg.beams = k;
    DecodeResult r;
    t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < std::max<std::size_t>(a.repeat, 1); ++i) r = decode(*scorer, g, a.problem.prompt, cfg);
    const double per = seconds_since(t0) / static_cast<double>(std::max<std::size_t>(a.repeat, 1));
    satisfied += r.satisfied;
    ++runs;
    outputs[std::to_string(k)] = result_to_json(r);
    rows.push_back({{"beams", k}, {"seconds", per}});
    if (print) {
      std::cout << k << "\t" << std::scientific << std::setprecision(3) << per << "\t";
      if (prev > 0) {
        std::cout << std::fixed << std::setprecision(2) << per / prev;
      } else {
        std::cout << "-";
      }
      std::cout << "\t" << (r.satisfied ? "yes" : "no") << "\n";
    }
    prev = per;
  }
  ojson m;
  m["command"] = "bench";
  ojson beams = a.beams;
  m["config"] = {{"problem", a.problem.to_json()}, {"decode", a.cfg.to_json()}, {"beams", beams}, {"repeat", a.repeat}};
  m["seeds"] = {a.cfg.seed};
  m["timing"] = {{"compile_s", compile_s}, {"decode", rows}};
  m["coverage"] = runs ? static_cast<double>(satisfied) / static_cast<double>(runs) : 0.0;
  m["output_paths"] = {absolute(a.manifest)};
  m["outputs"] = outputs;
  return m;
}

int run_bench(const BenchArgs& a) {
  if (a.beams.empty()) throw InvalidInputError("--beams needs at least one value");
  const ojson m = bench_json(a, true);
  if (!a.manifest.empty()) write_file(a.manifest, m.dump(2) + "\n");
  return kOk;
}

// replay

int run_replay(const std::string& path) {
  const json m = read_json(path);
  ojson fresh;
  json before;
  try {
    const std::string command = m.at("command");
    const json& c = m.at("config");
    if (command == "decode") {
      DecodeArgs a;
      a.problem = Problem::from_json(c.at("problem"));
      a.cfg = decode_config_from_json(c.at("decode"));
      a.stats = c.at("stats");
      fresh = decode_json(a, nullptr);
    } else if (command == "bench") {
      BenchArgs a;
      a.problem = Problem::from_json(c.at("problem"));
      a.cfg = decode_config_from_json(c.at("decode"));
      a.beams = c.at("beams").get<std::vector<std::size_t>>();
      a.repeat = 1;
      fresh = bench_json(a, false)["outputs"];
    } else {
      throw InvalidInputError("manifest command '" + command + "' cannot be replayed");
    }
    before = m.at("outputs");
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": malformed manifest: " + e.what());
  }
  // compared as values: the manifest was read back with sorted keys
  if (json::parse(fresh.dump()) == before) {
    std::cout << "replay: identical\n";
    return kOk;
  }
  std::cout << "replay: outputs differ\nrecorded: " << before.dump() << "\nreplayed: " << fresh.dump() << "\n";
  return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTLf-guided beam search"};
  app.require_subcommand(1);

  CompileArgs compile_args;
  auto* compile_cmd = app.add_subcommand("compile", "compile a formula to a distance-annotated DFA");
  compile_args.source.add_options(compile_cmd, false);
  compile_cmd->add_option("--format", compile_args.format)->check(CLI::IsMember({"text", "json", "dot"}));
  compile_cmd->add_option("--out", compile_args.out, "also write OUT.json and OUT.dot");

  std::string check_dfa;
  std::string check_traces;
  bool check_strict = false;
  auto* check_cmd = app.add_subcommand("check", "accept or reject each trace line");
  check_cmd->add_option("--dfa", check_dfa)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--traces", check_traces, "one JSON trace per line")->required()->check(CLI::ExistingFile);
  check_cmd->add_flag("--strict", check_strict, "exit 2 if any line is malformed");

  DecodeArgs decode_args;
  auto* decode_cmd = app.add_subcommand("decode", "constrained beam search");
  decode_args.problem.add_options(decode_cmd);
  add_decode_options(decode_cmd, decode_args.cfg);
  decode_cmd->add_option("--format", decode_args.format)->check(CLI::IsMember({"json", "text"}));
  decode_cmd->add_flag("--stats", decode_args.stats, "include search statistics");
  decode_cmd->add_option("--manifest", decode_args.manifest, "write a replayable run manifest");

  Problem oracle_problem;
  std::size_t oracle_horizon = 0;
  std::size_t oracle_cap = 1'000'000;
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive constrained MAP for small instances");
  oracle_problem.add_options(oracle_cmd);
  oracle_cmd->add_option("--horizon,-T", oracle_horizon)->required();
  oracle_cmd->add_option("--cap", oracle_cap, "largest |X|^T to enumerate");

  std::string gen_mode;
  std::vector<std::string> gen_words;
  bool gen_lines = false;
  auto* gen_cmd = app.add_subcommand("gen-constraints", "print a keyword constraint formula");
  gen_cmd->add_option("mode", gen_mode)->required()->check(CLI::IsMember({"ordered", "unordered"}));
  gen_cmd->add_option("concepts", gen_words)->required();
  gen_cmd->add_flag("--conjuncts", gen_lines, "one conjunct per line");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "decode time across beam counts");
  bench_args.problem.add_options(bench_cmd);
  add_decode_options(bench_cmd, bench_args.cfg);
  bench_cmd->remove_option(bench_cmd->get_option("--beams"));
  bench_cmd->add_option("--beams,-k", bench_args.beams, "beam counts to sweep")->delimiter(',');
  bench_cmd->add_option("--repeat", bench_args.repeat, "decodes per beam count");
  bench_cmd->add_option("--manifest", bench_args.manifest, "write a replayable run manifest");

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a manifest and compare its outputs");
  replay_cmd->add_option("manifest", replay_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*compile_cmd) return run_compile(compile_args);
    if (*check_cmd) return run_check(check_dfa, check_traces, check_strict);
    if (*decode_cmd) return run_decode(decode_args);
    if (*oracle_cmd) return run_oracle(oracle_problem, oracle_horizon, oracle_cap);
    if (*gen_cmd) {
      const auto parts = gen_mode == "ordered" ? ordered_conjuncts(gen_words) : unordered_conjuncts(gen_words);
      if (gen_lines) {
        for (const auto& f : parts) std::cout << to_string(f) << "\n";
      } else {
        std::cout << to_string(Formula::conjunction(parts)) << "\n";
      }
      return kOk;
    }
    if (*bench_cmd) return run_bench(bench_args);
    if (*replay_cmd) return run_replay(replay_path);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BudgetExceededError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInternal;
}
