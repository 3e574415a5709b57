// Acceptance run: one PASS or FAIL line per criterion, exit status 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "ltlfbeam/constraints.hpp"
#include "ltlfbeam/decoder.hpp"
#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/oracle.hpp"
#include "ltlfbeam/random_formula.hpp"
#include "ltlfbeam/trace.hpp"

using namespace ltlfbeam;
using namespace fixtures;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// 1. The word-level automaton: six states, one deadlock, one accepting
// state, distances {5,4,2,1,0,inf}, and the expected transition table.
void word_level_automaton() {
  const auto t0 = Clock::now();
  const Dfa d = word_dfa();
  const double secs = seconds_since(t0);
  bool ok = d.num_states() == 6;
  std::multiset<Cost> dist;
  std::size_t accepting = 0;
  std::size_t deadlocks = 0;
  for (StateId q = 0; q < d.num_states(); ++q) {
    dist.insert(d.distance(q));
    accepting += d.accepting(q);
    deadlocks += d.is_deadlock(q);
  }
  ok &= dist == std::multiset<Cost>{5, 4, 2, 1, 0, kInfinity};
  ok &= accepting == 1 && deadlocks == 1;
  if (ok) {
    const auto s = word_states(d);
    const std::set<StateId> distinct{s.s1, s.s2, s.s3, s.s4, s.s5, s.s6};
    ok &= distinct.size() == 6;
    const SymbolId cat = *d.symbol_index("cat");
    const SymbolId pol = *d.symbol_index("politician");
    const SymbolId eos = *d.symbol_index("eos");
    const SymbolId nm = d.no_match();
    const std::vector<std::vector<StateId>> expected{
        {s.s3, s.s2, s.s4, s.s1}, {s.s5, s.s2, s.s4, s.s2}, {s.s3, s.s5, s.s4, s.s3},
        {s.s4, s.s4, s.s4, s.s4}, {s.s5, s.s5, s.s6, s.s5}, {s.s6, s.s6, s.s6, s.s6}};
    const std::vector<StateId> rows{s.s1, s.s2, s.s3, s.s4, s.s5, s.s6};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ok &= d.next(rows[i], cat) == expected[i][0] && d.next(rows[i], pol) == expected[i][1] &&
            d.next(rows[i], eos) == expected[i][2] && d.next(rows[i], nm) == expected[i][3];
    }
    ok &= d.cost(pol) == 3 && d.cost(cat) == 1;
  }
  ok &= secs < 1.0;
  report(ok, "word-level automaton",
         std::to_string(d.num_states()) + " states, " + std::to_string(deadlocks) + " deadlock, " +
             std::to_string(accepting) + " accepting, distances match, " + fmt(secs, 4) + " s");
}

// 2. accepts(compile(phi)) agrees with the trace semantics on every
// one-hot trace of length 1..5.
void compiler_equivalence() {
  const auto t0 = Clock::now();
  const std::vector<std::string> concepts{"a", "b", "c"};
  std::vector<std::string> alphabet = concepts;
  alphabet.push_back("noMatch");
  std::vector<std::vector<std::string>> traces;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (auto& w : all_words(alphabet, n)) traces.push_back(std::move(w));
  }
  std::size_t formulas = 0;
  std::size_t checks = 0;
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; formulas < 500; ++seed) {
    const int depth = 1 + static_cast<int>(seed % 4);
    const Formula phi = random_formula(depth, concepts, seed);
    const Dfa d = compile(phi, concepts);
    ++formulas;
    for (const auto& w : traces) {
      ++checks;
      mismatches += accepts(d, w) != eval_trace(phi, Trace::one_hot(w));
    }
  }
  const double secs = seconds_since(t0);
  report(mismatches == 0 && secs < 120, "compiler equivalence",
         std::to_string(formulas) + " formulas x " + std::to_string(traces.size()) + " traces = " +
             std::to_string(checks) + " checks, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 1) + " s");
}

// Random concept table over `concepts`: each concept spells one or two
// outputs, all outputs distinct, plus `extra` outputs that spell nothing.
ConceptTable random_table(const std::vector<std::string>& concepts, std::size_t extra, std::mt19937_64& rng) {
  std::map<std::string, std::vector<OutputId>> mu;
  OutputId next = 0;
  for (const auto& c : concepts) {
    const std::size_t len = 1 + rng() % 2;
    for (std::size_t i = 0; i < len; ++i) mu[c].push_back(next++);
  }
  return ConceptTable(mu, next + extra);
}

MarkovScorer random_scorer(std::size_t vocab, std::mt19937_64& rng) {
  auto m = random_markov(vocab, rng());
  if (rng() % 4 != 0) return m;
  // sparse variant: about a third of the entries become hard zeros
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto row = [&] {
    std::vector<double> r(vocab);
    for (double& v : r) v = rng() % 3 == 0 ? 0.0 : u(rng);
    r[rng() % vocab] = u(rng);
    return normalize(r);
  };
  std::vector<std::vector<double>> t;
  const auto init = row();
  for (std::size_t i = 0; i < vocab; ++i) t.push_back(row());
  return MarkovScorer(init, t);
}

// 3. Every feasible instance decodes to a satisfying sequence.
void soundness() {
  const auto t0 = Clock::now();
  const std::vector<std::string> pool{"a", "b", "c"};
  std::mt19937_64 rng(2024);
  std::size_t instances = 0;
  std::size_t covered = 0;
  std::size_t exceptions = 0;
  std::size_t skipped = 0;
  std::int64_t worst_slack = std::numeric_limits<std::int64_t>::min();
  for (std::uint64_t seed = 0; instances < 400; ++seed) {
    const std::vector<std::string> concepts(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(1 + seed % 3));
    const Formula phi = random_formula(1 + static_cast<int>(rng() % 4), concepts, seed);
    const ConceptTable table = random_table(concepts, 1 + rng() % 2, rng);
    const Guide g(compile(phi, concepts), table);
    const Cost d0 = g.min_outputs(g.initial());
    if (d0 == kInfinity) {
      ++skipped;
      continue;
    }
    const std::size_t T = std::max<std::size_t>(1, static_cast<std::size_t>(d0) + rng() % 7);
    if (!feasible_exact(g, T)) {
      ++skipped;
      continue;
    }
    auto scorer = random_scorer(table.vocab_size(), rng);
    for (std::size_t k : {1u, 2u, 4u, 8u}) {
      ++instances;
      DecodeConfig cfg;
      cfg.beams = k;
      cfg.horizon = T;
      DecodeStats st;
      try {
        const auto r = decode(scorer, g, {}, cfg, &st);
        const bool by_formula = eval_trace(phi, Trace::one_hot(r.concepts));
        covered += r.satisfied && by_formula && r.best.outputs.size() == T;
        worst_slack = std::max(worst_slack, st.worst_slack);
      } catch (const Error& e) {
        ++exceptions;
        std::cout << "  seed " << seed << " k " << k << " T " << T << ": " << e.what() << "\n";
      }
    }
  }
  const double secs = seconds_since(t0);
  report(covered == instances && exceptions == 0 && worst_slack <= 0 && secs < 120, "soundness",
         std::to_string(covered) + "/" + std::to_string(instances) + " covered, " + std::to_string(exceptions) +
             " exceptions, worst slack " + std::to_string(worst_slack) + " (" + std::to_string(skipped) +
             " infeasible draws skipped), " + fmt(secs, 1) + " s");
}

// NLLs agree when both are +inf (every feasible sequence has probability
// zero) or both are finite and close.
bool same_nll(double a, double b) { return std::isinf(a) || std::isinf(b) ? a == b : std::abs(a - b) <= 1e-9; }

// 4. Against exhaustive search on every instance with |X|^T <= 729.
void oracle_gap() {
  const auto t0 = Clock::now();
  const std::vector<std::string> concepts{"a", "b"};
  const std::vector<std::pair<ConceptTable, std::size_t>> setups{
      {ConceptTable({{"a", {0}}, {"b", {1}}}, 2), 9},
      {ConceptTable({{"a", {0}}, {"b", {1}}}, 3), 6},
      {ConceptTable({{"a", {0}}, {"b", {1, 2}}}, 3), 6},
  };
  std::mt19937_64 rng(99);
  std::size_t instances = 0;
  std::size_t below = 0;
  std::size_t full_equal = 0;
  std::size_t forced_equal = 0;
  std::size_t small_k_equal = 0;
  std::size_t small_k_runs = 0;
  std::size_t zero_mass = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Formula phi = random_formula(1 + static_cast<int>(seed % 3), concepts, 7000 + seed);
    const Dfa d = compile(phi, concepts);
    for (const auto& [table, max_t] : setups) {
      const Guide g(d, table);
      auto scorer = random_scorer(table.vocab_size(), rng);
      for (std::size_t T = 1; T <= max_t; ++T) {
        const OracleResult o = brute_force_map(scorer, g, T, {.cap = 729, .formula = phi});
        if (!o.best) continue;
        ++instances;
        zero_mass += std::isinf(o.best_nll);
        auto run = [&](std::size_t k, double alpha_min, double gamma) {
          DecodeConfig cfg;
          cfg.beams = k;
          cfg.horizon = T;
          cfg.alpha_min = alpha_min;
          cfg.gamma = gamma;
          return -decode(scorer, g, {}, cfg).best.natural_loglik;
        };
        for (std::size_t k : {1u, 2u, 4u}) {
          const double nll = run(k, 0.5, 1.0);
          below += nll < o.best_nll - 1e-9;
          small_k_equal += same_nll(nll, o.best_nll);
          ++small_k_runs;
        }
        const std::size_t k_full = o.feasible_count;
        full_equal += same_nll(run(k_full, 0.5, 1.0), o.best_nll);
        // α_min = 0 with a steep ramp: no push until the horizon forces it
        forced_equal += same_nll(run(k_full, 0.0, 64.0), o.best_nll);
      }
    }
  }
  const double full_rate = static_cast<double>(full_equal) / static_cast<double>(instances);
  const double secs = seconds_since(t0);
  report(below == 0 && full_rate >= 0.95 && forced_equal == instances, "oracle gap",
         std::to_string(instances) + " instances (" + std::to_string(zero_mass) + " with zero mass), " + std::to_string(below) + " below the optimum, k >= feasible count: " +
             fmt(100 * full_rate, 1) + "% equal, flat ramp: " + std::to_string(forced_equal) + "/" +
             std::to_string(instances) + " equal, k in {1,2,4}: " +
             fmt(100.0 * static_cast<double>(small_k_equal) / static_cast<double>(small_k_runs), 1) + "% equal, " +
             fmt(secs, 1) + " s");
}

// 5. Outfit rules: every rule compiles, and on noisy per-step classifier
// outputs the constrained decode is at least as accurate as per-step
// argmax, with full rule coverage where argmax falls short.
void outfit_rules() {
  const std::vector<std::string> classes{"t_shirt_top", "trouser", "pullover", "dress", "coat",
                                         "sandal",      "shirt",   "sneaker",  "bag",   "ankle_boot"};
  std::ifstream in(std::string(DATA_DIR) + "/fashion_mnist.ltlf");
  const auto lines = read_formula_lines(in);
  std::vector<Formula> rules;
  std::size_t compiled = 0;
  for (const auto& l : lines) {
    rules.push_back(parse_formula(l, classes));
    compile(rules.back(), classes);
    ++compiled;
  }
  const Formula all = Formula::conjunction(rules);
  const Dfa d = compile(all, classes);
  const Guide g(d, ConceptTable::identity(classes));
  const std::size_t T = 4;
  const FeasibilityTable feas = g.feasibility(T);
  const std::size_t V = classes.size();

  bool ok = lines.size() == 13 && compiled == 13 && feasible_exact(g, T);
  std::ostringstream detail;
  detail << compiled << "/13 rules compile; seq acc constrained vs argmax, coverage:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    LogitFile file;
    file.vocab = V;
    std::vector<std::vector<OutputId>> truth;
    const std::size_t n = 200;
    for (std::size_t i = 0; i < n; ++i) {
      // uniform random walk over feasible continuations
      std::vector<OutputId> w;
      Config c = g.initial();
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<OutputId> options;
        for (OutputId x = 0; x < V; ++x) {
          if (g.feasible(feas, T - t - 1, g.next_state(c, x))) options.push_back(x);
        }
        const OutputId x = options[rng() % options.size()];
        w.push_back(x);
        c = g.next_state(c, x);
      }
      truth.push_back(w);
      std::vector<std::vector<double>> rows;
      for (OutputId x : w) {
        std::vector<double> z(V);
        for (std::size_t y = 0; y < V; ++y) z[y] = (y == x ? 2.0 : 0.0) + 1.5 * noise(rng);
        const double lse = logsumexp(z);
        for (double& v : z) v -= lse;
        rows.push_back(z);
      }
      file.sequences["seq" + std::to_string(i)] = rows;
    }
    const auto shared = std::make_shared<const LogitFile>(LogitFile::from_json(file.to_json()));
    std::size_t acc_c = 0;
    std::size_t acc_u = 0;
    std::size_t cov_c = 0;
    std::size_t cov_u = 0;
    for (std::size_t i = 0; i < n; ++i) {
      LogitFileScorer s(shared, "seq" + std::to_string(i));
      std::vector<OutputId> argmax;
      for (const auto& row : shared->sequences.at("seq" + std::to_string(i))) {
        argmax.push_back(static_cast<OutputId>(std::max_element(row.begin(), row.end()) - row.begin()));
      }
      std::vector<std::string> names;
      for (OutputId x : argmax) names.push_back(classes[x]);
      cov_u += accepts(d, names);
      acc_u += argmax == truth[i];
      DecodeConfig cfg;
      cfg.beams = 16;
      cfg.horizon = T;
      const auto r = decode(s, g, {}, cfg);
      cov_c += r.satisfied;
      acc_c += r.best.outputs == truth[i];
    }
    ok &= acc_c >= acc_u && cov_c == n && cov_u < n;
    detail << " [seed " << seed << ": " << fmt(100.0 * acc_c / n, 1) << "% vs " << fmt(100.0 * acc_u / n, 1) << "%, "
           << fmt(100.0 * cov_c / n, 1) << "% vs " << fmt(100.0 * cov_u / n, 1) << "%]";
  }
  report(ok, "outfit rules", detail.str());
}

// 6. Decode time grows at most 2.5x per doubling of the beam count.
void beam_scaling() {
  const std::vector<std::string> words{"w0", "w1", "w2"};
  const std::vector<std::string> concepts{"w0", "w1", "w2", "dot", "eos"};
  const Dfa d = compile(ordered_constraint(words), concepts);
  std::map<std::string, std::vector<OutputId>> mu;
  for (std::size_t i = 0; i < concepts.size(); ++i) mu[concepts[i]] = {static_cast<OutputId>(i)};
  const std::size_t V = 64;
  const Guide g(d, ConceptTable(mu, V));
  auto scorer = random_markov(V, 5);
  const std::vector<std::size_t> ks{4, 8, 16, 32};
  std::vector<double> per;
  bool satisfied = true;
  for (std::size_t k : ks) {
    DecodeConfig cfg;
    cfg.beams = k;
    cfg.horizon = 32;
    std::vector<double> times;
    for (int rep = 0; rep < 15; ++rep) {
      const auto t0 = Clock::now();
      satisfied &= decode(scorer, g, {}, cfg).satisfied;
      times.push_back(seconds_since(t0));
    }
    std::nth_element(times.begin(), times.begin() + 7, times.end());
    per.push_back(times[7]);
  }
  bool ok = satisfied;
  std::cout << "  beams  seconds/decode  ratio\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double ratio = i ? per[i] / per[i - 1] : 0;
    if (i) ok &= ratio <= 2.5;
    std::cout << "  " << std::setw(5) << ks[i] << "  " << std::scientific << std::setprecision(3) << per[i] << "  "
              << (i ? fmt(ratio, 2) : std::string("-")) << "\n";
  }
  std::cout << std::defaultfloat;
  std::string ratios;
  for (std::size_t i = 1; i < per.size(); ++i) ratios += (i > 1 ? ", " : "") + fmt(per[i] / per[i - 1], 2);
  report(ok, "beam scaling", "T=32, |X|=64, ratios per doubling " + ratios + " (limit 2.5)");
}

// 7. Ramp values at the pinned points.
void ramp_grid() {
  const double high = ramp_push_up(0.5, 6, 4, 1.0);
  const double low = ramp_push_up(0.5, 0, 4, 1.0);
  const double mid = ramp_push_up(0.5, 2, 4, 1.0);
  const bool ok = std::abs(high - 1.0) <= 1e-12 && std::abs(low - 0.5) <= 1e-12 && std::abs(mid - 0.75) <= 1e-12;
  report(ok, "ramp grid",
         "clamp-high " + fmt(high, 12) + ", clamp-low " + fmt(low, 12) + ", midpoint " + fmt(mid, 12));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> criteria{
      {"word-level automaton", word_level_automaton},
      {"compiler equivalence", compiler_equivalence},
      {"soundness", soundness},
      {"oracle gap", oracle_gap},
      {"outfit rules", outfit_rules},
      {"beam scaling", beam_scaling},
      {"ramp grid", ramp_grid},
  };
  for (const auto& [name, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report(false, name, std::string("threw: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
