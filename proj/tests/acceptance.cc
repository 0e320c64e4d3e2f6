// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "support.h"
#include "truncproof/decoding.h"
#include "truncproof/engine.h"
#include "truncproof/error.h"
#include "truncproof/eval.h"
#include "truncproof/oracle.h"
#include "truncproof/precompute.h"

using namespace truncproof;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

template <typename... Args>
std::string Format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::vector<TokenId> AdmittedTokens(const Mask& m, TokenId skip = -1) {
  std::vector<TokenId> out;
  for (size_t t = 0; t < m.bits.size(); ++t) {
    if (m.bits[t] && static_cast<TokenId>(t) != skip) out.push_back(static_cast<TokenId>(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1. Mask against the brute-force oracle
// ---------------------------------------------------------------------------

struct OracleTally {
  size_t instances = 0;
  size_t unsound = 0;
  size_t checked = 0;     // tokens spanning at most two terminals
  size_t mismatches = 0;  // among those
  std::string example;
};

OracleTally MaskOracleRun(const std::vector<std::vector<std::string>>& pools, size_t instances, uint64_t seed) {
  const std::vector<Grammar> grammars{parse_grammar(test::Data("paren.grammar")),
                                      parse_grammar(test::Data("mini_json.grammar"))};
  std::mt19937_64 rng(seed);
  OracleTally tally;
  while (tally.instances < instances) {
    const size_t gi = tally.instances % 2;
    const Grammar& g = grammars[gi];
    std::vector<std::string> pool = pools[gi];
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> tokens(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min<size_t>(
                                                                      pool.size(), 2 + rng() % 6)));
    tokens.emplace_back();
    Vocabulary vocab(tokens, static_cast<TokenId>(tokens.size() - 1));
    auto engine = Engine::build(Grammar(g), Vocabulary(vocab), PrecomputeOptions{});
    const size_t n_max = 1 + rng() % 6;

    // Random valid prefix: admitted non-eos tokens only.
    Session s = Session::create(engine, n_max);
    std::vector<TokenId> prefix;
    const size_t steps = rng() % n_max;
    for (size_t i = 0; i < steps; ++i) {
      auto ok = AdmittedTokens(s.compute_mask_unchecked(), vocab.eos());
      if (ok.empty()) break;
      TokenId t = ok[rng() % ok.size()];
      s.advance(t);
      prefix.push_back(t);
    }
    ++tally.instances;

    Mask mask = s.compute_mask_unchecked();
    CfgOracle oracle(g);
    std::vector<uint8_t> expected = oracle.brute_force_mask(vocab, prefix, n_max);
    const std::string context = vocab.decode(prefix);
    const size_t lexeme_start = context.size() - s.remainder().size();
    for (size_t t = 0; t < vocab.size(); ++t) {
      const auto id = static_cast<TokenId>(t);
      if (mask.bits[t] && !expected[t]) ++tally.unsound;
      const size_t span =
          id == vocab.eos() ? 0
                            : oracle.lexeme_span(context + std::string(vocab.text(id)), lexeme_start,
                                                 context.size() + vocab.text(id).size());
      if (span > 2) continue;
      ++tally.checked;
      if (mask.bits[t] != expected[t]) {
        ++tally.mismatches;
        if (tally.example.empty()) {
          tally.example = "prefix '" + context + "' token '" + std::string(vocab.text(id)) + "' N_max " +
                          std::to_string(n_max) + " vocab {";
          for (size_t k = 0; k + 1 < tokens.size(); ++k) tally.example += (k ? " " : "") + tokens[k];
          tally.example += "}";
        }
      }
    }
  }
  return tally;
}

Outcome MaskOracleEquivalence() {
  // Pools include tokens that straddle terminal boundaries, as real vocabularies do.
  const std::vector<std::vector<std::string>> pools{
      {"x", "(", ")", "(x", "x)", "((", "))", "(x)"},
      {"[", "]", ",", "1", "2", "12", "\"", "\"a", "a", "b\"", "\"\"", "[1", "1]", "1,", ",1", "[]", "]]", "[["}};
  // Same shape, but every token lies inside a single terminal.
  const std::vector<std::vector<std::string>> single_terminal_pools{
      {"x", "(", ")"}, {"[", "]", ",", "1", "2", "12", "\"", "\"a", "a", "b\"", "\"\"", "\"ab\""}};
  auto start = Clock::now();
  OracleTally mixed = MaskOracleRun(pools, 600, 1);
  OracleTally single = MaskOracleRun(single_terminal_pools, 600, 2);
  const double secs = Seconds(start);
  std::string detail = Format(
      "%zu instances: unsound %zu; exactness mismatches %zu of %zu tokens spanning <=2 terminals "
      "(single-terminal vocabularies: %zu instances, unsound %zu, mismatches %zu of %zu); %.1f s",
      mixed.instances, mixed.unsound, mixed.mismatches, mixed.checked, single.instances, single.unsound,
      single.mismatches, single.checked, secs);
  if (!mixed.example.empty()) detail += "; first mismatch: " + mixed.example;
  const bool pass = mixed.unsound == 0 && single.unsound == 0 && mixed.mismatches == 0 && single.mismatches == 0 &&
                    secs < 60.0;
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 2. Syntax under budget
// ---------------------------------------------------------------------------

Outcome SyntaxUnderBudget(const std::shared_ptr<const Engine>& json) {
  const std::string corpus = test::DataPath("json_corpus.txt");
  auto tasks = load_tasks(test::DataPath("json_tasks.jsonl"), json->vocab());
  tasks.resize(21);
  EvalConfig cfg;
  cfg.strategies = {parse_strategy("greedy"), parse_strategy("beam:10"), parse_strategy("mcts:20,5,2")};
  cfg.ratios = {1.0, 1.1, 1.3, 1.5};
  size_t generations = 0, failures = 0;
  auto start = Clock::now();
  for (const std::string spec : {std::string("uniform"), "ngram:" + corpus, "verbose-bias:3:" + corpus,
                                 std::string("random:1")}) {
    auto model = make_model(spec, json->vocab());
    EvalReport report = run_eval(json, *model, tasks, cfg);
    for (const EvalRecord& r : report.records) {
      ++generations;
      // Independent validity check on top of the engine's own completion flag.
      if (!r.complete || r.tokens > r.budget || !nlohmann::json::accept(r.output)) ++failures;
    }
  }
  const double secs = Seconds(start);
  return {generations >= 1000 && failures == 0 && secs < 600.0,
          Format("%zu generations (4 models x 3 strategies x 4 ratios x %zu tasks), %zu failures, %.1f s",
                 generations, tasks.size(), failures, secs)};
}

// ---------------------------------------------------------------------------
// 3. Truncation failure mode
// ---------------------------------------------------------------------------

Outcome TruncationFailureMode(const std::shared_ptr<const Engine>& json) {
  auto tasks = load_tasks(test::DataPath("json_tasks_100.jsonl"), json->vocab());
  auto model = make_model("verbose-bias:4:" + test::DataPath("json_corpus.txt"), json->vocab());
  EvalConfig cfg;
  cfg.strategies = {parse_strategy("greedy")};
  cfg.ratios = {1.1};
  cfg.modes = {MaskMode::kGrammarOnly, MaskMode::kFull};
  auto agg = run_eval(json, *model, tasks, cfg).aggregates();
  const double grammar_only = agg[0].syntax_pct, full = agg[1].syntax_pct;
  return {tasks.size() == 100 && grammar_only < 100.0 && full == 100.0,
          Format("%zu tasks, e=1.1, verbosity-biased model: Syntax grammar-only %.1f%%, full %.1f%%", tasks.size(),
                 grammar_only, full)};
}

// ---------------------------------------------------------------------------
// 4. Cost tables against exhaustive search
// ---------------------------------------------------------------------------

Outcome CostTablesExact() {
  struct Case {
    const char* grammar;
    Vocabulary vocab;
  };
  std::vector<Case> cases;
  cases.push_back({"paren.grammar", test::ParenVocab()});
  cases.push_back({"mini_json.grammar", load_vocabulary(test::DataPath("mini_json_vocab.json"))});
  cases.push_back({"json_rfc8259.grammar", byte_vocabulary()});
  cases.push_back({"json_rfc8259.grammar", synthetic_json_vocabulary(1000)});
  size_t c_checked = 0, c_mismatch = 0, d_checked = 0, d_mismatch = 0, infinite = 0;
  for (const Case& c : cases) {
    Grammar g = parse_grammar(test::Data(c.grammar));
    CostTables t = build_cost_tables(g, build_ll1_table(g), c.vocab);
    for (size_t k = 0; k < t.num_keys(); ++k) {
      const Dfa& m = t.automaton(static_cast<int>(k));
      for (StateId q = 0; q < m.num_states(); ++q) {
        const Cost got = t.costs(static_cast<int>(k))[q];
        ++c_checked;
        infinite += got == kInfiniteCost;
        c_mismatch += got != brute_force_min_tokens(m, c.vocab, q);
      }
    }
    std::vector<Cost> terminal(g.num_terminals());
    for (size_t a = 0; a < terminal.size(); ++a) {
      const Dfa& m = g.terminal(static_cast<SymbolId>(a)).dfa;
      terminal[a] = brute_force_min_tokens(m, c.vocab, m.initial());
    }
    std::vector<Cost> expected = brute_force_nonterminal_costs(g, terminal);
    for (size_t i = 0; i < expected.size(); ++i) {
      ++d_checked;
      d_mismatch += t.nonterminal_costs()[i] != expected[i];
    }
  }
  return {c_mismatch == 0 && d_mismatch == 0,
          Format("C: %zu of %zu states differ (%zu infinite); D: %zu of %zu nonterminals differ; 4 grammar/vocab pairs",
                 c_mismatch, c_checked, infinite, d_mismatch, d_checked)};
}

// ---------------------------------------------------------------------------
// 5 and 6. Precompute time and per-step mask time
// ---------------------------------------------------------------------------

Outcome PrecomputeBudget() {
  Grammar g = parse_grammar(test::Data("json_rfc8259.grammar"));
  Vocabulary v = load_vocabulary(test::DataPath("json_vocab_1k.json"));
  auto start = Clock::now();
  Ll1Table table = build_ll1_table(g);
  CostTables t = build_cost_tables(g, table, v);
  const double parallel = Seconds(start);
  PrecomputeOptions serial_opts;
  serial_opts.execution = Execution::kSerial;
  start = Clock::now();
  CostTables serial = build_cost_tables(g, table, v, serial_opts);
  const double serial_secs = Seconds(start);
  return {parallel < 60.0 && serial_secs < 60.0 && serial == t,
          Format("%zu terminals, %zu pairs, %zu states, %zu token-map entries, |V|=%zu: %.3f s parallel, %.3f s serial",
                 t.num_terminals(), t.num_pairs(), t.total_states(), t.total_token_entries(), v.size(), parallel,
                 serial_secs)};
}

Outcome MaskOverhead(const std::shared_ptr<const Engine>& json) {
  std::mt19937_64 rng(6);
  double serial_ms = 0, parallel_ms = 0;
  size_t steps = 0;
  while (steps < 2000) {
    const size_t budget = 8 + rng() % 40;
    Session s = Session::create(json, budget);
    std::vector<TokenId> tokens;
    while (!s.finished()) {
      // Untimed replays give sessions with nothing cached, so accept-sequence
      // enumeration is part of each measurement.
      Session a = Session::replay(json, budget, tokens), b = Session::replay(json, budget, tokens);
      auto t0 = Clock::now();
      Mask m = a.compute_mask();
      serial_ms += Seconds(t0) * 1e3;
      t0 = Clock::now();
      Mask mp = b.compute_mask(Execution::kParallel);
      parallel_ms += Seconds(t0) * 1e3;
      if (!(m == mp)) return {false, "serial and parallel masks differ"};
      ++steps;
      auto ok = AdmittedTokens(m);
      const TokenId t = ok[rng() % ok.size()];
      s.advance(t);
      tokens.push_back(t);
    }
  }
  const double serial_mean = serial_ms / static_cast<double>(steps);
  const double parallel_mean = parallel_ms / static_cast<double>(steps);
  return {serial_mean <= 5.0,
          Format("%zu steps, |V|=%zu: mean %.4f ms/step serial, %.4f ms/step parallel", steps, json->vocab().size(),
                 serial_mean, parallel_mean)};
}

// ---------------------------------------------------------------------------
// 7. Decoder ordering on trap tasks
// ---------------------------------------------------------------------------

Outcome DecoderOrdering(const std::shared_ptr<const Engine>& json) {
  auto tasks = load_tasks(test::DataPath("trap_tasks.jsonl"), json->vocab());
  auto model = make_model("scripted:" + test::DataPath("trap_model.json"), json->vocab());
  EvalConfig cfg;
  cfg.strategies = {parse_strategy("greedy"), parse_strategy("beam:10"), parse_strategy("mcts:20,5,2")};
  cfg.ratios = {1.0};
  auto agg = run_eval(json, *model, tasks, cfg).aggregates();
  const double greedy = agg[0].exact_match_pct, beam = agg[1].exact_match_pct, mcts = agg[2].exact_match_pct;
  bool syntax = true;
  for (const auto& a : agg) syntax = syntax && a.syntax_pct == 100.0;
  return {tasks.size() == 50 && syntax && mcts >= beam && beam >= greedy,
          Format("%zu tasks, Exact-match greedy %.1f%%, beam:10 %.1f%%, mcts:20 %.1f%%; Syntax %s", tasks.size(),
                 greedy, beam, mcts, syntax ? "100% for all" : "below 100%")};
}

// ---------------------------------------------------------------------------
// 8. Determinism and replay
// ---------------------------------------------------------------------------

Outcome DeterminismAndReplay(const std::shared_ptr<const Engine>& json) {
  auto tasks = load_tasks(test::DataPath("json_tasks.jsonl"), json->vocab());
  auto model = make_model("random:17", json->vocab());
  EvalConfig cfg;
  cfg.strategies = {parse_strategy("greedy"), parse_strategy("beam:4"), parse_strategy("mcts:8,5,2")};
  cfg.ratios = {1.0, 1.5};
  cfg.modes = {MaskMode::kFull, MaskMode::kGrammarOnly};
  const std::string first = run_eval(json, *model, tasks, cfg).to_csv();
  const std::string second = run_eval(json, *model, tasks, cfg).to_csv();
  const bool csv_identical = first == second;

  const std::vector<std::shared_ptr<const Engine>> engines{
      test::ParenEngine(),
      Engine::build(parse_grammar(test::Data("mini_json.grammar")), load_vocabulary(test::DataPath("mini_json_vocab.json"))),
      json};
  std::mt19937_64 rng(8);
  size_t sequences = 0, differing = 0, advances = 0;
  for (; sequences < 10000; ++sequences) {
    const auto& e = engines[sequences % engines.size()];
    const MaskMode mode = sequences % 5 == 4 ? MaskMode::kNoConstraint : MaskMode::kFull;
    const size_t budget = 2 + rng() % 24;
    Session s = Session::create(e, budget, mode);
    std::vector<TokenId> tokens;
    const size_t length = rng() % budget;
    for (size_t i = 0; i < length && !s.finished(); ++i) {
      TokenId t;
      if (mode == MaskMode::kNoConstraint) {
        t = static_cast<TokenId>(rng() % e->vocab().size());
        if (t == e->vocab().eos()) continue;
        s.advance_unchecked(t);
      } else {
        auto ok = AdmittedTokens(s.compute_mask());
        t = ok[rng() % ok.size()];
        s.advance(t);
      }
      tokens.push_back(t);
      ++advances;
    }
    if (!(s == Session::replay(e, budget, tokens, mode))) ++differing;
  }
  return {csv_identical && differing == 0,
          Format("eval CSV (%zu bytes) identical across runs: %s; %zu random sequences (%zu advances), %zu differ "
                 "from batch replay",
                 first.size(), csv_identical ? "yes" : "no", sequences, advances, differing)};
}

}  // namespace

int main() {
  auto json = Engine::build(parse_grammar(test::Data("json_rfc8259.grammar")),
                            load_vocabulary(test::DataPath("json_vocab_1k.json")));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mask-oracle equivalence", MaskOracleEquivalence},
      {"syntax under budget", [&] { return SyntaxUnderBudget(json); }},
      {"truncation failure mode", [&] { return TruncationFailureMode(json); }},
      {"cost-table correctness", CostTablesExact},
      {"precompute budget", PrecomputeBudget},
      {"per-step mask overhead", [&] { return MaskOverhead(json); }},
      {"decoder quality ordering", [&] { return DecoderOrdering(json); }},
      {"determinism and replay", [&] { return DeterminismAndReplay(json); }},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
