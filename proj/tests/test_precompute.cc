#include <filesystem>
#include <random>

#include "doctest.h"
#include "support.h"
#include "truncproof/error.h"
#include "truncproof/oracle.h"
#include "truncproof/precompute.h"

using namespace truncproof;

namespace {

struct Built {
  Grammar g;
  Ll1Table table;
  Vocabulary vocab;
  CostTables tables;
};

Built Build(const std::string& grammar_file, Vocabulary vocab) {
  Grammar g = parse_grammar(test::Data(grammar_file));
  Ll1Table t = build_ll1_table(g);
  CostTables c = build_cost_tables(g, t, vocab);
  return {std::move(g), std::move(t), std::move(vocab), std::move(c)};
}

ErrorKind LoadErrorKind(std::string bytes, uint64_t gh, uint64_t vh) {
  try {
    deserialize_cache(bytes, gh, vh);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("terminal costs on the in-string state") {
  Dfa s = compile_regex(R"("[^"]*")");
  Vocabulary v({"\"", "a", "ab", ""}, 3);
  std::vector<Cost> c = compute_terminal_costs(s, v);
  StateId in_string = dfa_run(s, s.initial(), R"("keyword)");
  CHECK(c[in_string] == 1);
  CHECK(c[in_string] == brute_force_min_tokens(s, v, in_string));
  CHECK(c[s.initial()] == 2);
  CHECK(c[Dfa::kDead] == kInfiniteCost);

  Dfa rp = compile_regex(R"(\))");
  CHECK(compute_terminal_costs(rp, Vocabulary({"x", "(", ""}, 2))[rp.initial()] == kInfiniteCost);
}

TEST_CASE("parenthesis pair tables") {
  Built b = Build("paren.grammar", test::ParenVocab());
  const SymbolId x = *b.g.find("X"), lp = *b.g.find("LP");
  const int lp_x = b.tables.pair_key(lp, x);
  REQUIRE(lp_x >= 0);
  const Dfa& m = b.tables.automaton(lp_x);
  CHECK(b.tables.costs(lp_x)[m.initial()] == 1);
  CHECK(brute_force_min_tokens(m, b.vocab, m.initial()) == 1);
  CHECK(b.tables.pair_key(x, x) == -1);

  auto open_x = b.tables.token_map(lp_x).lookup(m.initial(), 3);
  REQUIRE(open_x.has_value());
  CHECK(m.is_accepting(*open_x));
  const int lp_key = CostTables::single_key(lp);
  CHECK_FALSE(b.tables.token_map(lp_key).lookup(b.tables.automaton(lp_key).initial(), 0).has_value());

  // D[S] = D[E] = C_X = 1.
  for (Cost d : b.tables.nonterminal_costs()) CHECK(d == 1);
}

TEST_CASE("json tables") {
  Built b = Build("json_rfc8259.grammar", synthetic_json_vocabulary(400));
  const SymbolId str = *b.g.find("STRING");
  const int k = CostTables::single_key(str);
  const Dfa& m = b.tables.automaton(k);
  StateId in_string = dfa_run(m, m.initial(), R"("keyword)");
  auto next = b.tables.token_map(k).lookup(in_string, test::Id(b.vocab, ")"));
  REQUIRE(next.has_value());
  CHECK(*next == in_string);
  CHECK(b.tables.costs(k)[in_string] == 1);
  CHECK(b.tables.nonterminal_costs()[b.g.nonterminal_index(*b.g.find("WS"))] == 0);
  CHECK(b.tables.nonterminal_costs()[b.g.nonterminal_index(b.g.start())] == 1);
}

TEST_CASE("C matches exhaustive search on every key and state") {
  for (const char* file : {"paren.grammar", "mini_json.grammar"}) {
    Built b = Build(file, file == std::string("paren.grammar") ? test::ParenVocab()
                                                                : load_vocabulary(test::DataPath("mini_json_vocab.json")));
    for (size_t k = 0; k < b.tables.num_keys(); ++k) {
      const Dfa& m = b.tables.automaton(static_cast<int>(k));
      for (StateId q = 0; q < m.num_states(); ++q) {
        INFO(file << " key " << k << " state " << q);
        CHECK(b.tables.costs(static_cast<int>(k))[q] == brute_force_min_tokens(m, b.vocab, q));
      }
    }
  }
}

TEST_CASE("D matches value iteration and the triangle property holds") {
  Built b = Build("json_rfc8259.grammar", synthetic_json_vocabulary(300));
  std::vector<Cost> terminal(b.g.num_terminals());
  for (size_t a = 0; a < terminal.size(); ++a) {
    const Dfa& m = b.tables.automaton(static_cast<int>(a));
    terminal[a] = b.tables.costs(static_cast<int>(a))[m.initial()];
  }
  auto d = b.tables.nonterminal_costs();
  CHECK(std::vector<Cost>(d.begin(), d.end()) == brute_force_nonterminal_costs(b.g, terminal));
  std::vector<Cost> sym = b.tables.symbol_costs();
  for (const Production& p : b.g.productions()) {
    Cost sum = 0;
    for (SymbolId s : p.rhs) sum = add_costs(sum, sym[s]);
    CHECK(d[b.g.nonterminal_index(p.lhs)] <= sum);
  }
}

TEST_CASE("unsatisfiable nonterminals are reported") {
  Grammar g = parse_grammar("S: X | A; A: Y A; X: /x/; Y: /y/;");
  Ll1Table t = build_ll1_table(g);
  std::vector<SymbolId> bad;
  std::vector<Cost> d = compute_nonterminal_costs(g, std::vector<Cost>{1, 1}, &bad);
  CHECK(d[g.nonterminal_index(*g.find("A"))] == kInfiniteCost);
  CHECK(d[g.nonterminal_index(g.start())] == 1);
  CHECK(bad == std::vector<SymbolId>{*g.find("A")});
}

TEST_CASE("token map matches automaton runs") {
  Built b = Build("json_rfc8259.grammar", synthetic_json_vocabulary(400));
  std::mt19937 rng(5);
  for (size_t k = 0; k < b.tables.num_keys(); ++k) {
    const Dfa& m = b.tables.automaton(static_cast<int>(k));
    const TokenMap& map = b.tables.token_map(static_cast<int>(k));
    for (int trial = 0; trial < 60; ++trial) {
      StateId q = static_cast<StateId>(1 + rng() % (m.num_states() - 1));
      TokenId t = static_cast<TokenId>(rng() % (b.vocab.size() - 1));
      StateId expected = dfa_run(m, q, b.vocab.text(t));
      auto got = map.lookup(q, t);
      CHECK(got.has_value() == m.is_live(expected));
      if (got) CHECK(*got == expected);
    }
    for (StateId q = 0; q < m.num_states(); ++q) {
      auto row = map.row(q);
      for (size_t i = 1; i < row.size(); ++i) CHECK(row[i - 1].token < row[i].token);
    }
  }
}

TEST_CASE("serial and parallel builds are identical") {
  Grammar g = parse_grammar(test::Data("json_rfc8259.grammar"));
  Ll1Table t = build_ll1_table(g);
  Vocabulary v = synthetic_json_vocabulary(500);
  PrecomputeOptions serial, parallel;
  serial.execution = Execution::kSerial;
  parallel.execution = Execution::kParallel;
  CHECK(build_cost_tables(g, t, v, serial) == build_cost_tables(g, t, v, parallel));
}

TEST_CASE("cache round-trip and errors") {
  PrecomputeOptions opts;
  opts.grammar_hash = 11;
  opts.vocab_hash = 22;
  Grammar g = parse_grammar(test::Data("json_rfc8259.grammar"));
  Vocabulary v = synthetic_json_vocabulary(300);
  CostTables c = build_cost_tables(g, build_ll1_table(g), v, opts);
  const std::string bytes = serialize_cache(c);
  CHECK(deserialize_cache(bytes, 11, 22) == c);
  CHECK(serialize_cache(deserialize_cache(bytes, 11, 22)) == bytes);

  CHECK(LoadErrorKind(bytes, 12, 22) == ErrorKind::kCacheHash);
  CHECK(LoadErrorKind(bytes, 11, 23) == ErrorKind::kCacheHash);
  std::string newer = bytes;
  newer[8] = static_cast<char>(kCacheFormatVersion + 1);
  CHECK(LoadErrorKind(newer, 11, 22) == ErrorKind::kCacheVersion);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK(LoadErrorKind(flipped, 11, 22) == ErrorKind::kCacheCorrupt);
  CHECK(LoadErrorKind(bytes.substr(0, bytes.size() - 100), 11, 22) == ErrorKind::kCacheCorrupt);
  CHECK(LoadErrorKind("garbage", 11, 22) == ErrorKind::kCacheCorrupt);

  auto path = std::filesystem::temp_directory_path() / "truncproof_test.cache";
  save_cache(c, path);
  CHECK(load_cache(path, 11, 22) == c);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(save_cache(c, "/nonexistent-dir/x.cache"), Error);
  CHECK_THROWS_AS(load_cache("/nonexistent-dir/x.cache", 11, 22), Error);
}

TEST_CASE("content hash") {
  CHECK(content_hash("") == 0xcbf29ce484222325ULL);
  CHECK(content_hash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(content_hash("S: X;") != content_hash("S: X; "));
}
