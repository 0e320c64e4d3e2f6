#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.h"
#include "truncproof/engine.h"
#include "truncproof/error.h"
#include "truncproof/oracle.h"

using namespace truncproof;

namespace {

std::vector<int> Bits(const Mask& m) { return std::vector<int>(m.bits.begin(), m.bits.end()); }

std::vector<std::string> TerminalNames(const Session& s) {
  std::vector<std::string> out;
  for (SymbolId a : s.terminals()) out.push_back(s.engine().grammar().name(a));
  return out;
}

bool HasSequence(const Session& s, const std::string& a, const std::string& b = "") {
  const Grammar& g = s.engine().grammar();
  for (const AcceptSequence& seq : s.accept_sequences()) {
    if (g.name(seq.first) != a) continue;
    if (b.empty() ? seq.second == kNoSymbol : (seq.second != kNoSymbol && g.name(seq.second) == b)) return true;
  }
  return false;
}

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("parenthesis masks") {
  auto e = test::ParenEngine();
  CHECK(Bits(Session::create(e, 3).compute_mask()) == std::vector<int>{1, 0, 0, 1, 0});
  CHECK(Bits(Session::create(e, 4).compute_mask()) == std::vector<int>{1, 1, 0, 1, 0});
  Session s = Session::create(e, 3);
  s.advance(0);
  CHECK(Bits(s.compute_mask()) == std::vector<int>{0, 0, 0, 0, 1});
  CHECK(s.is_complete());
}

TEST_CASE("masks agree with the brute-force oracle on parenthesis prefixes") {
  auto e = test::ParenEngine();
  CfgOracle oracle(e->grammar());
  for (size_t n = 1; n <= 6; ++n) {
    for (const std::vector<TokenId>& prefix : std::vector<std::vector<TokenId>>{{}, {1}, {3}, {1, 1}, {1, 3}, {3, 2}}) {
      if (prefix.size() >= n) continue;
      Session s = Session::replay(e, n, prefix);
      INFO("n=" << n << " prefix " << e->vocab().decode(prefix));
      std::vector<uint8_t> expected = oracle.brute_force_mask(e->vocab(), prefix, n);
      CHECK(s.compute_mask_unchecked().bits == expected);
    }
  }
}

TEST_CASE("accept sequences") {
  auto e = test::ParenEngine();
  Session s = Session::create(e, 4);
  const Grammar& g = e->grammar();
  std::vector<std::pair<std::string, Cost>> got;
  for (const AcceptSequence& a : s.accept_sequences()) {
    std::string name = g.name(a.first);
    if (a.second != kNoSymbol) name += "," + g.name(a.second);
    got.emplace_back(name, a.d_cost);
  }
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::pair<std::string, Cost>>{{"LP", 2}, {"LP,LP", 3}, {"LP,X", 1}, {"X", 0}});

  s.advance(1);
  s.advance(0);
  REQUIRE(s.accept_sequences().size() == 1);
  CHECK(g.name(s.accept_sequences()[0].first) == "RP");
  CHECK(s.accept_sequences()[0].second == kNoSymbol);
  CHECK(s.accept_sequences()[0].d_cost == 0);
}

TEST_CASE("session parser feed") {
  auto e = test::ParenEngine();
  const Grammar& g = e->grammar();
  Session s = Session::create(e, 6);
  s.advance(1);
  CHECK(s.stack().symbols() == std::vector<SymbolId>{*g.find("E"), *g.find("RP")});
  CHECK(s.parser_feed(*g.find("X")).symbols() == std::vector<SymbolId>{*g.find("RP")});
  s.advance(0);
  CHECK(KindOf([&] { s.parser_feed(*g.find("X")); }) == ErrorKind::kParseFailure);
}

TEST_CASE("json lexing") {
  auto e = test::JsonEngine();
  const Vocabulary& v = e->vocab();
  Session fresh = Session::create(e, 110);
  CHECK(fresh.generated() == 0);
  CHECK(fresh.stack().symbols() == std::vector<SymbolId>{e->grammar().start()});

  Session a = fresh;
  a.advance(test::Id(v, "{"));
  CHECK(TerminalNames(a) == std::vector<std::string>{"LBRACE"});
  CHECK(a.remainder().empty());

  Session b = fresh;
  b.advance(test::Id(v, "{\""));
  b.advance(test::Id(v, "a"));
  CHECK(TerminalNames(b) == std::vector<std::string>{"LBRACE"});
  CHECK(b.remainder() == "\"a");

  Session c = Session::replay(e, 110, v.encode("[\"keyword"));
  CHECK(c.remainder() == "\"keyword");
  c.advance(test::Id(v, "\","));
  CHECK(TerminalNames(c) == std::vector<std::string>{"LBRACKET", "STRING", "COMMA"});
  CHECK(c.remainder().empty());
  CHECK(HasSequence(c, "STRING"));
  CHECK(HasSequence(c, "STRING", "COMMA"));
  CHECK(HasSequence(c, "LBRACKET", "RBRACKET"));
  CHECK(HasSequence(c, "ws", "STRING"));
  CHECK_FALSE(HasSequence(c, "RBRACKET"));
}

TEST_CASE("completion") {
  auto e = test::ParenEngine();
  auto after = [&](std::vector<TokenId> ids) { return Session::replay(e, 8, ids); };
  CHECK(after({0}).is_complete());
  CHECK_FALSE(after({1}).is_complete());
  CHECK(after({1, 0, 2}).is_complete());
  CHECK(after({3, 2}).is_complete());
  CHECK_FALSE(after({}).is_complete());

  // A number is complete while it could still grow.
  auto j = test::JsonEngine(400);
  Session n = Session::replay(j, 10, j->vocab().encode("12"));
  CHECK(n.remainder() == "12");
  CHECK(n.is_complete());
  CHECK(n.compute_mask()[j->vocab().eos()]);
}

TEST_CASE("errors") {
  auto e = test::ParenEngine();
  CHECK(KindOf([&] { Session::create(e, 0); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { Session::create(e, 1).compute_mask(); }) == ErrorKind::kBudgetExhausted);
  CHECK(Session::create(e, 1).compute_mask_unchecked().none());

  Session s = Session::create(e, 3);
  CHECK(KindOf([&] { s.advance(1); }) == ErrorKind::kMaskedTokenRejected);
  CHECK(KindOf([&] { s.advance(17); }) == ErrorKind::kUnknownToken);
  s.advance(0);
  s.advance(4);
  CHECK(s.finished());
  CHECK(KindOf([&] { s.compute_mask(); }) == ErrorKind::kBudgetExhausted);
  CHECK(KindOf([&] { s.advance(0); }) == ErrorKind::kBudgetExhausted);

  Grammar g = parse_grammar(test::Data("paren.grammar"));
  Vocabulary v = test::ParenVocab();
  PrecomputeOptions opts;
  opts.grammar_hash = 1;
  CostTables tables = build_cost_tables(g, build_ll1_table(g), v, opts);
  CHECK(KindOf([&] { Engine(Grammar(g), Vocabulary(v), CostTables(tables), 2, 0); }) == ErrorKind::kCacheHash);
  CHECK(KindOf([&] { Engine(Grammar(g), Vocabulary({"x", ""}, 1), CostTables(tables), 1, 0); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("modes") {
  auto e = test::ParenEngine();
  CHECK(Bits(Session::create(e, 1, MaskMode::kGrammarOnly).compute_mask()) == std::vector<int>{1, 1, 0, 1, 0});
  CHECK(Bits(Session::create(e, 1, MaskMode::kNoConstraint).compute_mask()) == std::vector<int>{1, 1, 1, 1, 1});
  Session broken = Session::create(e, 4, MaskMode::kNoConstraint);
  broken.advance(2);
  CHECK(broken.broken());
  CHECK_FALSE(broken.is_complete());
  CHECK(ParseMaskMode("grammar-only") == MaskMode::kGrammarOnly);
  CHECK(std::string(MaskModeName(MaskMode::kFull)) == "full");
  CHECK_FALSE(ParseMaskMode("other").has_value());
}

TEST_CASE("budget term is inactive for large budgets") {
  auto e = test::JsonEngine(400);
  std::mt19937 rng(9);
  for (int walk = 0; walk < 10; ++walk) {
    Session full = Session::create(e, 10000), grammar = Session::create(e, 10000, MaskMode::kGrammarOnly);
    for (int step = 0; step < 12; ++step) {
      Mask m = full.compute_mask();
      CHECK(m == grammar.compute_mask());
      std::vector<TokenId> ok;
      for (size_t t = 0; t + 1 < m.bits.size(); ++t) {
        if (m.bits[t]) ok.push_back(static_cast<TokenId>(t));
      }
      TokenId t = ok[rng() % ok.size()];
      full.advance(t);
      grammar.advance(t);
    }
  }
}

TEST_CASE("progress, validity and replay on random walks") {
  auto e = test::JsonEngine(400);
  const TokenId eos = e->vocab().eos();
  std::mt19937 rng(21);
  for (int walk = 0; walk < 150; ++walk) {
    const size_t budget = 2 + rng() % 20;
    Session s = Session::create(e, budget);
    std::vector<TokenId> tokens;
    while (!s.finished()) {
      Mask m = s.compute_mask();
      CHECK(m == s.compute_mask_unchecked(Execution::kParallel));
      std::vector<TokenId> ok;
      for (size_t t = 0; t < m.bits.size(); ++t) {
        if (m.bits[t]) ok.push_back(static_cast<TokenId>(t));
      }
      REQUIRE_FALSE(ok.empty());
      TokenId t = ok[rng() % ok.size()];
      if (t == eos) CHECK(s.is_complete());
      s.advance(t);
      tokens.push_back(t);
      CHECK(s == Session::replay(e, budget, tokens));
    }
    CHECK(tokens.back() == eos);
    CHECK(tokens.size() <= budget);
    CHECK(cfg_membership(e->grammar(), e->vocab().decode(tokens)) == Membership::kMember);
  }
}

TEST_CASE("admits and explain agree with the mask") {
  auto e = test::JsonEngine(400);
  Session s = Session::replay(e, 14, e->vocab().encode("[\"keyword"));
  Mask m = s.compute_mask();
  std::vector<TokenVerdict> verdicts = s.explain();
  REQUIRE(verdicts.size() == e->vocab().size());
  for (const TokenVerdict& v : verdicts) {
    CHECK(v.admitted == m[v.token]);
    CHECK(s.admits(v.token) == m[v.token]);
    if (v.admitted && v.token != e->vocab().eos()) {
      CHECK(v.consumed == s.generated() + 1);
      CHECK(v.consumed + v.completion + v.d_cost < s.budget());
    }
  }
}
