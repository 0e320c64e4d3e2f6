#include "doctest.h"
#include "support.h"
#include "truncproof/error.h"
#include "truncproof/grammar.h"
#include "truncproof/parser.h"

using namespace truncproof;

namespace {

ErrorKind KindOf(const std::string& text) {
  try {
    Grammar g = parse_grammar(text);
    build_ll1_table(g);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("parenthesis grammar") {
  Grammar g = parse_grammar(R"(S: E; E: X | LP E RP; X:/x/; LP:/\(/; RP:/\)/;)");
  CHECK(g.num_nonterminals() == 2);
  CHECK(g.num_terminals() == 3);
  CHECK(g.productions().size() == 3);
  CHECK(g.name(g.start()) == "S");

  Ll1Table t = build_ll1_table(g);
  const SymbolId e = *g.find("E"), x = *g.find("X"), lp = *g.find("LP"), rp = *g.find("RP");
  CHECK(g.production_to_string(t.predict(g, e, x)) == "E: X");
  CHECK(g.production_to_string(t.predict(g, e, lp)) == "E: LP E RP");
  CHECK(t.predict(g, e, rp) == Ll1Table::kNoProduction);
  CHECK(t.adjacent(lp, x));
  CHECK(t.adjacent(lp, lp));
  CHECK(t.adjacent(x, rp));
  CHECK_FALSE(t.adjacent(x, x));
  CHECK_FALSE(t.adjacent(rp, x));
}

TEST_CASE("bundled grammars build") {
  Grammar json = parse_grammar(test::Data("json_rfc8259.grammar"));
  CHECK(json.num_terminals() >= 10);
  CHECK(json.num_terminals() <= 15);
  Ll1Table t = build_ll1_table(json);
  const SymbolId ws = *json.find("WS");
  CHECK(t.nullable[ws]);
  CHECK_NOTHROW(build_ll1_table(parse_grammar(test::Data("mini_json.grammar"))));
}

TEST_CASE("grammar errors") {
  CHECK(KindOf("S: Q; X: /x/;") == ErrorKind::kUndeclaredSymbol);
  CHECK(KindOf("A: X | X Y; X: /x/; Y: /y/;") == ErrorKind::kLl1Conflict);
  CHECK(KindOf("A: A X | X; X: /x/;") == ErrorKind::kLl1Conflict);
  CHECK(KindOf("S: X; S: X; X: /x/;") == ErrorKind::kDuplicateSymbol);
  CHECK(KindOf("S X") == ErrorKind::kGrammarSyntax);
  CHECK(KindOf("S: X; X: /(?=a)/;") == ErrorKind::kUnsupportedRegex);
  CHECK(Error(ErrorKind::kLl1Conflict, "").is_grammar_error());
  CHECK_FALSE(Error(ErrorKind::kIo, "").is_grammar_error());
}

TEST_CASE("conflict diagnostic names the nonterminal and lookahead") {
  try {
    build_ll1_table(parse_grammar("A: X | X Y; X: /x/; Y: /y/;"));
    FAIL("expected a conflict");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("A") != std::string::npos);
    CHECK(msg.find("X") != std::string::npos);
  }
}

TEST_CASE("epsilon alternatives and comments") {
  Grammar g = parse_grammar("# list\nL: X L | ε\nX: /x/\n");
  Ll1Table t = build_ll1_table(g);
  CHECK(t.nullable[*g.find("L")]);
  CHECK(t.follow[*g.find("X")][t.end_marker()]);
  Grammar h = parse_grammar("L: X L | ; X: /x/;");
  CHECK(build_ll1_table(h).nullable[*h.find("L")]);
}

TEST_CASE("parser feeds") {
  Grammar g = parse_grammar(test::Data("paren.grammar"));
  Ll1Table t = build_ll1_table(g);
  Ll1Parser p(g, t);
  const SymbolId e = *g.find("E"), x = *g.find("X"), lp = *g.find("LP"), rp = *g.find("RP");

  ParserStack s = p.initial();
  CHECK(s.symbols() == std::vector<SymbolId>{g.start()});
  ParserStack after_lp = p.feed_or_throw(s, lp);
  CHECK(after_lp.symbols() == std::vector<SymbolId>{e, rp});
  ParserStack after_x = p.feed_or_throw(after_lp, x);
  CHECK(after_x.symbols() == std::vector<SymbolId>{rp});
  CHECK_FALSE(p.feed(after_x, x).has_value());
  CHECK_THROWS_AS(p.feed_or_throw(after_x, x), Error);
  ParserStack done = p.feed_or_throw(after_x, rp);
  CHECK(done.empty());
  CHECK(p.accepts_end(done));
  CHECK_FALSE(p.accepts_end(after_x));
}

TEST_CASE("stack caches cost, nullability and depth") {
  ParserStack s;
  CHECK(s.cost() == 0);
  CHECK(s.derives_empty());
  ParserStack a = s.push(7, 2, true).push(8, 3, false);
  CHECK(a.cost() == 5);
  CHECK(a.depth() == 2);
  CHECK_FALSE(a.derives_empty());
  CHECK(a.pop().derives_empty());
  CHECK(s.push(7, kInfiniteCost, true).push(8, 1, true).cost() == kInfiniteCost);
  CHECK(add_costs(kInfiniteCost - 1, 5) == kInfiniteCost);
}
