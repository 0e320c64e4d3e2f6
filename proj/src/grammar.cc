/*!
 *  Copyright (c) 2026 by Contributors
 * \file grammar.cc
 * \brief Grammar file parser and LL(1) table construction.
 */
#include "truncproof/grammar.h"

#include <functional>
#include <map>
#include <utility>

#include "truncproof/error.h"

namespace truncproof {

Grammar::Grammar(std::vector<Terminal> terminals, std::vector<std::string> nonterminals,
                 std::vector<Production> productions, SymbolId start)
    : terminals_(std::move(terminals)),
      nonterminal_names_(std::move(nonterminals)),
      productions_(std::move(productions)),
      by_lhs_(nonterminal_names_.size()),
      start_(start) {
  for (size_t i = 0; i < productions_.size(); ++i) {
    by_lhs_[nonterminal_index(productions_[i].lhs)].push_back(static_cast<int>(i));
  }
}

const std::string& Grammar::name(SymbolId s) const {
  if (is_terminal(s)) return terminals_[s].name;
  return nonterminal_names_[nonterminal_index(s)];
}

std::optional<SymbolId> Grammar::find(std::string_view name) const {
  for (size_t s = 0; s < num_symbols(); ++s) {
    if (this->name(static_cast<SymbolId>(s)) == name) return static_cast<SymbolId>(s);
  }
  return std::nullopt;
}

std::string Grammar::production_to_string(size_t id) const {
  const Production& p = productions_[id];
  std::string out = name(p.lhs) + ":";
  if (p.rhs.empty()) return out + " ε";
  for (SymbolId s : p.rhs) out += " " + name(s);
  return out;
}

namespace {

struct GrammarToken {
  enum class Kind { kIdent, kColon, kBar, kSemi, kRegex, kEpsilon, kEnd };
  Kind kind;
  std::string text;
  int line;
  int column;
};

[[noreturn]] void SyntaxError(int line, int column, const std::string& what) {
  throw Error(ErrorKind::kGrammarSyntax,
              "grammar:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

std::vector<GrammarToken> Tokenize(std::string_view text) {
  std::vector<GrammarToken> out;
  size_t i = 0;
  int line = 1;
  size_t line_start = 0;
  auto column = [&](size_t at) { return static_cast<int>(at - line_start) + 1; };
  auto is_ident_start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto is_ident_char = [&](char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); };

  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      line_start = ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    const int col = column(i);
    if (is_ident_start(c)) {
      size_t begin = i;
      while (i < text.size() && is_ident_char(text[i])) ++i;
      out.push_back({GrammarToken::Kind::kIdent, std::string(text.substr(begin, i - begin)), line, col});
    } else if (c == ':') {
      out.push_back({GrammarToken::Kind::kColon, ":", line, col});
      ++i;
    } else if (c == '|') {
      out.push_back({GrammarToken::Kind::kBar, "|", line, col});
      ++i;
    } else if (c == ';') {
      out.push_back({GrammarToken::Kind::kSemi, ";", line, col});
      ++i;
    } else if (c == '/') {
      size_t begin = ++i;
      while (i < text.size() && text[i] != '/') {
        if (text[i] == '\n') SyntaxError(line, col, "unterminated /regex/");
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        ++i;
      }
      if (i >= text.size()) SyntaxError(line, col, "unterminated /regex/");
      out.push_back({GrammarToken::Kind::kRegex, std::string(text.substr(begin, i - begin)), line, col});
      ++i;
    } else if (text.substr(i, 2) == "\xCE\xB5") {  // ε
      out.push_back({GrammarToken::Kind::kEpsilon, "ε", line, col});
      i += 2;
    } else {
      SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({GrammarToken::Kind::kEnd, "", line, column(i)});
  return out;
}

struct RuleDecl {
  std::string name;
  int line;
  int column;
  std::vector<std::vector<GrammarToken>> alternatives;
};

struct TerminalDecl {
  std::string name;
  int line;
  int column;
  std::string pattern;
};

}  // namespace

Grammar parse_grammar(std::string_view text) {
  using Kind = GrammarToken::Kind;
  std::vector<GrammarToken> tokens = Tokenize(text);
  std::vector<RuleDecl> rules;
  std::vector<TerminalDecl> terminal_decls;
  std::map<std::string, std::pair<int, int>> declared;

  size_t pos = 0;
  auto starts_declaration = [&](size_t at) {
    return tokens[at].kind == Kind::kIdent && tokens[at + 1].kind == Kind::kColon;
  };
  auto ends_declaration = [&](size_t at) {
    return tokens[at].kind == Kind::kSemi || tokens[at].kind == Kind::kEnd || starts_declaration(at);
  };

  while (tokens[pos].kind != Kind::kEnd) {
    if (tokens[pos].kind == Kind::kSemi) {
      ++pos;
      continue;
    }
    const GrammarToken& head = tokens[pos];
    if (!starts_declaration(pos)) {
      SyntaxError(head.line, head.column, "expected 'Name:' to start a declaration, got '" + head.text + "'");
    }
    auto [it, inserted] = declared.emplace(head.text, std::make_pair(head.line, head.column));
    if (!inserted) {
      throw Error(ErrorKind::kDuplicateSymbol, "grammar:" + std::to_string(head.line) + ":" +
                                                   std::to_string(head.column) + ": duplicate declaration of '" +
                                                   head.text + "' (first declared at line " +
                                                   std::to_string(it->second.first) + ")");
    }
    pos += 2;
    if (tokens[pos].kind == Kind::kRegex) {
      terminal_decls.push_back({head.text, head.line, head.column, tokens[pos].text});
      ++pos;
      if (!ends_declaration(pos)) {
        SyntaxError(tokens[pos].line, tokens[pos].column,
                    "terminal '" + head.text + "' must be defined by a single /regex/");
      }
      if (tokens[pos].kind == Kind::kSemi) ++pos;
      continue;
    }
    RuleDecl rule{head.text, head.line, head.column, {{}}};
    while (!ends_declaration(pos)) {
      const GrammarToken& tok = tokens[pos];
      switch (tok.kind) {
        case Kind::kBar:
          rule.alternatives.emplace_back();
          break;
        case Kind::kIdent:
          rule.alternatives.back().push_back(tok);
          break;
        case Kind::kEpsilon:
          break;
        case Kind::kRegex:
          SyntaxError(tok.line, tok.column, "regex inside a rule; declare it as a terminal");
        default:
          SyntaxError(tok.line, tok.column, "unexpected '" + tok.text + "'");
      }
      ++pos;
    }
    if (tokens[pos].kind == Kind::kSemi) ++pos;
    rules.push_back(std::move(rule));
  }

  if (rules.empty()) SyntaxError(1, 1, "grammar declares no rules");

  std::map<std::string, SymbolId> ids;
  std::vector<Terminal> terminals;
  for (const TerminalDecl& decl : terminal_decls) {
    ids[decl.name] = static_cast<SymbolId>(terminals.size());
    Dfa dfa;
    try {
      dfa = compile_regex(decl.pattern);
    } catch (const Error& e) {
      throw Error(e.kind(), "grammar:" + std::to_string(decl.line) + ":" + std::to_string(decl.column) +
                                ": terminal '" + decl.name + "': " + e.what());
    }
    if (dfa.is_accepting(dfa.initial())) {
      SyntaxError(decl.line, decl.column, "terminal '" + decl.name + "' matches the empty string");
    }
    terminals.push_back({decl.name, decl.pattern, std::move(dfa)});
  }
  std::vector<std::string> nonterminals;
  for (const RuleDecl& rule : rules) {
    ids[rule.name] = static_cast<SymbolId>(terminals.size() + nonterminals.size());
    nonterminals.push_back(rule.name);
  }

  std::vector<Production> productions;
  for (const RuleDecl& rule : rules) {
    for (const auto& alternative : rule.alternatives) {
      Production p{ids.at(rule.name), {}};
      for (const GrammarToken& tok : alternative) {
        auto found = ids.find(tok.text);
        if (found == ids.end()) {
          throw Error(ErrorKind::kUndeclaredSymbol, "grammar:" + std::to_string(tok.line) + ":" +
                                                        std::to_string(tok.column) + ": undeclared symbol '" +
                                                        tok.text + "' in rule '" + rule.name + "'");
        }
        p.rhs.push_back(found->second);
      }
      productions.push_back(std::move(p));
    }
  }
  SymbolId start = ids.at(rules.front().name);
  return Grammar(std::move(terminals), std::move(nonterminals), std::move(productions), start);
}

// ---------------------------------------------------------------------------
// LL(1)
// ---------------------------------------------------------------------------

namespace {

bool UnionInto(TerminalSet* into, const TerminalSet& from) {
  bool changed = false;
  for (size_t i = 0; i < from.size(); ++i) {
    if (from[i] && !(*into)[i]) {
      (*into)[i] = true;
      changed = true;
    }
  }
  return changed;
}

void CheckLeftRecursion(const Grammar& g, const std::vector<bool>& nullable) {
  // Edge A -> B when A: α B ... with α nullable.
  const size_t n = g.num_nonterminals();
  std::vector<std::vector<SymbolId>> edges(n);
  for (const Production& p : g.productions()) {
    for (SymbolId s : p.rhs) {
      if (g.is_terminal(s)) break;
      edges[g.nonterminal_index(p.lhs)].push_back(s);
      if (!nullable[s]) break;
    }
  }
  std::vector<int> color(n, 0);  // 0 new, 1 on stack, 2 done
  std::function<void(SymbolId)> visit = [&](SymbolId a) {
    size_t ai = g.nonterminal_index(a);
    color[ai] = 1;
    for (SymbolId b : edges[ai]) {
      size_t bi = g.nonterminal_index(b);
      if (color[bi] == 1) {
        throw Error(ErrorKind::kLl1Conflict, "LL(1) conflict: left recursion through '" + g.name(b) +
                                                 "' (reached from '" + g.name(a) + "')");
      }
      if (color[bi] == 0) visit(b);
    }
    color[ai] = 2;
  };
  for (size_t i = 0; i < n; ++i) {
    if (color[i] == 0) visit(g.nonterminal_symbol(i));
  }
}

}  // namespace

Ll1Table build_ll1_table(const Grammar& g) {
  const size_t t_count = g.num_terminals();
  const size_t n_sym = g.num_symbols();
  Ll1Table table;
  table.num_terminals = t_count;
  table.nullable.assign(n_sym, false);
  table.first.assign(n_sym, TerminalSet(t_count + 1, false));
  table.follow.assign(n_sym, TerminalSet(t_count + 1, false));
  for (size_t a = 0; a < t_count; ++a) table.first[a][a] = true;

  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      if (table.nullable[p.lhs]) continue;
      bool all = true;
      for (SymbolId s : p.rhs) all = all && table.nullable[s];
      if (all) {
        table.nullable[p.lhs] = true;
        changed = true;
      }
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      for (SymbolId s : p.rhs) {
        changed |= UnionInto(&table.first[p.lhs], table.first[s]);
        if (!table.nullable[s]) break;
      }
    }
  }

  table.follow[g.start()][t_count] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      for (size_t i = 0; i < p.rhs.size(); ++i) {
        SymbolId x = p.rhs[i];
        bool rest_nullable = true;
        for (size_t j = i + 1; j < p.rhs.size(); ++j) {
          changed |= UnionInto(&table.follow[x], table.first[p.rhs[j]]);
          if (!table.nullable[p.rhs[j]]) {
            rest_nullable = false;
            break;
          }
        }
        if (rest_nullable) changed |= UnionInto(&table.follow[x], table.follow[p.lhs]);
      }
    }
  }

  CheckLeftRecursion(g, table.nullable);

  table.predict_table.assign(g.num_nonterminals() * (t_count + 1), Ll1Table::kNoProduction);
  for (size_t pid = 0; pid < g.productions().size(); ++pid) {
    const Production& p = g.production(pid);
    TerminalSet lookaheads(t_count + 1, false);
    bool nullable = true;
    for (SymbolId s : p.rhs) {
      UnionInto(&lookaheads, table.first[s]);
      if (!table.nullable[s]) {
        nullable = false;
        break;
      }
    }
    if (nullable) UnionInto(&lookaheads, table.follow[p.lhs]);
    for (size_t a = 0; a <= t_count; ++a) {
      if (!lookaheads[a]) continue;
      int& cell = table.predict_table[g.nonterminal_index(p.lhs) * (t_count + 1) + a];
      if (cell != Ll1Table::kNoProduction) {
        std::string lookahead = a == t_count ? "<end>" : g.name(static_cast<SymbolId>(a));
        throw Error(ErrorKind::kLl1Conflict, "LL(1) conflict on (" + g.name(p.lhs) + ", " + lookahead +
                                                 "): '" + g.production_to_string(cell) + "' vs '" +
                                                 g.production_to_string(pid) + "'");
      }
      cell = static_cast<int>(pid);
    }
  }
  return table;
}

}  // namespace truncproof
