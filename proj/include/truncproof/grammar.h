/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/grammar.h
 * \brief Context-free grammars with regex terminals and their LL(1) tables.
 *
 * File format, one declaration per line or semicolon:
 *
 *     # comment
 *     Value: LBRACE Members RBRACE | NUMBER ;
 *     Members: Member Members | ε ;      # `ε` or an empty alternative
 *     NUMBER: /[0-9]+/ ;
 *
 * A declaration whose right-hand side is a single /regex/ is a terminal. The
 * first rule declared is the start symbol. Terminal declaration order is the
 * lexer tie-break priority.
 */
#ifndef TRUNCPROOF_GRAMMAR_H_
#define TRUNCPROOF_GRAMMAR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truncproof/regex.h"

namespace truncproof {

/*! \brief Terminals occupy [0, num_terminals), nonterminals follow. */
using SymbolId = int32_t;
constexpr SymbolId kNoSymbol = -1;

struct Terminal {
  std::string name;
  std::string pattern;
  Dfa dfa;
};

struct Production {
  SymbolId lhs;
  std::vector<SymbolId> rhs;  // empty = ε
};

class Grammar {
 public:
  Grammar(std::vector<Terminal> terminals, std::vector<std::string> nonterminals,
          std::vector<Production> productions, SymbolId start);

  size_t num_terminals() const { return terminals_.size(); }
  size_t num_nonterminals() const { return nonterminal_names_.size(); }
  size_t num_symbols() const { return num_terminals() + num_nonterminals(); }

  bool is_terminal(SymbolId s) const { return s >= 0 && static_cast<size_t>(s) < num_terminals(); }
  bool is_nonterminal(SymbolId s) const {
    return static_cast<size_t>(s) >= num_terminals() && static_cast<size_t>(s) < num_symbols();
  }
  /*! \brief Dense index of a nonterminal in [0, num_nonterminals). */
  size_t nonterminal_index(SymbolId s) const { return static_cast<size_t>(s) - num_terminals(); }
  SymbolId nonterminal_symbol(size_t index) const {
    return static_cast<SymbolId>(num_terminals() + index);
  }

  const Terminal& terminal(SymbolId s) const { return terminals_[s]; }
  std::span<const Terminal> terminals() const { return terminals_; }
  const std::string& name(SymbolId s) const;
  std::optional<SymbolId> find(std::string_view name) const;

  SymbolId start() const { return start_; }
  std::span<const Production> productions() const { return productions_; }
  const Production& production(size_t id) const { return productions_[id]; }
  /*! \brief Production ids whose left-hand side is `nonterminal`. */
  std::span<const int> productions_of(SymbolId nonterminal) const {
    return by_lhs_[nonterminal_index(nonterminal)];
  }

  std::string production_to_string(size_t id) const;

 private:
  std::vector<Terminal> terminals_;
  std::vector<std::string> nonterminal_names_;
  std::vector<Production> productions_;
  std::vector<std::vector<int>> by_lhs_;
  SymbolId start_;
};

/*!
 * \brief Parse a grammar file. Errors carry line:column and use kinds
 * kGrammarSyntax, kUndeclaredSymbol, kDuplicateSymbol, or a regex kind with
 * the terminal name prefixed.
 */
Grammar parse_grammar(std::string_view text);

/*! \brief Terminal bitset sized num_terminals + 1; the extra slot is end of input. */
using TerminalSet = std::vector<bool>;

struct Ll1Table {
  static constexpr int kNoProduction = -1;

  size_t num_terminals = 0;
  std::vector<bool> nullable;          // per symbol
  std::vector<TerminalSet> first;      // per symbol
  std::vector<TerminalSet> follow;     // per symbol; index num_terminals = end of input
  std::vector<int> predict_table;      // nonterminal_index * (T + 1) + lookahead

  SymbolId end_marker() const { return static_cast<SymbolId>(num_terminals); }

  int predict(const Grammar& g, SymbolId nonterminal, SymbolId lookahead) const {
    return predict_table[g.nonterminal_index(nonterminal) * (num_terminals + 1) + lookahead];
  }

  /*! \brief True if terminal b can immediately follow terminal a in some sentential form. */
  bool adjacent(SymbolId a, SymbolId b) const { return follow[a][b]; }
};

/*!
 * \brief FIRST/FOLLOW to fixpoint and the prediction table. Throws
 * Error(kLl1Conflict) naming the nonterminal, lookahead and both productions;
 * left recursion is reported the same way.
 */
Ll1Table build_ll1_table(const Grammar& g);

}  // namespace truncproof

#endif  // TRUNCPROOF_GRAMMAR_H_
