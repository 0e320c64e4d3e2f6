/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/oracle.h
 * \brief Slow reference implementations for certifying the engine.
 *
 * Nothing here touches the compiled automata, token maps, LL(1) table or
 * cost tables. Terminal patterns are re-parsed and matched with Brzozowski
 * derivatives, and sentences are recognized by a nondeterministic top-down
 * search directly over bytes, so a terminal may end anywhere it matches.
 */
#ifndef TRUNCPROOF_ORACLE_H_
#define TRUNCPROOF_ORACLE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truncproof/grammar.h"
#include "truncproof/parser.h"
#include "truncproof/regex.h"
#include "truncproof/vocabulary.h"

namespace truncproof {

struct OracleBudget {
  size_t max_total_tokens = 8;
  size_t max_vocab = 20;
  size_t max_depth = 64;  // parser stack height cap for membership search
};

/*! \brief Regular expression matcher by derivatives. Not thread-safe. */
class DerivativeMatcher {
 public:
  explicit DerivativeMatcher(std::string_view pattern);
  ~DerivativeMatcher();
  DerivativeMatcher(DerivativeMatcher&&) noexcept;
  DerivativeMatcher& operator=(DerivativeMatcher&&) noexcept;

  bool matches(std::string_view s) const;

  struct Pool;  // defined in oracle.cc

 private:
  std::unique_ptr<Pool> pool_;
  int root_;
};

enum class Membership { kMember, kNotMember, kCapExceeded };

/*!
 * \brief Scannerless recognizer. A configuration is a pending terminal
 * derivative plus a symbol stack; stepping a byte advances every
 * configuration in the set.
 */
class CfgOracle {
 public:
  explicit CfgOracle(const Grammar& g, OracleBudget budget = {});
  ~CfgOracle();

  Membership membership(std::string_view s);

  /*!
   * \brief bits[t] iff some continuation w gives decode(prefix . t . w) in
   * L(G) with |prefix| + 1 + |w| + 1 <= n_max (the last slot is eos). For eos
   * itself: the prefix is a sentence and fits. Throws kInstanceTooLarge.
   */
  std::vector<uint8_t> brute_force_mask(const Vocabulary& vocab, std::span<const TokenId> prefix, size_t n_max);

  /*!
   * \brief Number of maximal-munch lexemes of `text` that overlap bytes
   * [begin, end). A trailing unfinished lexeme counts as one. Returns
   * SIZE_MAX when the text cannot be split into lexemes.
   */
  size_t lexeme_span(std::string_view text, size_t begin, size_t end);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline Membership cfg_membership(const Grammar& g, std::string_view s, size_t depth_cap = 64) {
  OracleBudget budget;
  budget.max_depth = depth_cap;
  return CfgOracle(g, budget).membership(s);
}

std::vector<uint8_t> brute_force_mask(const Grammar& g, const Vocabulary& vocab, std::span<const TokenId> prefix,
                                      size_t n_max, OracleBudget budget = {});

/*!
 * \brief Exact minimum number of tokens driving `dfa` from `from` into an
 * accepting state, by breadth-first search over states reached with
 * Dfa::run. Throws kInstanceTooLarge past states * vocab = 1e8.
 */
Cost brute_force_min_tokens(const Dfa& dfa, const Vocabulary& vocab, StateId from);

/*!
 * \brief D by value iteration over derivation height: round h allows
 * derivation trees of height <= h. Iterates until nothing changes.
 */
std::vector<Cost> brute_force_nonterminal_costs(const Grammar& g, std::span<const Cost> terminal_costs);

}  // namespace truncproof

#endif  // TRUNCPROOF_ORACLE_H_
