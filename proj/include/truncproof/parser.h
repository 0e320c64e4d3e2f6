/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/parser.h
 * \brief Deterministic LL(1) parser over a persistent stack.
 *
 * The stack is an immutable cons list, so forking a parse (beam hypotheses,
 * MCTS children, accept-sequence probes) copies one pointer. Every node caches
 * the summed completion cost and the nullability of itself and everything
 * below it, which makes d_cost an O(1) read of the top node.
 */
#ifndef TRUNCPROOF_PARSER_H_
#define TRUNCPROOF_PARSER_H_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "truncproof/grammar.h"

namespace truncproof {

/*! \brief Token count; kInfiniteCost marks "no completion exists". */
using Cost = uint32_t;
constexpr Cost kInfiniteCost = std::numeric_limits<Cost>::max();

inline Cost add_costs(Cost a, Cost b) {
  if (a == kInfiniteCost || b == kInfiniteCost) return kInfiniteCost;
  uint64_t sum = static_cast<uint64_t>(a) + b;
  return sum >= kInfiniteCost ? kInfiniteCost : static_cast<Cost>(sum);
}

class ParserStack {
 public:
  ParserStack() = default;

  bool empty() const { return top_ == nullptr; }
  SymbolId top() const { return top_->symbol; }
  size_t depth() const { return top_ ? top_->depth : 0; }
  /*! \brief Sum of per-symbol completion costs over the whole stack. */
  Cost cost() const { return top_ ? top_->cost : 0; }
  /*! \brief True when every remaining symbol is a nullable nonterminal. */
  bool derives_empty() const { return top_ ? top_->all_nullable : true; }

  ParserStack pop() const { return ParserStack(top_->below); }
  ParserStack push(SymbolId symbol, Cost symbol_cost, bool nullable) const;

  /*! \brief Symbols from top to bottom. */
  std::vector<SymbolId> symbols() const;

  bool operator==(const ParserStack& other) const;

 private:
  struct Node {
    SymbolId symbol;
    Cost cost;
    bool all_nullable;
    uint32_t depth;
    std::shared_ptr<const Node> below;
  };
  explicit ParserStack(std::shared_ptr<const Node> top) : top_(std::move(top)) {}

  std::shared_ptr<const Node> top_;
};

/*!
 * \brief Stateless LL(1) driver. Holds references to the grammar and table,
 * which must outlive it, and an optional per-symbol cost vector used for the
 * cached stack costs (zero when omitted).
 */
class Ll1Parser {
 public:
  Ll1Parser(const Grammar& grammar, const Ll1Table& table, std::vector<Cost> symbol_costs = {});

  const Grammar& grammar() const { return *grammar_; }
  const Ll1Table& table() const { return *table_; }

  /*! \brief Stack holding only the start symbol. */
  ParserStack initial() const;

  /*!
   * \brief Feed one terminal: pop a matching terminal, or expand the unique
   * predicted production repeatedly until it can be matched. nullopt on
   * failure; never backtracks.
   */
  std::optional<ParserStack> feed(const ParserStack& stack, SymbolId terminal) const;

  /*! \brief Like feed() but throws Error(kParseFailure) naming top and lookahead. */
  ParserStack feed_or_throw(const ParserStack& stack, SymbolId terminal) const;

  /*! \brief True if the input may end here. */
  bool accepts_end(const ParserStack& stack) const { return stack.derives_empty(); }

  Cost symbol_cost(SymbolId s) const { return costs_.empty() ? 0 : costs_[s]; }

 private:
  ParserStack push_symbol(const ParserStack& stack, SymbolId s) const {
    return stack.push(s, symbol_cost(s), table_->nullable[s]);
  }

  const Grammar* grammar_;
  const Ll1Table* table_;
  std::vector<Cost> costs_;
};

}  // namespace truncproof

#endif  // TRUNCPROOF_PARSER_H_
