/*!
 *  Copyright (c) 2026 by Contributors
 * \file parser.cc
 */
#include "truncproof/parser.h"

#include "truncproof/error.h"

namespace truncproof {

ParserStack ParserStack::push(SymbolId symbol, Cost symbol_cost, bool nullable) const {
  auto node = std::make_shared<const Node>(Node{symbol, add_costs(symbol_cost, cost()),
                                                nullable && derives_empty(),
                                                static_cast<uint32_t>(depth() + 1), top_});
  return ParserStack(std::move(node));
}

std::vector<SymbolId> ParserStack::symbols() const {
  std::vector<SymbolId> out;
  for (const Node* n = top_.get(); n != nullptr; n = n->below.get()) out.push_back(n->symbol);
  return out;
}

bool ParserStack::operator==(const ParserStack& other) const {
  const Node* a = top_.get();
  const Node* b = other.top_.get();
  while (a != nullptr && b != nullptr) {
    if (a == b) return true;  // shared tail
    if (a->symbol != b->symbol) return false;
    a = a->below.get();
    b = b->below.get();
  }
  return a == b;
}

Ll1Parser::Ll1Parser(const Grammar& grammar, const Ll1Table& table, std::vector<Cost> symbol_costs)
    : grammar_(&grammar), table_(&table), costs_(std::move(symbol_costs)) {
  if (!costs_.empty() && costs_.size() != grammar.num_symbols()) {
    throw Error(ErrorKind::kInvalidArgument, "symbol cost vector does not match the grammar");
  }
}

ParserStack Ll1Parser::initial() const { return push_symbol(ParserStack(), grammar_->start()); }

std::optional<ParserStack> Ll1Parser::feed(const ParserStack& stack, SymbolId terminal) const {
  ParserStack current = stack;
  while (!current.empty()) {
    SymbolId top = current.top();
    if (grammar_->is_terminal(top)) {
      if (top != terminal) return std::nullopt;
      return current.pop();
    }
    int pid = table_->predict(*grammar_, top, terminal);
    if (pid == Ll1Table::kNoProduction) return std::nullopt;
    current = current.pop();
    const auto& rhs = grammar_->production(pid).rhs;
    for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) current = push_symbol(current, *it);
  }
  return std::nullopt;
}

ParserStack Ll1Parser::feed_or_throw(const ParserStack& stack, SymbolId terminal) const {
  auto next = feed(stack, terminal);
  if (!next) {
    std::string top = stack.empty() ? "<empty>" : grammar_->name(stack.top());
    throw Error(ErrorKind::kParseFailure,
                "parse failure: stack top '" + top + "' cannot accept '" + grammar_->name(terminal) + "'");
  }
  return *next;
}

}  // namespace truncproof
