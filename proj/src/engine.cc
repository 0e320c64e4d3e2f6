/*!
 *  Copyright (c) 2026 by Contributors
 * \file engine.cc
 * \brief Session lexer and parser bookkeeping. The mask kernels live in mask.cc.
 */
#include "truncproof/engine.h"

#include <utility>

#include "truncproof/error.h"

namespace truncproof {

const char* MaskModeName(MaskMode mode) {
  switch (mode) {
    case MaskMode::kFull:
      return "full";
    case MaskMode::kGrammarOnly:
      return "grammar-only";
    case MaskMode::kNoConstraint:
      return "no-constraint";
  }
  return "?";
}

std::optional<MaskMode> ParseMaskMode(std::string_view name) {
  if (name == "full") return MaskMode::kFull;
  if (name == "grammar-only") return MaskMode::kGrammarOnly;
  if (name == "no-constraint") return MaskMode::kNoConstraint;
  return std::nullopt;
}

Engine::Engine(Grammar grammar, Vocabulary vocab, CostTables tables, uint64_t grammar_hash, uint64_t vocab_hash)
    : grammar_(std::move(grammar)),
      table_(build_ll1_table(grammar_)),
      vocab_(std::move(vocab)),
      tables_(std::move(tables)),
      grammar_hash_(grammar_hash),
      vocab_hash_(vocab_hash),
      parser_(grammar_, table_, tables_.symbol_costs()) {
  if (tables_.grammar_hash() != grammar_hash_) {
    throw Error(ErrorKind::kCacheHash, "cost tables were built from a different grammar");
  }
  if (tables_.vocab_hash() != vocab_hash_) {
    throw Error(ErrorKind::kCacheHash, "cost tables were built from a different vocabulary");
  }
  if (tables_.num_terminals() != grammar_.num_terminals() ||
      tables_.nonterminal_costs().size() != grammar_.num_nonterminals() || tables_.vocab_size() != vocab_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "cost tables do not match the grammar or vocabulary shape");
  }
}

std::shared_ptr<const Engine> Engine::build(Grammar grammar, Vocabulary vocab, PrecomputeOptions options) {
  CostTables tables = build_cost_tables(grammar, build_ll1_table(grammar), vocab, options);
  return std::make_shared<const Engine>(std::move(grammar), std::move(vocab), std::move(tables),
                                        options.grammar_hash, options.vocab_hash);
}

std::shared_ptr<const Engine> Engine::from_sources(std::string_view grammar_text, std::string_view vocab_json,
                                                   PrecomputeOptions options) {
  options.grammar_hash = content_hash(grammar_text);
  options.vocab_hash = content_hash(vocab_json);
  return build(parse_grammar(grammar_text), parse_vocabulary(vocab_json), options);
}

size_t Mask::count() const {
  size_t n = 0;
  for (uint8_t b : bits) n += b;
  return n;
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

Session::Session(std::shared_ptr<const Engine> engine, size_t budget, MaskMode mode)
    : engine_(std::move(engine)), budget_(budget), mode_(mode) {
  stack_ = engine_->parser().initial();
  reset_lexer();
}

Session Session::create(std::shared_ptr<const Engine> engine, size_t budget, MaskMode mode) {
  if (engine == nullptr) throw Error(ErrorKind::kInvalidArgument, "session needs an engine");
  if (budget < 1) throw Error(ErrorKind::kInvalidArgument, "token budget must be at least 1");
  return Session(std::move(engine), budget, mode);
}

Session Session::replay(std::shared_ptr<const Engine> engine, size_t budget, std::span<const TokenId> tokens,
                        MaskMode mode) {
  Session s = create(std::move(engine), budget, mode);
  const Vocabulary& vocab = s.engine().vocab();
  std::string text;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!vocab.valid(tokens[i])) throw Error(ErrorKind::kUnknownToken, "unknown token id " + std::to_string(tokens[i]));
    if (tokens[i] == vocab.eos()) {
      if (i + 1 != tokens.size()) throw Error(ErrorKind::kInvalidArgument, "eos must be the last token");
      s.finished_ = true;
    } else {
      text += vocab.text(tokens[i]);
    }
  }
  s.feed_text(text);
  s.generated_ = tokens.size();
  return s;
}

std::vector<SymbolId> Session::terminals() const {
  std::vector<SymbolId> out(num_terminals_);
  size_t i = num_terminals_;
  for (const TerminalNode* n = terminals_.get(); n != nullptr; n = n->below.get()) out[--i] = n->terminal;
  return out;
}

ParserStack Session::parser_feed(SymbolId terminal) const {
  if (!engine_->grammar().is_terminal(terminal)) {
    throw Error(ErrorKind::kInvalidArgument, "parser_feed expects a terminal");
  }
  return engine_->parser().feed_or_throw(stack_, terminal);
}

std::span<const AcceptSequence> Session::accept_sequences() const {
  if (sequences_) return *sequences_;
  const Grammar& g = engine_->grammar();
  const Ll1Parser& parser = engine_->parser();
  const CostTables& tables = engine_->tables();
  auto out = std::make_shared<std::vector<AcceptSequence>>();
  for (size_t a = 0; a < g.num_terminals(); ++a) {
    auto first = static_cast<SymbolId>(a);
    auto after_a = parser.feed(stack_, first);
    if (!after_a) continue;
    out->push_back({first, kNoSymbol, CostTables::single_key(first), *after_a, after_a->cost()});
    for (size_t b = 0; b < g.num_terminals(); ++b) {
      auto second = static_cast<SymbolId>(b);
      int key = tables.pair_key(first, second);
      if (key < 0) continue;
      auto after_b = parser.feed(*after_a, second);
      if (!after_b) continue;
      out->push_back({first, second, key, *after_b, after_b->cost()});
    }
  }
  sequences_ = std::move(out);
  return *sequences_;
}

void Session::advance(TokenId token) {
  if (!engine_->vocab().valid(token)) {
    throw Error(ErrorKind::kUnknownToken, "unknown token id " + std::to_string(token));
  }
  if (finished_ || generated_ >= budget_) {
    throw Error(ErrorKind::kBudgetExhausted, "no tokens left in the budget of " + std::to_string(budget_));
  }
  if (!admits(token)) {
    throw Error(ErrorKind::kMaskedTokenRejected,
                "token " + std::to_string(token) + " ('" + escape_token(engine_->vocab().text(token)) +
                    "') is masked at step " + std::to_string(generated_));
  }
  advance_unchecked(token);
}

void Session::advance_unchecked(TokenId token) {
  const Vocabulary& vocab = engine_->vocab();
  if (!vocab.valid(token)) throw Error(ErrorKind::kUnknownToken, "unknown token id " + std::to_string(token));
  if (finished_) throw Error(ErrorKind::kInvalidArgument, "session already ended with eos");
  ++generated_;
  if (token == vocab.eos()) {
    finished_ = true;
    return;
  }
  feed_text(vocab.text(token));
}

bool Session::is_complete() const {
  if (broken_) return false;
  if (remainder_.empty()) return stack_.derives_empty();
  auto closing = closing_terminal();
  if (!closing) return false;
  auto after = engine_->parser().feed(stack_, *closing);
  return after && after->derives_empty();
}

bool Session::operator==(const Session& other) const {
  if (budget_ != other.budget_ || mode_ != other.mode_ || generated_ != other.generated_ ||
      finished_ != other.finished_ || broken_ != other.broken_ || num_terminals_ != other.num_terminals_ ||
      remainder_ != other.remainder_ || lexer_states_ != other.lexer_states_ || !(stack_ == other.stack_)) {
    return false;
  }
  const TerminalNode* a = terminals_.get();
  const TerminalNode* b = other.terminals_.get();
  for (; a != nullptr && b != nullptr && a != b; a = a->below.get(), b = b->below.get()) {
    if (a->terminal != b->terminal) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lexer: maximal munch, one byte at a time
// ---------------------------------------------------------------------------

void Session::reset_lexer() {
  const Grammar& g = engine_->grammar();
  remainder_.clear();
  lexer_states_.resize(g.num_terminals());
  for (size_t a = 0; a < g.num_terminals(); ++a) lexer_states_[a] = g.terminal(static_cast<SymbolId>(a)).dfa.initial();
}

void Session::feed_text(std::string_view text) {
  if (broken_) return;
  for (char c : text) {
    if (!feed_byte(static_cast<uint8_t>(c))) {
      broken_ = true;
      invalidate();
      return;
    }
  }
}

std::optional<SymbolId> Session::closing_terminal() const {
  const Grammar& g = engine_->grammar();
  for (size_t a = 0; a < g.num_terminals(); ++a) {
    if (g.terminal(static_cast<SymbolId>(a)).dfa.is_accepting(lexer_states_[a])) return static_cast<SymbolId>(a);
  }
  return std::nullopt;
}

bool Session::commit_remainder() {
  auto terminal = closing_terminal();
  if (!terminal) return false;
  auto next = engine_->parser().feed(stack_, *terminal);
  if (!next) return false;
  stack_ = std::move(*next);
  terminals_ = std::make_shared<const TerminalNode>(TerminalNode{*terminal, terminals_});
  ++num_terminals_;
  invalidate();
  reset_lexer();
  return true;
}

bool Session::extend_remainder(uint8_t byte) {
  const Grammar& g = engine_->grammar();
  std::vector<StateId> next(lexer_states_.size());
  bool any_live = false;
  for (size_t a = 0; a < next.size(); ++a) {
    next[a] = g.terminal(static_cast<SymbolId>(a)).dfa.next(lexer_states_[a], byte);
    any_live = any_live || next[a] != Dfa::kDead;
  }
  if (!any_live) return false;
  lexer_states_ = std::move(next);
  remainder_.push_back(static_cast<char>(byte));
  return true;
}

bool Session::feed_byte(uint8_t byte) {
  if (!extend_remainder(byte)) {
    // The byte ends the current lexeme and starts a new one.
    if (remainder_.empty() || !commit_remainder() || !extend_remainder(byte)) return false;
  }
  const Grammar& g = engine_->grammar();
  for (size_t a = 0; a < lexer_states_.size(); ++a) {
    if (g.terminal(static_cast<SymbolId>(a)).dfa.can_extend(lexer_states_[a])) return true;
  }
  // Nothing can grow further: the lexeme is final now.
  return commit_remainder();
}

}  // namespace truncproof
