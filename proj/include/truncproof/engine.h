/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/engine.h
 * \brief Per-session lexer, parser and budget-aware vocabulary mask.
 *
 * A Session tracks the committed terminals, the unlexed remainder with one
 * automaton state per terminal, and the LL(1) stack. At every step the mask
 * admits token t when, for some accept sequence (a) or (a, b),
 *
 *     q' = run(M_ab, q_ab0, r . t) is live  and  (i + 1) + C_ab[q'] + d_cost < N_max
 *
 * where i counts tokens already generated and d_cost sums completion costs of
 * everything left on the stack after feeding the sequence. eos is admitted
 * exactly when the output so far is a complete sentence.
 */
#ifndef TRUNCPROOF_ENGINE_H_
#define TRUNCPROOF_ENGINE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truncproof/grammar.h"
#include "truncproof/parser.h"
#include "truncproof/precompute.h"
#include "truncproof/vocabulary.h"

namespace truncproof {

enum class MaskMode {
  kFull,          // grammar and budget
  kGrammarOnly,   // grammar only; budget term dropped
  kNoConstraint,  // every token admitted
};

const char* MaskModeName(MaskMode mode);
std::optional<MaskMode> ParseMaskMode(std::string_view name);

/*!
 * \brief Immutable bundle shared by all sessions. Not copyable or movable
 * because the parser points into the grammar and table it owns.
 */
class Engine {
 public:
  /*!
   * \brief Throws kCacheHash when the tables were built for a different
   * grammar or vocabulary than the given source hashes, and
   * kInvalidArgument when their shapes disagree.
   */
  Engine(Grammar grammar, Vocabulary vocab, CostTables tables, uint64_t grammar_hash, uint64_t vocab_hash);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /*! \brief Builds the LL(1) table and cost tables in place. */
  static std::shared_ptr<const Engine> build(Grammar grammar, Vocabulary vocab, PrecomputeOptions options = {});
  /*! \brief Parses grammar text and builds everything, hashing the given sources. */
  static std::shared_ptr<const Engine> from_sources(std::string_view grammar_text, std::string_view vocab_json,
                                                    PrecomputeOptions options = {});

  const Grammar& grammar() const { return grammar_; }
  const Ll1Table& table() const { return table_; }
  const Vocabulary& vocab() const { return vocab_; }
  const CostTables& tables() const { return tables_; }
  const Ll1Parser& parser() const { return parser_; }
  uint64_t grammar_hash() const { return grammar_hash_; }
  uint64_t vocab_hash() const { return vocab_hash_; }

 private:
  Grammar grammar_;
  Ll1Table table_;
  Vocabulary vocab_;
  CostTables tables_;
  uint64_t grammar_hash_;
  uint64_t vocab_hash_;
  Ll1Parser parser_;
};

struct AcceptSequence {
  SymbolId first = kNoSymbol;
  SymbolId second = kNoSymbol;  // kNoSymbol for a one-terminal sequence
  int key = -1;                 // CostTables key of (first) or (first, second)
  ParserStack stack;            // after feeding the sequence
  Cost d_cost = 0;

  size_t length() const { return second == kNoSymbol ? 1 : 2; }
};

/*! \brief One byte per vocabulary entry, so parallel writers never share a word. */
struct Mask {
  std::vector<uint8_t> bits;

  bool operator[](TokenId t) const { return bits[t] != 0; }
  size_t count() const;
  bool none() const { return count() == 0; }
  bool operator==(const Mask&) const = default;
};

/*! \brief Why a token was admitted or denied, for the debugging view. */
struct TokenVerdict {
  TokenId token = -1;
  bool admitted = false;
  int sequence = -1;  // index into the accept sequences; -1 when no automaton survives
  Cost consumed = 0;  // i + 1
  Cost completion = kInfiniteCost;  // C_ab[q']
  Cost d_cost = kInfiniteCost;
};

class Session {
 public:
  /*! \brief Fresh session: empty prefix, stack (S). Throws kInvalidArgument for budget < 1. */
  static Session create(std::shared_ptr<const Engine> engine, size_t budget, MaskMode mode = MaskMode::kFull);

  /*!
   * \brief Batch construction: lexes decode(tokens) in one pass. Equal to
   * calling advance() token by token whenever every token was admitted.
   */
  static Session replay(std::shared_ptr<const Engine> engine, size_t budget, std::span<const TokenId> tokens,
                        MaskMode mode = MaskMode::kFull);

  const Engine& engine() const { return *engine_; }
  const std::shared_ptr<const Engine>& engine_ptr() const { return engine_; }
  size_t budget() const { return budget_; }
  MaskMode mode() const { return mode_; }
  size_t generated() const { return generated_; }
  bool finished() const { return finished_; }
  /*! \brief Lexing or parsing failed; only reachable without the grammar mask. */
  bool broken() const { return broken_; }

  std::vector<SymbolId> terminals() const;
  const std::string& remainder() const { return remainder_; }
  std::span<const StateId> lexer_states() const { return lexer_states_; }
  const ParserStack& stack() const { return stack_; }

  /*! \brief Feed one terminal to a copy of the stack. Throws kParseFailure. */
  ParserStack parser_feed(SymbolId terminal) const;

  /*! \brief Every (a) and (a, b) the parser accepts from the current stack. */
  std::span<const AcceptSequence> accept_sequences() const;

  /*!
   * \brief The step mask. Throws kBudgetExhausted once the budget is spent
   * (or when a fresh session admits nothing) and kDeadSession if an all-false
   * mask appears later.
   */
  Mask compute_mask(Execution execution = Execution::kSerial) const;
  /*! \brief Same bits without the error checks. */
  Mask compute_mask_unchecked(Execution execution = Execution::kSerial) const;
  /*! \brief Admission test for a single token. */
  bool admits(TokenId token) const;
  /*! \brief Per-token terms of the budget check, best accept sequence first. */
  std::vector<TokenVerdict> explain() const;

  /*! \brief Consume one token. Throws kMaskedTokenRejected if the mask denies it. */
  void advance(TokenId token);
  /*!
   * \brief Consume one token without consulting the mask. Lexing or parsing
   * failures mark the session broken instead of throwing.
   */
  void advance_unchecked(TokenId token);

  /*! \brief Stack derives ε and the remainder closes into a terminal the parser accepts. */
  bool is_complete() const;

  bool operator==(const Session& other) const;

 private:
  struct TerminalNode {
    SymbolId terminal;
    std::shared_ptr<const TerminalNode> below;
  };

  Session(std::shared_ptr<const Engine> engine, size_t budget, MaskMode mode);

  void feed_text(std::string_view text);
  bool feed_byte(uint8_t byte);
  bool extend_remainder(uint8_t byte);
  bool commit_remainder();
  void reset_lexer();
  void invalidate() { sequences_.reset(); }
  Mask grammar_mask(Execution execution, bool budgeted) const;
  std::optional<SymbolId> closing_terminal() const;

  std::shared_ptr<const Engine> engine_;
  size_t budget_ = 0;
  MaskMode mode_ = MaskMode::kFull;
  size_t generated_ = 0;
  bool finished_ = false;
  bool broken_ = false;

  std::shared_ptr<const TerminalNode> terminals_;
  size_t num_terminals_ = 0;
  std::string remainder_;
  std::vector<StateId> lexer_states_;
  ParserStack stack_;

  mutable std::shared_ptr<const std::vector<AcceptSequence>> sequences_;
};

}  // namespace truncproof

#endif  // TRUNCPROOF_ENGINE_H_
