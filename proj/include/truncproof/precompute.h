/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/precompute.h
 * \brief Offline phase: completion-cost tables and sparse token transitions.
 *
 * For every terminal `a` and every ordered pair (a, b) that can be adjacent
 * in a sentential form, an automaton is kept together with
 *   - C[q]: the minimum number of vocabulary tokens that drive q to acceptance,
 *   - a sparse map (q, token) -> successor, holding only live successors.
 * D[A] is the minimum summed terminal cost over derivations of nonterminal A.
 */
#ifndef TRUNCPROOF_PRECOMPUTE_H_
#define TRUNCPROOF_PRECOMPUTE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truncproof/grammar.h"
#include "truncproof/parser.h"
#include "truncproof/regex.h"
#include "truncproof/vocabulary.h"

namespace truncproof {

enum class Execution { kSerial, kParallel };

struct TokenTransition {
  TokenId token;
  StateId next;
  bool operator==(const TokenTransition&) const = default;
};

/*! \brief CSR rows of live (token, successor) pairs per state, sorted by token. */
class TokenMap {
 public:
  TokenMap() = default;
  TokenMap(std::vector<uint32_t> row_offsets, std::vector<TokenTransition> entries);

  size_t num_states() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  size_t num_entries() const { return entries_.size(); }
  std::span<const TokenTransition> row(StateId state) const {
    return {entries_.data() + offsets_[state], entries_.data() + offsets_[state + 1]};
  }
  /*! \brief Successor, or nullopt when the token kills the automaton. */
  std::optional<StateId> lookup(StateId state, TokenId token) const;

  bool operator==(const TokenMap&) const = default;

 private:
  std::vector<uint32_t> offsets_;
  std::vector<TokenTransition> entries_;
};

/*! \brief Walks a byte trie of the vocabulary from every live state. eos is excluded. */
TokenMap compute_token_map(const Dfa& dfa, const Vocabulary& vocab, Execution execution = Execution::kParallel);

/*! \brief Per-state minimum token count to acceptance from an existing token map. */
std::vector<Cost> compute_state_costs(const Dfa& dfa, const TokenMap& map);

/*! \brief Per-state minimum token count to acceptance (kInfiniteCost if none). */
std::vector<Cost> compute_terminal_costs(const Dfa& dfa, const Vocabulary& vocab);

struct PairCosts {
  SymbolId first;
  SymbolId second;
  Dfa automaton;
  std::vector<Cost> costs;
};

/*! \brief Costs for the concatenation automaton of every adjacent ordered pair. */
std::vector<PairCosts> compute_pair_costs(const Grammar& g, const Ll1Table& table, const Vocabulary& vocab,
                                          size_t state_cap = kDefaultStateCap);

/*!
 * \brief D table indexed by nonterminal index. `initial_terminal_costs[a]` is
 * C_a at the initial state. Nonterminals with no realizable derivation get
 * kInfiniteCost and are appended to `unsatisfiable` when given.
 */
std::vector<Cost> compute_nonterminal_costs(const Grammar& g, std::span<const Cost> initial_terminal_costs,
                                            std::vector<SymbolId>* unsatisfiable = nullptr);

struct PrecomputeOptions {
  size_t state_cap = kDefaultStateCap;
  Execution execution = Execution::kParallel;
  uint64_t grammar_hash = 0;
  uint64_t vocab_hash = 0;
};

class CostTables {
 public:
  struct Key {
    SymbolId first;
    SymbolId second;  // kNoSymbol for a single terminal
    bool operator==(const Key&) const = default;
  };

  CostTables() = default;

  size_t num_keys() const { return keys_.size(); }
  size_t num_terminals() const { return num_terminals_; }
  size_t vocab_size() const { return vocab_size_; }
  uint64_t grammar_hash() const { return grammar_hash_; }
  uint64_t vocab_hash() const { return vocab_hash_; }

  static int single_key(SymbolId a) { return a; }
  /*! \brief Key of an adjacent pair, or -1 when the pair was pruned. */
  int pair_key(SymbolId a, SymbolId b) const { return pair_index_[static_cast<size_t>(a) * num_terminals_ + b]; }

  const Key& key(int k) const { return keys_[k]; }
  const Dfa& automaton(int k) const { return automata_[k]; }
  std::span<const Cost> costs(int k) const { return costs_[k]; }
  const TokenMap& token_map(int k) const { return token_maps_[k]; }

  /*! \brief D[A], indexed by nonterminal index. */
  std::span<const Cost> nonterminal_costs() const { return d_; }
  /*! \brief C_a[q_a0] for terminals, D[A] for nonterminals. */
  std::vector<Cost> symbol_costs() const;

  size_t total_states() const;
  size_t total_token_entries() const;
  size_t num_pairs() const { return keys_.size() - num_terminals_; }

  bool operator==(const CostTables&) const = default;

 private:
  friend CostTables build_cost_tables(const Grammar&, const Ll1Table&, const Vocabulary&,
                                      const PrecomputeOptions&);
  friend CostTables deserialize_cache(std::string_view, uint64_t, uint64_t);

  void index_pairs();

  size_t num_terminals_ = 0;
  size_t vocab_size_ = 0;
  uint64_t grammar_hash_ = 0;
  uint64_t vocab_hash_ = 0;
  std::vector<Key> keys_;
  std::vector<Dfa> automata_;
  std::vector<std::vector<Cost>> costs_;
  std::vector<TokenMap> token_maps_;
  std::vector<Cost> d_;
  std::vector<int> pair_index_;
};

CostTables build_cost_tables(const Grammar& g, const Ll1Table& table, const Vocabulary& vocab,
                             const PrecomputeOptions& options = {});

/*! \brief FNV-1a 64-bit; used to key caches to grammar and vocabulary files. */
uint64_t content_hash(std::string_view bytes);

constexpr uint32_t kCacheFormatVersion = 1;

std::string serialize_cache(const CostTables& tables);
/*! \brief Throws kCacheCorrupt, kCacheVersion or kCacheHash. */
CostTables deserialize_cache(std::string_view bytes, uint64_t expected_grammar_hash, uint64_t expected_vocab_hash);

/*! \brief Writes to a temporary sibling, then renames. Throws kIo. */
void save_cache(const CostTables& tables, const std::filesystem::path& path);
CostTables load_cache(const std::filesystem::path& path, uint64_t expected_grammar_hash,
                      uint64_t expected_vocab_hash);

}  // namespace truncproof

#endif  // TRUNCPROOF_PRECOMPUTE_H_
