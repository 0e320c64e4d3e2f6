/*!
 *  Copyright (c) 2026 by Contributors
 * \file mask.cc
 * \brief Mask kernels. Each accept sequence contributes one sparse token-map
 * row (the automaton state after the remainder); a token is admitted when its
 * successor's completion cost fits in what is left of the budget.
 */
#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "truncproof/engine.h"
#include "truncproof/error.h"

namespace truncproof {

namespace {

struct ActiveRow {
  std::span<const TokenTransition> row;
  std::span<const Cost> costs;
  int64_t limit;  // admit when costs[q'] < limit
};

constexpr int64_t kNoLimit = INT64_MAX;

int64_t CompletionLimit(const Session& s, Cost d_cost, bool budgeted) {
  if (d_cost == kInfiniteCost) return 0;
  if (!budgeted) return kNoLimit;
  return static_cast<int64_t>(s.budget()) - static_cast<int64_t>(s.generated() + 1) - d_cost;
}

bool Admits(int64_t limit, Cost cost) {
  if (cost == kInfiniteCost) return false;
  return limit == kNoLimit || static_cast<int64_t>(cost) < limit;
}

std::vector<ActiveRow> CollectRows(const Session& s, bool budgeted) {
  const CostTables& tables = s.engine().tables();
  std::vector<ActiveRow> rows;
  for (const AcceptSequence& seq : s.accept_sequences()) {
    int64_t limit = CompletionLimit(s, seq.d_cost, budgeted);
    if (limit <= 0) continue;
    const Dfa& automaton = tables.automaton(seq.key);
    StateId q = automaton.run(automaton.initial(), s.remainder());
    if (q == Dfa::kDead) continue;
    rows.push_back({tables.token_map(seq.key).row(q), tables.costs(seq.key), limit});
  }
  return rows;
}

void SerialKernel(const std::vector<ActiveRow>& rows, std::vector<uint8_t>& bits) {
  for (const ActiveRow& r : rows) {
    for (const TokenTransition& e : r.row) {
      if (Admits(r.limit, r.costs[e.next])) bits[e.token] = 1;
    }
  }
}

// Tokens are split into contiguous blocks; each thread finds its slice of
// every sorted row with a binary search and writes only its own block.
void ParallelKernel(const std::vector<ActiveRow>& rows, std::vector<uint8_t>& bits) {
  const auto vocab_size = static_cast<int64_t>(bits.size());
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  const int64_t blocks = std::max<int64_t>(1, std::min<int64_t>(vocab_size, threads * 4));
#pragma omp parallel for schedule(static)
  for (int64_t b = 0; b < blocks; ++b) {
    const auto lo = static_cast<TokenId>(vocab_size * b / blocks);
    const auto hi = static_cast<TokenId>(vocab_size * (b + 1) / blocks);
    for (const ActiveRow& r : rows) {
      auto it = std::lower_bound(r.row.begin(), r.row.end(), lo,
                                 [](const TokenTransition& e, TokenId t) { return e.token < t; });
      for (; it != r.row.end() && it->token < hi; ++it) {
        if (Admits(r.limit, r.costs[it->next])) bits[it->token] = 1;
      }
    }
  }
}

}  // namespace

Mask Session::grammar_mask(Execution execution, bool budgeted) const {
  Mask mask{std::vector<uint8_t>(engine_->vocab().size(), 0)};
  auto rows = CollectRows(*this, budgeted);
  if (execution == Execution::kParallel) {
    ParallelKernel(rows, mask.bits);
  } else {
    SerialKernel(rows, mask.bits);
  }
  mask.bits[engine_->vocab().eos()] = is_complete() ? 1 : 0;
  return mask;
}

Mask Session::compute_mask_unchecked(Execution execution) const {
  const size_t n = engine_->vocab().size();
  if (finished_ || generated_ >= budget_) return Mask{std::vector<uint8_t>(n, 0)};
  switch (mode_) {
    case MaskMode::kNoConstraint:
      return Mask{std::vector<uint8_t>(n, 1)};
    case MaskMode::kGrammarOnly:
      if (broken_) return Mask{std::vector<uint8_t>(n, 0)};
      return grammar_mask(execution, false);
    case MaskMode::kFull:
      break;
  }
  if (broken_) return Mask{std::vector<uint8_t>(n, 0)};
  return grammar_mask(execution, true);
}

Mask Session::compute_mask(Execution execution) const {
  if (finished_ || generated_ >= budget_) {
    throw Error(ErrorKind::kBudgetExhausted, "budget of " + std::to_string(budget_) + " tokens is used up");
  }
  Mask mask = compute_mask_unchecked(execution);
  if (mask.none()) {
    if (generated_ == 0) {
      throw Error(ErrorKind::kBudgetExhausted,
                  "budget of " + std::to_string(budget_) + " tokens cannot fit any complete output");
    }
    throw Error(ErrorKind::kDeadSession, "mask is empty at step " + std::to_string(generated_));
  }
  return mask;
}

bool Session::admits(TokenId token) const {
  const Vocabulary& vocab = engine_->vocab();
  if (!vocab.valid(token) || finished_ || generated_ >= budget_) return false;
  if (mode_ == MaskMode::kNoConstraint) return true;
  if (broken_) return false;
  if (token == vocab.eos()) return is_complete();
  const bool budgeted = mode_ == MaskMode::kFull;
  const CostTables& tables = engine_->tables();
  for (const AcceptSequence& seq : accept_sequences()) {
    int64_t limit = CompletionLimit(*this, seq.d_cost, budgeted);
    if (limit <= 0) continue;
    const Dfa& automaton = tables.automaton(seq.key);
    StateId q = automaton.run(automaton.initial(), remainder_);
    if (q == Dfa::kDead) continue;
    auto next = tables.token_map(seq.key).lookup(q, token);
    if (next && Admits(limit, tables.costs(seq.key)[*next])) return true;
  }
  return false;
}

std::vector<TokenVerdict> Session::explain() const {
  const Vocabulary& vocab = engine_->vocab();
  const CostTables& tables = engine_->tables();
  const auto sequences = accept_sequences();
  const auto consumed = static_cast<Cost>(generated_ + 1);
  std::vector<StateId> after_remainder(sequences.size());
  for (size_t i = 0; i < sequences.size(); ++i) {
    const Dfa& automaton = tables.automaton(sequences[i].key);
    after_remainder[i] = automaton.run(automaton.initial(), remainder_);
  }
  std::vector<TokenVerdict> out;
  for (size_t t = 0; t < vocab.size(); ++t) {
    TokenVerdict v;
    v.token = static_cast<TokenId>(t);
    v.consumed = consumed;
    v.admitted = admits(v.token);
    if (v.token == vocab.eos()) {
      v.completion = 0;
      v.d_cost = 0;
      out.push_back(v);
      continue;
    }
    Cost best = kInfiniteCost;
    for (size_t i = 0; i < sequences.size(); ++i) {
      if (after_remainder[i] == Dfa::kDead) continue;
      auto next = tables.token_map(sequences[i].key).lookup(after_remainder[i], v.token);
      if (!next) continue;
      Cost c = tables.costs(sequences[i].key)[*next];
      Cost total = add_costs(c, sequences[i].d_cost);
      if (v.sequence < 0 || total < best) {
        best = total;
        v.sequence = static_cast<int>(i);
        v.completion = c;
        v.d_cost = sequences[i].d_cost;
      }
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace truncproof
