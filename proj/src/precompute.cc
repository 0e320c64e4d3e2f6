/*!
 *  Copyright (c) 2026 by Contributors
 * \file precompute.cc
 * \brief Token maps via a vocabulary trie, reverse Dijkstra for C, Knuth's
 * algorithm for D, and the binary cache container.
 */
#include "truncproof/precompute.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <utility>

#include "truncproof/error.h"

namespace truncproof {

namespace {

// Edge weight of one vocabulary token in the cost searches.
constexpr Cost kTokenEdgeCost = 1;

struct TrieNode {
  std::vector<std::pair<uint8_t, int>> children;  // sorted by byte
  std::vector<TokenId> tokens;                    // tokens ending here
};

std::vector<TrieNode> BuildTrie(const Vocabulary& vocab) {
  std::vector<TrieNode> trie(1);
  for (size_t id = 0; id < vocab.size(); ++id) {
    if (static_cast<TokenId>(id) == vocab.eos()) continue;
    int node = 0;
    for (char ch : vocab.text(static_cast<TokenId>(id))) {
      auto byte = static_cast<uint8_t>(ch);
      auto& kids = trie[node].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), std::make_pair(byte, 0),
                                 [](const auto& l, const auto& r) { return l.first < r.first; });
      if (it != kids.end() && it->first == byte) {
        node = it->second;
      } else {
        int fresh = static_cast<int>(trie.size());
        kids.insert(it, {byte, fresh});
        trie.emplace_back();
        node = fresh;
      }
    }
    trie[node].tokens.push_back(static_cast<TokenId>(id));
  }
  return trie;
}

std::vector<TokenTransition> WalkTrie(const Dfa& dfa, const std::vector<TrieNode>& trie, StateId start) {
  std::vector<TokenTransition> row;
  if (start == Dfa::kDead) return row;
  std::vector<std::pair<int, StateId>> stack{{0, start}};
  while (!stack.empty()) {
    auto [node, state] = stack.back();
    stack.pop_back();
    for (TokenId t : trie[node].tokens) row.push_back({t, state});
    for (const auto& [byte, child] : trie[node].children) {
      StateId next = dfa.next(state, byte);
      if (next != Dfa::kDead) stack.emplace_back(child, next);
    }
  }
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.token < b.token; });
  return row;
}

TokenMap AssembleRows(std::vector<std::vector<TokenTransition>> rows) {
  std::vector<uint32_t> offsets{0};
  std::vector<TokenTransition> entries;
  for (auto& row : rows) {
    entries.insert(entries.end(), row.begin(), row.end());
    offsets.push_back(static_cast<uint32_t>(entries.size()));
  }
  return TokenMap(std::move(offsets), std::move(entries));
}

TokenMap TokenMapFromTrie(const Dfa& dfa, const std::vector<TrieNode>& trie, Execution execution) {
  const auto n = static_cast<int64_t>(dfa.num_states());
  std::vector<std::vector<TokenTransition>> rows(n);
  if (execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int64_t q = 0; q < n; ++q) rows[q] = WalkTrie(dfa, trie, static_cast<StateId>(q));
  } else {
    for (int64_t q = 0; q < n; ++q) rows[q] = WalkTrie(dfa, trie, static_cast<StateId>(q));
  }
  return AssembleRows(std::move(rows));
}

}  // namespace

TokenMap::TokenMap(std::vector<uint32_t> row_offsets, std::vector<TokenTransition> entries)
    : offsets_(std::move(row_offsets)), entries_(std::move(entries)) {}

std::optional<StateId> TokenMap::lookup(StateId state, TokenId token) const {
  auto r = row(state);
  auto it = std::lower_bound(r.begin(), r.end(), token, [](const TokenTransition& e, TokenId t) { return e.token < t; });
  if (it == r.end() || it->token != token) return std::nullopt;
  return it->next;
}

TokenMap compute_token_map(const Dfa& dfa, const Vocabulary& vocab, Execution execution) {
  return TokenMapFromTrie(dfa, BuildTrie(vocab), execution);
}

std::vector<Cost> compute_state_costs(const Dfa& dfa, const TokenMap& map) {
  const size_t n = dfa.num_states();
  std::vector<std::vector<StateId>> predecessors(n);
  for (size_t q = 0; q < n; ++q) {
    for (const TokenTransition& e : map.row(static_cast<StateId>(q))) {
      predecessors[e.next].push_back(static_cast<StateId>(q));
    }
  }
  std::vector<Cost> dist(n, kInfiniteCost);
  using Item = std::pair<Cost, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  for (size_t q = 0; q < n; ++q) {
    if (dfa.is_accepting(static_cast<StateId>(q))) {
      dist[q] = 0;
      frontier.emplace(0, static_cast<StateId>(q));
    }
  }
  while (!frontier.empty()) {
    auto [d, q] = frontier.top();
    frontier.pop();
    if (d != dist[q]) continue;
    for (StateId p : predecessors[q]) {
      Cost candidate = add_costs(d, kTokenEdgeCost);
      if (candidate < dist[p]) {
        dist[p] = candidate;
        frontier.emplace(candidate, p);
      }
    }
  }
  return dist;
}

std::vector<Cost> compute_terminal_costs(const Dfa& dfa, const Vocabulary& vocab) {
  return compute_state_costs(dfa, compute_token_map(dfa, vocab));
}

std::vector<PairCosts> compute_pair_costs(const Grammar& g, const Ll1Table& table, const Vocabulary& vocab,
                                          size_t state_cap) {
  auto trie = BuildTrie(vocab);
  std::vector<PairCosts> out;
  for (size_t a = 0; a < g.num_terminals(); ++a) {
    for (size_t b = 0; b < g.num_terminals(); ++b) {
      if (!table.adjacent(static_cast<SymbolId>(a), static_cast<SymbolId>(b))) continue;
      PairCosts pair{static_cast<SymbolId>(a), static_cast<SymbolId>(b),
                     dfa_concat(g.terminal(static_cast<SymbolId>(a)).dfa,
                                g.terminal(static_cast<SymbolId>(b)).dfa, state_cap),
                     {}};
      pair.costs = compute_state_costs(pair.automaton, TokenMapFromTrie(pair.automaton, trie, Execution::kSerial));
      out.push_back(std::move(pair));
    }
  }
  return out;
}

std::vector<Cost> compute_nonterminal_costs(const Grammar& g, std::span<const Cost> initial_terminal_costs,
                                            std::vector<SymbolId>* unsatisfiable) {
  // Knuth's generalization of Dijkstra: a production fires once all of its
  // nonterminals are settled; settle nonterminals in cost order.
  const size_t n = g.num_nonterminals();
  const auto productions = g.productions();
  std::vector<Cost> partial(productions.size(), 0);
  std::vector<int> pending(productions.size(), 0);
  std::vector<std::vector<int>> occurrences(n);  // production ids, with multiplicity
  std::vector<Cost> d(n, kInfiniteCost);
  std::vector<bool> settled(n, false);
  using Item = std::pair<Cost, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;

  for (size_t pid = 0; pid < productions.size(); ++pid) {
    for (SymbolId s : productions[pid].rhs) {
      if (g.is_terminal(s)) {
        partial[pid] = add_costs(partial[pid], initial_terminal_costs[s]);
      } else {
        ++pending[pid];
        occurrences[g.nonterminal_index(s)].push_back(static_cast<int>(pid));
      }
    }
    if (pending[pid] == 0 && partial[pid] != kInfiniteCost) {
      frontier.emplace(partial[pid], g.nonterminal_index(productions[pid].lhs));
    }
  }
  while (!frontier.empty()) {
    auto [cost, a] = frontier.top();
    frontier.pop();
    if (settled[a]) continue;
    settled[a] = true;
    d[a] = cost;
    for (int pid : occurrences[a]) {
      partial[pid] = add_costs(partial[pid], cost);
      if (--pending[pid] == 0 && partial[pid] != kInfiniteCost) {
        size_t lhs = g.nonterminal_index(productions[pid].lhs);
        if (!settled[lhs]) frontier.emplace(partial[pid], lhs);
      }
    }
  }
  if (unsatisfiable != nullptr) {
    for (size_t a = 0; a < n; ++a) {
      if (d[a] == kInfiniteCost) unsatisfiable->push_back(g.nonterminal_symbol(a));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// CostTables
// ---------------------------------------------------------------------------

std::vector<Cost> CostTables::symbol_costs() const {
  std::vector<Cost> out(num_terminals_ + d_.size());
  for (size_t a = 0; a < num_terminals_; ++a) out[a] = costs_[a][automata_[a].initial()];
  for (size_t i = 0; i < d_.size(); ++i) out[num_terminals_ + i] = d_[i];
  return out;
}

size_t CostTables::total_states() const {
  size_t total = 0;
  for (const Dfa& dfa : automata_) total += dfa.num_states();
  return total;
}

size_t CostTables::total_token_entries() const {
  size_t total = 0;
  for (const TokenMap& map : token_maps_) total += map.num_entries();
  return total;
}

void CostTables::index_pairs() {
  pair_index_.assign(num_terminals_ * num_terminals_, -1);
  for (size_t k = num_terminals_; k < keys_.size(); ++k) {
    pair_index_[static_cast<size_t>(keys_[k].first) * num_terminals_ + keys_[k].second] = static_cast<int>(k);
  }
}

CostTables build_cost_tables(const Grammar& g, const Ll1Table& table, const Vocabulary& vocab,
                             const PrecomputeOptions& options) {
  CostTables tables;
  tables.num_terminals_ = g.num_terminals();
  tables.vocab_size_ = vocab.size();
  tables.grammar_hash_ = options.grammar_hash;
  tables.vocab_hash_ = options.vocab_hash;

  for (size_t a = 0; a < g.num_terminals(); ++a) {
    tables.keys_.push_back({static_cast<SymbolId>(a), kNoSymbol});
    tables.automata_.push_back(g.terminal(static_cast<SymbolId>(a)).dfa);
  }
  std::vector<CostTables::Key> pairs;
  for (size_t a = 0; a < g.num_terminals(); ++a) {
    for (size_t b = 0; b < g.num_terminals(); ++b) {
      if (table.adjacent(static_cast<SymbolId>(a), static_cast<SymbolId>(b))) {
        pairs.push_back({static_cast<SymbolId>(a), static_cast<SymbolId>(b)});
      }
    }
  }
  const auto num_pairs = static_cast<int64_t>(pairs.size());
  std::vector<Dfa> pair_automata(pairs.size());
  std::vector<std::string> failures(pairs.size());
  auto build_pair = [&](int64_t i) {
    try {
      pair_automata[i] = dfa_concat(g.terminal(pairs[i].first).dfa, g.terminal(pairs[i].second).dfa,
                                    options.state_cap);
    } catch (const Error& e) {
      failures[i] = std::string("pair (") + g.name(pairs[i].first) + ", " + g.name(pairs[i].second) + "): " + e.what();
    }
  };
  if (options.execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < num_pairs; ++i) build_pair(i);
  } else {
    for (int64_t i = 0; i < num_pairs; ++i) build_pair(i);
  }
  for (const std::string& failure : failures) {
    if (!failure.empty()) throw Error(ErrorKind::kStateCap, failure);
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    tables.keys_.push_back(pairs[i]);
    tables.automata_.push_back(std::move(pair_automata[i]));
  }

  const auto trie = BuildTrie(vocab);
  const auto num_keys = static_cast<int64_t>(tables.keys_.size());
  tables.token_maps_.resize(num_keys);
  tables.costs_.resize(num_keys);
  auto build_key = [&](int64_t k) {
    tables.token_maps_[k] = TokenMapFromTrie(tables.automata_[k], trie, Execution::kSerial);
    tables.costs_[k] = compute_state_costs(tables.automata_[k], tables.token_maps_[k]);
  };
  if (options.execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int64_t k = 0; k < num_keys; ++k) build_key(k);
  } else {
    for (int64_t k = 0; k < num_keys; ++k) build_key(k);
  }

  std::vector<Cost> initial_costs(g.num_terminals());
  for (size_t a = 0; a < g.num_terminals(); ++a) initial_costs[a] = tables.costs_[a][tables.automata_[a].initial()];
  tables.d_ = compute_nonterminal_costs(g, initial_costs);
  tables.index_pairs();
  return tables;
}

// ---------------------------------------------------------------------------
// Cache container
// ---------------------------------------------------------------------------

uint64_t content_hash(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr char kMagic[8] = {'T', 'P', 'C', 'A', 'C', 'H', 'E', '\0'};

class Writer {
 public:
  void u8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* data, size_t n) { out_.append(static_cast<const char*>(data), n); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  uint8_t u8() {
    Need(1);
    return static_cast<uint8_t>(in_[pos_++]);
  }
  uint32_t u32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string_view take(size_t n) {
    Need(n);
    auto view = in_.substr(pos_, n);
    pos_ += n;
    return view;
  }
  size_t position() const { return pos_; }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorKind::kCacheCorrupt, "cache file truncated");
  }
  std::string_view in_;
  size_t pos_ = 0;
};

[[noreturn]] void Corrupt(const std::string& what) { throw Error(ErrorKind::kCacheCorrupt, "corrupt cache: " + what); }

}  // namespace

std::string serialize_cache(const CostTables& tables) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCacheFormatVersion);
  w.u64(tables.grammar_hash());
  w.u64(tables.vocab_hash());
  w.u32(static_cast<uint32_t>(tables.num_terminals()));
  w.u32(static_cast<uint32_t>(tables.nonterminal_costs().size()));
  w.u32(static_cast<uint32_t>(tables.vocab_size()));
  w.u32(static_cast<uint32_t>(tables.num_keys()));

  // Automata.
  for (size_t k = 0; k < tables.num_keys(); ++k) {
    const auto& key = tables.key(static_cast<int>(k));
    const Dfa& dfa = tables.automaton(static_cast<int>(k));
    w.u32(static_cast<uint32_t>(key.first));
    w.u32(static_cast<uint32_t>(key.second));
    w.u32(static_cast<uint32_t>(dfa.num_states()));
    w.u32(dfa.initial());
    for (uint8_t a : dfa.accepting()) w.u8(a);
    for (StateId t : dfa.transitions()) w.u32(t);
  }
  // C tables.
  for (size_t k = 0; k < tables.num_keys(); ++k) {
    for (Cost c : tables.costs(static_cast<int>(k))) w.u32(c);
  }
  // D table.
  for (Cost d : tables.nonterminal_costs()) w.u32(d);
  // Token map as sorted (key, state, token, successor) runs.
  uint64_t entries = tables.total_token_entries();
  w.u64(entries);
  for (size_t k = 0; k < tables.num_keys(); ++k) {
    const TokenMap& map = tables.token_map(static_cast<int>(k));
    for (size_t q = 0; q < map.num_states(); ++q) {
      for (const TokenTransition& e : map.row(static_cast<StateId>(q))) {
        w.u32(static_cast<uint32_t>(k));
        w.u32(static_cast<uint32_t>(q));
        w.u32(static_cast<uint32_t>(e.token));
        w.u32(e.next);
      }
    }
  }
  w.u64(content_hash(w.str()));
  return std::move(w.str());
}

CostTables deserialize_cache(std::string_view bytes, uint64_t expected_grammar_hash, uint64_t expected_vocab_hash) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) Corrupt("bad magic");
  uint32_t version = r.u32();
  if (version != kCacheFormatVersion) {
    throw Error(ErrorKind::kCacheVersion, "cache format version " + std::to_string(version) + ", this build reads " +
                                              std::to_string(kCacheFormatVersion));
  }
  if (bytes.size() < 8) Corrupt("missing checksum");
  uint64_t stored_checksum = 0;
  for (int i = 0; i < 8; ++i) {
    stored_checksum |= static_cast<uint64_t>(static_cast<uint8_t>(bytes[bytes.size() - 8 + i])) << (8 * i);
  }
  if (stored_checksum != content_hash(bytes.substr(0, bytes.size() - 8))) Corrupt("checksum mismatch");

  CostTables tables;
  tables.grammar_hash_ = r.u64();
  tables.vocab_hash_ = r.u64();
  if (tables.grammar_hash_ != expected_grammar_hash) {
    throw Error(ErrorKind::kCacheHash, "cache was built from a different grammar file");
  }
  if (tables.vocab_hash_ != expected_vocab_hash) {
    throw Error(ErrorKind::kCacheHash, "cache was built from a different vocabulary file");
  }
  tables.num_terminals_ = r.u32();
  const uint32_t num_nonterminals = r.u32();
  tables.vocab_size_ = r.u32();
  const uint32_t num_keys = r.u32();
  if (num_keys < tables.num_terminals_) Corrupt("fewer automata than terminals");

  for (uint32_t k = 0; k < num_keys; ++k) {
    CostTables::Key key{static_cast<SymbolId>(r.u32()), static_cast<SymbolId>(r.u32())};
    const uint32_t n = r.u32();
    const uint32_t initial = r.u32();
    if (n == 0 || n > r.remaining()) Corrupt("bad automaton size");
    bool pair_ok = key.second >= 0 && static_cast<size_t>(key.second) < tables.num_terminals_;
    bool single_ok = key.second == kNoSymbol && key.first == static_cast<SymbolId>(k);
    if (key.first < 0 || static_cast<size_t>(key.first) >= tables.num_terminals_ ||
        (k < tables.num_terminals_ ? !single_ok : !pair_ok)) {
      Corrupt("bad automaton key");
    }
    std::vector<uint8_t> accepting(n);
    for (auto& a : accepting) a = r.u8();
    std::vector<StateId> transitions(static_cast<size_t>(n) * Dfa::kAlphabetSize);
    for (auto& t : transitions) t = r.u32();
    try {
      tables.automata_.emplace_back(std::move(transitions), std::move(accepting), initial);
    } catch (const Error& e) {
      Corrupt(e.what());
    }
    tables.keys_.push_back(key);
  }
  for (uint32_t k = 0; k < num_keys; ++k) {
    std::vector<Cost> costs(tables.automata_[k].num_states());
    for (auto& c : costs) c = r.u32();
    tables.costs_.push_back(std::move(costs));
  }
  tables.d_.resize(num_nonterminals);
  for (auto& d : tables.d_) d = r.u32();

  const uint64_t entries = r.u64();
  if (entries > r.remaining() / 16) Corrupt("token map overruns file");
  std::vector<std::vector<std::vector<TokenTransition>>> rows(num_keys);
  for (uint32_t k = 0; k < num_keys; ++k) rows[k].resize(tables.automata_[k].num_states());
  uint64_t previous = 0;
  for (uint64_t i = 0; i < entries; ++i) {
    uint32_t k = r.u32();
    uint32_t q = r.u32();
    uint32_t token = r.u32();
    uint32_t next = r.u32();
    if (k >= num_keys || q >= rows[k].size() || token >= tables.vocab_size_ ||
        next >= tables.automata_[k].num_states()) {
      Corrupt("token map entry out of range");
    }
    uint64_t order = (static_cast<uint64_t>(k) << 40) | (static_cast<uint64_t>(q) << 20) | token;
    if (i > 0 && order <= previous) Corrupt("token map not sorted");
    previous = order;
    rows[k][q].push_back({static_cast<TokenId>(token), next});
  }
  if (r.remaining() != 8) Corrupt("trailing bytes");
  for (auto& key_rows : rows) tables.token_maps_.push_back(AssembleRows(std::move(key_rows)));
  tables.index_pairs();
  return tables;
}

void save_cache(const CostTables& tables, const std::filesystem::path& path) {
  const std::string bytes = serialize_cache(tables);
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write cache " + temp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "short write to " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorKind::kIo, "cannot move cache into place at " + path.string());
  }
}

CostTables load_cache(const std::filesystem::path& path, uint64_t expected_grammar_hash,
                      uint64_t expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read cache " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_cache(buffer.str(), expected_grammar_hash, expected_vocab_hash);
}

}  // namespace truncproof
