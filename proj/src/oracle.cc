/*!
 *  Copyright (c) 2026 by Contributors
 * \file oracle.cc
 * \brief Reference implementations. Deliberately naive; see oracle.h.
 */
#include "truncproof/oracle.h"

#include <algorithm>
#include <bitset>
#include <deque>
#include <map>
#include <unordered_map>

#include "truncproof/error.h"

namespace truncproof {

// ---------------------------------------------------------------------------
// Hash-consed regular expressions with derivatives
// ---------------------------------------------------------------------------

struct DerivativeMatcher::Pool {
  enum Kind : uint8_t { kNothing, kEpsilon, kBytes, kConcat, kAlt, kStar };
  struct Node {
    Kind kind;
    std::bitset<256> bytes;
    std::vector<int> kids;  // kConcat: 2, kAlt: sorted set, kStar: 1
    bool nullable;
  };

  std::vector<Node> nodes;
  std::map<std::tuple<int, std::string, std::vector<int>>, int> index;
  std::unordered_map<int64_t, int> derivative_memo;

  Pool() {
    Intern({kNothing, {}, {}, false});
    Intern({kEpsilon, {}, {}, true});
  }
  static constexpr int kNothingId = 0;
  static constexpr int kEpsilonId = 1;

  int Intern(Node n) {
    auto key = std::make_tuple(static_cast<int>(n.kind), n.bytes.to_string(), n.kids);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    nodes.push_back(std::move(n));
    int id = static_cast<int>(nodes.size()) - 1;
    index.emplace(std::move(key), id);
    return id;
  }

  int Bytes(const std::bitset<256>& set) { return set.none() ? kNothingId : Intern({kBytes, set, {}, false}); }

  int Concat(int a, int b) {
    if (a == kNothingId || b == kNothingId) return kNothingId;
    if (a == kEpsilonId) return b;
    if (b == kEpsilonId) return a;
    if (nodes[a].kind == kConcat) return Concat(nodes[a].kids[0], Concat(nodes[a].kids[1], b));
    return Intern({kConcat, {}, {a, b}, nodes[a].nullable && nodes[b].nullable});
  }

  int Alt(std::vector<int> parts) {
    std::vector<int> flat;
    for (int p : parts) {
      if (p == kNothingId) continue;
      if (nodes[p].kind == kAlt) {
        flat.insert(flat.end(), nodes[p].kids.begin(), nodes[p].kids.end());
      } else {
        flat.push_back(p);
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return kNothingId;
    if (flat.size() == 1) return flat[0];
    bool nullable = false;
    for (int p : flat) nullable = nullable || nodes[p].nullable;
    return Intern({kAlt, {}, flat, nullable});
  }

  int Star(int a) {
    if (a == kNothingId || a == kEpsilonId) return kEpsilonId;
    if (nodes[a].kind == kStar) return a;
    return Intern({kStar, {}, {a}, true});
  }

  int Derive(int r, uint8_t c) {
    const int64_t key = static_cast<int64_t>(r) * 256 + c;
    auto it = derivative_memo.find(key);
    if (it != derivative_memo.end()) return it->second;
    int out = kNothingId;
    const Node n = nodes[r];
    switch (n.kind) {
      case kNothing:
      case kEpsilon:
        break;
      case kBytes:
        out = n.bytes.test(c) ? kEpsilonId : kNothingId;
        break;
      case kConcat: {
        int left = Concat(Derive(n.kids[0], c), n.kids[1]);
        out = nodes[n.kids[0]].nullable ? Alt({left, Derive(n.kids[1], c)}) : left;
        break;
      }
      case kAlt: {
        std::vector<int> parts;
        for (int k : n.kids) parts.push_back(Derive(k, c));
        out = Alt(parts);
        break;
      }
      case kStar:
        out = Concat(Derive(n.kids[0], c), r);
        break;
    }
    derivative_memo.emplace(key, out);
    return out;
  }

  bool Nullable(int r) const { return nodes[r].nullable; }
};

namespace {

using Pool = DerivativeMatcher::Pool;

// Recursive-descent reader for the pattern subset the grammar files use.
class PatternReader {
 public:
  PatternReader(std::string_view p, Pool& pool) : p_(p), pool_(pool) {}

  int Read() {
    int r = Alternation();
    if (i_ != p_.size()) Fail();
    return r;
  }

 private:
  [[noreturn]] void Fail() const {
    throw Error(ErrorKind::kUnsupportedRegex, "oracle cannot read pattern /" + std::string(p_) + "/");
  }
  bool More() const { return i_ < p_.size(); }
  char Peek() const { return p_[i_]; }

  int Alternation() {
    std::vector<int> parts{Sequence()};
    while (More() && Peek() == '|') {
      ++i_;
      parts.push_back(Sequence());
    }
    return pool_.Alt(parts);
  }

  int Sequence() {
    int r = Pool::kEpsilonId;
    while (More() && Peek() != '|' && Peek() != ')') r = pool_.Concat(r, Quantified());
    return r;
  }

  int Quantified() {
    int atom = Atom();
    while (More()) {
      char c = Peek();
      if (c == '*') {
        ++i_;
        atom = pool_.Star(atom);
      } else if (c == '+') {
        ++i_;
        atom = pool_.Concat(atom, pool_.Star(atom));
      } else if (c == '?') {
        ++i_;
        atom = pool_.Alt({atom, Pool::kEpsilonId});
      } else if (c == '{') {
        ++i_;
        int lo = Number();
        int hi = lo;
        if (More() && Peek() == ',') {
          ++i_;
          hi = (More() && Peek() == '}') ? -1 : Number();
        }
        if (!More() || Peek() != '}') Fail();
        ++i_;
        int r = Pool::kEpsilonId;
        for (int k = 0; k < lo; ++k) r = pool_.Concat(r, atom);
        if (hi < 0) {
          r = pool_.Concat(r, pool_.Star(atom));
        } else {
          int optional = Pool::kEpsilonId;
          for (int k = lo; k < hi; ++k) optional = pool_.Alt({Pool::kEpsilonId, pool_.Concat(atom, optional)});
          r = pool_.Concat(r, optional);
        }
        atom = r;
      } else {
        break;
      }
    }
    return atom;
  }

  int Number() {
    if (!More() || !isdigit(static_cast<unsigned char>(Peek()))) Fail();
    int n = 0;
    while (More() && isdigit(static_cast<unsigned char>(Peek()))) n = n * 10 + (p_[i_++] - '0');
    return n;
  }

  int Atom() {
    char c = p_[i_++];
    if (c == '(') {
      int r = Alternation();
      if (!More() || Peek() != ')') Fail();
      ++i_;
      return r;
    }
    if (c == '[') return pool_.Bytes(Class());
    if (c == '.') {
      std::bitset<256> all;
      all.set();
      all.reset('\n');
      return pool_.Bytes(all);
    }
    if (c == '\\') return pool_.Bytes(Escape());
    std::bitset<256> one;
    one.set(static_cast<uint8_t>(c));
    return pool_.Bytes(one);
  }

  static int Hex(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(tolower(c));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  }

  std::bitset<256> Escape() {
    if (!More()) Fail();
    char c = p_[i_++];
    std::bitset<256> s;
    auto range = [&](int lo, int hi) {
      for (int b = lo; b <= hi; ++b) s.set(b);
    };
    switch (c) {
      case 'n': s.set('\n'); return s;
      case 't': s.set('\t'); return s;
      case 'r': s.set('\r'); return s;
      case 'f': s.set('\f'); return s;
      case 'v': s.set('\v'); return s;
      case '0': s.set(0); return s;
      case 'd': range('0', '9'); return s;
      case 'D': range('0', '9'); return ~s;
      case 'w': range('0', '9'); range('a', 'z'); range('A', 'Z'); s.set('_'); return s;
      case 'W': range('0', '9'); range('a', 'z'); range('A', 'Z'); s.set('_'); return ~s;
      case 's': for (char w : {' ', '\t', '\n', '\r', '\f', '\v'}) s.set(static_cast<uint8_t>(w)); return s;
      case 'S': for (char w : {' ', '\t', '\n', '\r', '\f', '\v'}) s.set(static_cast<uint8_t>(w)); return ~s;
      case 'x': {
        if (i_ + 2 > p_.size() || Hex(p_[i_]) < 0 || Hex(p_[i_ + 1]) < 0) Fail();
        s.set(Hex(p_[i_]) * 16 + Hex(p_[i_ + 1]));
        i_ += 2;
        return s;
      }
      default:
        if (isalnum(static_cast<unsigned char>(c))) Fail();
        s.set(static_cast<uint8_t>(c));
        return s;
    }
  }

  // After '[' up to and including ']'.
  std::bitset<256> Class() {
    bool negate = More() && Peek() == '^';
    if (negate) ++i_;
    std::bitset<256> s;
    bool first = true;
    while (true) {
      if (!More()) Fail();
      if (Peek() == ']' && !first) {
        ++i_;
        break;
      }
      first = false;
      std::bitset<256> item;
      int lo = ClassAtom(&item);
      if (lo >= 0 && i_ + 1 < p_.size() && Peek() == '-' && p_[i_ + 1] != ']') {
        ++i_;
        std::bitset<256> ignored;
        int hi = ClassAtom(&ignored);
        if (hi < lo) Fail();
        for (int b = lo; b <= hi; ++b) s.set(b);
      } else {
        s |= item;
      }
    }
    return negate ? ~s : s;
  }

  // Returns the single byte value, or -1 for a multi-byte escape class.
  int ClassAtom(std::bitset<256>* out) {
    char c = p_[i_++];
    if (c == '\\') {
      *out = Escape();
      return out->count() == 1 ? static_cast<int>(FirstSet(*out)) : -1;
    }
    out->set(static_cast<uint8_t>(c));
    return static_cast<uint8_t>(c);
  }

  static size_t FirstSet(const std::bitset<256>& s) {
    for (size_t b = 0; b < 256; ++b) {
      if (s.test(b)) return b;
    }
    return 0;
  }

  std::string_view p_;
  Pool& pool_;
  size_t i_ = 0;
};

}  // namespace

DerivativeMatcher::DerivativeMatcher(std::string_view pattern) : pool_(std::make_unique<Pool>()) {
  root_ = PatternReader(pattern, *pool_).Read();
}
DerivativeMatcher::~DerivativeMatcher() = default;
DerivativeMatcher::DerivativeMatcher(DerivativeMatcher&&) noexcept = default;
DerivativeMatcher& DerivativeMatcher::operator=(DerivativeMatcher&&) noexcept = default;

bool DerivativeMatcher::matches(std::string_view s) const {
  int r = root_;
  for (char c : s) {
    r = pool_->Derive(r, static_cast<uint8_t>(c));
    if (r == Pool::kNothingId) return false;
  }
  return pool_->Nullable(r);
}

// ---------------------------------------------------------------------------
// Scannerless top-down recognizer
// ---------------------------------------------------------------------------

struct CfgOracle::Impl {
  struct Config {
    int pending;                  // derivative of the terminal being read, -1 between terminals
    std::vector<SymbolId> stack;  // top at back
    bool operator<(const Config& o) const { return std::tie(pending, stack) < std::tie(o.pending, o.stack); }
    bool operator==(const Config& o) const = default;
  };
  using ConfigSet = std::vector<Config>;  // sorted, unique

  const Grammar& g;
  OracleBudget budget;
  Pool pool;
  std::vector<int> terminal_roots;
  std::vector<bool> nullable;  // per symbol
  bool cap_hit = false;
  std::map<std::pair<ConfigSet, size_t>, bool> finish_memo;

  Impl(const Grammar& grammar, OracleBudget b) : g(grammar), budget(b) {
    for (const Terminal& t : g.terminals()) terminal_roots.push_back(PatternReader(t.pattern, pool).Read());
    nullable.assign(g.num_symbols(), false);
    for (bool changed = true; changed;) {
      changed = false;
      for (const Production& p : g.productions()) {
        if (nullable[p.lhs]) continue;
        bool all = std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId s) { return nullable[s]; });
        if (all) {
          nullable[p.lhs] = true;
          changed = true;
        }
      }
    }
  }

  ConfigSet Initial() const { return {Config{-1, {g.start()}}}; }

  // Start the next terminal on `stack` with byte c, expanding nonterminals.
  void StartTerminal(std::vector<SymbolId> stack, uint8_t c, size_t expansions, ConfigSet& out) {
    if (stack.empty()) return;
    if (stack.size() > budget.max_depth || expansions > 2 * g.num_nonterminals() + 2) {
      cap_hit = true;
      return;
    }
    SymbolId top = stack.back();
    stack.pop_back();
    if (g.is_terminal(top)) {
      int d = pool.Derive(terminal_roots[top], c);
      if (d != Pool::kNothingId) out.push_back({d, std::move(stack)});
      return;
    }
    for (int pid : g.productions_of(top)) {
      std::vector<SymbolId> next = stack;
      const auto& rhs = g.production(pid).rhs;
      next.insert(next.end(), rhs.rbegin(), rhs.rend());
      StartTerminal(std::move(next), c, expansions + 1, out);
    }
  }

  ConfigSet Step(const ConfigSet& in, uint8_t c) {
    ConfigSet out;
    for (const Config& cfg : in) {
      if (cfg.pending >= 0) {
        int d = pool.Derive(cfg.pending, c);
        if (d != Pool::kNothingId) out.push_back({d, cfg.stack});
        if (!pool.Nullable(cfg.pending)) continue;
      }
      StartTerminal(cfg.stack, c, 0, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  ConfigSet Run(ConfigSet set, std::string_view s) {
    for (char c : s) {
      if (set.empty()) break;
      set = Step(set, static_cast<uint8_t>(c));
    }
    return set;
  }

  bool Accepting(const ConfigSet& set) const {
    for (const Config& cfg : set) {
      if (cfg.pending >= 0 && !pool.Nullable(cfg.pending)) continue;
      if (std::all_of(cfg.stack.begin(), cfg.stack.end(), [&](SymbolId s) { return nullable[s]; })) return true;
    }
    return false;
  }

  // True if some token string of length < slots, then eos, completes a sentence.
  bool CanFinish(const ConfigSet& set, size_t slots, const Vocabulary& vocab) {
    if (slots == 0) return false;
    if (Accepting(set)) return true;
    if (slots == 1) return false;
    auto key = std::make_pair(set, slots);
    auto it = finish_memo.find(key);
    if (it != finish_memo.end()) return it->second;
    bool ok = false;
    for (size_t t = 0; t < vocab.size() && !ok; ++t) {
      if (static_cast<TokenId>(t) == vocab.eos()) continue;
      ConfigSet next = Run(set, vocab.text(static_cast<TokenId>(t)));
      ok = !next.empty() && CanFinish(next, slots - 1, vocab);
    }
    finish_memo.emplace(std::move(key), ok);
    return ok;
  }
};

CfgOracle::CfgOracle(const Grammar& g, OracleBudget budget) : impl_(std::make_unique<Impl>(g, budget)) {}
CfgOracle::~CfgOracle() = default;

Membership CfgOracle::membership(std::string_view s) {
  impl_->cap_hit = false;
  auto set = impl_->Run(impl_->Initial(), s);
  if (impl_->Accepting(set)) return Membership::kMember;
  return impl_->cap_hit ? Membership::kCapExceeded : Membership::kNotMember;
}

std::vector<uint8_t> CfgOracle::brute_force_mask(const Vocabulary& vocab, std::span<const TokenId> prefix,
                                                 size_t n_max) {
  if (vocab.size() > impl_->budget.max_vocab || n_max > impl_->budget.max_total_tokens) {
    throw Error(ErrorKind::kInstanceTooLarge, "oracle instance too large: |V|=" + std::to_string(vocab.size()) +
                                                  ", N_max=" + std::to_string(n_max));
  }
  impl_->finish_memo.clear();
  std::vector<uint8_t> bits(vocab.size(), 0);
  if (prefix.size() >= n_max) return bits;
  const size_t slots = n_max - prefix.size();
  auto set = impl_->Run(impl_->Initial(), vocab.decode(prefix));
  if (set.empty()) return bits;
  for (size_t t = 0; t < vocab.size(); ++t) {
    if (static_cast<TokenId>(t) == vocab.eos()) {
      bits[t] = impl_->Accepting(set) ? 1 : 0;
      continue;
    }
    auto next = impl_->Run(set, vocab.text(static_cast<TokenId>(t)));
    bits[t] = (!next.empty() && impl_->CanFinish(next, slots - 1, vocab)) ? 1 : 0;
  }
  return bits;
}

size_t CfgOracle::lexeme_span(std::string_view text, size_t begin, size_t end) {
  Pool& pool = impl_->pool;
  const auto& roots = impl_->terminal_roots;
  size_t span = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    std::vector<int> live = roots;
    size_t last_accept = 0;  // length of the longest complete lexeme
    size_t len = 0;
    while (pos + len < text.size()) {
      bool any = false;
      for (int& r : live) {
        if (r == Pool::kNothingId) continue;
        r = pool.Derive(r, static_cast<uint8_t>(text[pos + len]));
        any = any || r != Pool::kNothingId;
      }
      if (!any) break;
      ++len;
      for (int r : live) {
        if (r != Pool::kNothingId && pool.Nullable(r)) last_accept = len;
      }
    }
    size_t lexeme = pos + len == text.size() ? len : last_accept;
    if (lexeme == 0) return SIZE_MAX;
    if (pos < end && pos + lexeme > begin) ++span;
    pos += lexeme;
  }
  return span;
}

std::vector<uint8_t> brute_force_mask(const Grammar& g, const Vocabulary& vocab, std::span<const TokenId> prefix,
                                      size_t n_max, OracleBudget budget) {
  return CfgOracle(g, budget).brute_force_mask(vocab, prefix, n_max);
}

Cost brute_force_min_tokens(const Dfa& dfa, const Vocabulary& vocab, StateId from) {
  if (static_cast<double>(dfa.num_states()) * static_cast<double>(vocab.size()) > 1e8) {
    throw Error(ErrorKind::kInstanceTooLarge, "oracle instance too large for token search");
  }
  if (from == Dfa::kDead) return kInfiniteCost;
  std::vector<Cost> seen(dfa.num_states(), kInfiniteCost);
  std::deque<StateId> queue{from};
  seen[from] = 0;
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    if (dfa.is_accepting(q)) return seen[q];
    for (size_t t = 0; t < vocab.size(); ++t) {
      if (static_cast<TokenId>(t) == vocab.eos()) continue;
      StateId next = dfa.run(q, vocab.text(static_cast<TokenId>(t)));
      if (next == Dfa::kDead || seen[next] != kInfiniteCost) continue;
      seen[next] = seen[q] + 1;
      queue.push_back(next);
    }
  }
  return kInfiniteCost;
}

std::vector<Cost> brute_force_nonterminal_costs(const Grammar& g, std::span<const Cost> terminal_costs) {
  std::vector<Cost> d(g.num_nonterminals(), kInfiniteCost);
  auto cost_of = [&](SymbolId s) { return g.is_terminal(s) ? terminal_costs[s] : d[g.nonterminal_index(s)]; };
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Cost> next = d;
    for (const Production& p : g.productions()) {
      Cost total = 0;
      for (SymbolId s : p.rhs) total = add_costs(total, cost_of(s));
      Cost& slot = next[g.nonterminal_index(p.lhs)];
      if (total < slot) slot = total;
    }
    if (next != d) {
      d = std::move(next);
      changed = true;
    }
  }
  return d;
}

}  // namespace truncproof
