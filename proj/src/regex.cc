/*!
 *  Copyright (c) 2026 by Contributors
 * \file regex.cc
 * \brief Regex parser, Thompson construction, subset construction and Hopcroft
 * minimization over bytes.
 */
#include "truncproof/regex.h"

#include <algorithm>
#include <bitset>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "truncproof/error.h"

namespace truncproof {

namespace {

using CharSet = std::bitset<Dfa::kAlphabetSize>;

constexpr int kInfinite = -1;
constexpr int kMaxRepeat = 1000;

// ---------------------------------------------------------------------------
// Syntax tree
// ---------------------------------------------------------------------------

struct RegexNode {
  enum class Kind { kEmpty, kSet, kConcat, kAlt, kRepeat };
  Kind kind = Kind::kEmpty;
  CharSet set;
  std::vector<int> children;
  int min = 0;
  int max = 0;
};

class RegexParser {
 public:
  explicit RegexParser(std::string_view pattern) : pattern_(pattern) {}

  std::vector<RegexNode> Parse(int* root) {
    *root = ParseAlternation();
    if (pos_ < pattern_.size()) {
      // Only an unmatched ')' can stop the top-level alternation early.
      Fail("unmatched ')'");
    }
    return std::move(nodes_);
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorKind::kUnsupportedRegex, "regex /" + std::string(pattern_) + "/: " + what +
                                                  " at offset " + std::to_string(pos_));
  }

  [[noreturn]] void Unsupported(const std::string& construct) const {
    Fail("unsupported construct: " + construct);
  }

  bool AtEnd() const { return pos_ >= pattern_.size(); }
  char Peek() const { return pattern_[pos_]; }

  int Add(RegexNode node) {
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int AddSet(const CharSet& set) {
    RegexNode node;
    node.kind = RegexNode::Kind::kSet;
    node.set = set;
    return Add(std::move(node));
  }

  int ParseAlternation() {
    std::vector<int> branches{ParseConcatenation()};
    while (!AtEnd() && Peek() == '|') {
      ++pos_;
      branches.push_back(ParseConcatenation());
    }
    if (branches.size() == 1) return branches[0];
    RegexNode node;
    node.kind = RegexNode::Kind::kAlt;
    node.children = std::move(branches);
    return Add(std::move(node));
  }

  int ParseConcatenation() {
    std::vector<int> items;
    while (!AtEnd() && Peek() != '|' && Peek() != ')') {
      items.push_back(ParseRepetition());
    }
    if (items.empty()) return Add(RegexNode{});
    if (items.size() == 1) return items[0];
    RegexNode node;
    node.kind = RegexNode::Kind::kConcat;
    node.children = std::move(items);
    return Add(std::move(node));
  }

  bool ParseBoundedRepeat(int* min, int* max) {
    // Accepts {n}, {n,}, {n,m}. Anything else leaves '{' as a literal.
    size_t p = pos_ + 1;
    auto read_int = [&](int* out) {
      size_t begin = p;
      long value = 0;
      while (p < pattern_.size() && pattern_[p] >= '0' && pattern_[p] <= '9') {
        value = value * 10 + (pattern_[p] - '0');
        if (value > kMaxRepeat) Fail("repetition bound exceeds " + std::to_string(kMaxRepeat));
        ++p;
      }
      *out = static_cast<int>(value);
      return p > begin;
    };
    if (!read_int(min)) return false;
    if (p < pattern_.size() && pattern_[p] == '}') {
      *max = *min;
    } else if (p < pattern_.size() && pattern_[p] == ',') {
      ++p;
      if (p < pattern_.size() && pattern_[p] == '}') {
        *max = kInfinite;
      } else if (!read_int(max) || p >= pattern_.size() || pattern_[p] != '}') {
        return false;
      }
    } else {
      return false;
    }
    if (*max != kInfinite && *max < *min) Fail("repetition bounds out of order");
    pos_ = p + 1;
    return true;
  }

  int ParseRepetition() {
    int atom = ParseAtom();
    while (!AtEnd()) {
      int min = 0;
      int max = 0;
      char c = Peek();
      if (c == '*') {
        min = 0, max = kInfinite, ++pos_;
      } else if (c == '+') {
        min = 1, max = kInfinite, ++pos_;
      } else if (c == '?') {
        min = 0, max = 1, ++pos_;
      } else if (c == '{' && ParseBoundedRepeat(&min, &max)) {
        // parsed
      } else {
        break;
      }
      if (!AtEnd() && Peek() == '?') Unsupported("lazy quantifier");
      if (!AtEnd() && Peek() == '+') Unsupported("possessive quantifier");
      RegexNode node;
      node.kind = RegexNode::Kind::kRepeat;
      node.children = {atom};
      node.min = min;
      node.max = max;
      atom = Add(std::move(node));
    }
    return atom;
  }

  static CharSet Range(int lo, int hi) {
    CharSet set;
    for (int c = lo; c <= hi; ++c) set.set(c);
    return set;
  }

  static CharSet Digits() { return Range('0', '9'); }
  static CharSet WordChars() { return Range('0', '9') | Range('A', 'Z') | Range('a', 'z') | Range('_', '_'); }
  static CharSet Spaces() {
    CharSet set;
    for (char c : std::string_view(" \t\n\r\f\v")) set.set(static_cast<uint8_t>(c));
    return set;
  }

  int ParseHexByte() {
    auto hex = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    if (pos_ + 1 >= pattern_.size() || hex(pattern_[pos_]) < 0 || hex(pattern_[pos_ + 1]) < 0) {
      Fail("malformed \\x escape");
    }
    int value = hex(pattern_[pos_]) * 16 + hex(pattern_[pos_ + 1]);
    pos_ += 2;
    return value;
  }

  // Parses the escape after a backslash. Returns either a single byte (set has
  // one member and *single is true) or a class.
  CharSet ParseEscape(bool in_class, bool* single) {
    if (AtEnd()) Fail("trailing backslash");
    char c = pattern_[pos_++];
    *single = true;
    CharSet set;
    switch (c) {
      case 'n': set.set('\n'); return set;
      case 't': set.set('\t'); return set;
      case 'r': set.set('\r'); return set;
      case 'f': set.set('\f'); return set;
      case 'v': set.set('\v'); return set;
      case '0': set.set(0); return set;
      case 'x': set.set(ParseHexByte()); return set;
      case 'd': *single = false; return Digits();
      case 'D': *single = false; return ~Digits();
      case 'w': *single = false; return WordChars();
      case 'W': *single = false; return ~WordChars();
      case 's': *single = false; return Spaces();
      case 'S': *single = false; return ~Spaces();
      case 'b':
        if (in_class) {
          set.set('\b');
          return set;
        }
        Unsupported("word boundary \\b");
      case 'B': Unsupported("word boundary \\B");
      case 'p':
      case 'P': Unsupported("Unicode property class");
      case 'k': Unsupported("named backreference");
      case 'A':
      case 'z':
      case 'Z':
      case 'G': Unsupported("anchor");
      default: break;
    }
    if (c >= '1' && c <= '9') Unsupported("backreference");
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      Unsupported(std::string("escape \\") + c);
    }
    set.set(static_cast<uint8_t>(c));
    return set;
  }

  CharSet ParseClass() {
    // pos_ is just past '['
    bool negate = false;
    if (!AtEnd() && Peek() == '^') {
      negate = true;
      ++pos_;
    }
    CharSet set;
    bool first = true;
    while (true) {
      if (AtEnd()) Fail("unterminated character class");
      char c = Peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      int lo = -1;
      if (c == '\\') {
        ++pos_;
        bool single = false;
        CharSet escaped = ParseEscape(/*in_class=*/true, &single);
        if (!single) {
          set |= escaped;
          continue;
        }
        lo = static_cast<int>(escaped._Find_first());
      } else {
        if (c == '[' && pos_ + 1 < pattern_.size() &&
            (pattern_[pos_ + 1] == ':' || pattern_[pos_ + 1] == '=' || pattern_[pos_ + 1] == '.')) {
          Unsupported("POSIX bracket expression");
        }
        lo = static_cast<uint8_t>(c);
        ++pos_;
      }
      if (pos_ + 1 < pattern_.size() && Peek() == '-' && pattern_[pos_ + 1] != ']') {
        ++pos_;
        int hi = -1;
        if (Peek() == '\\') {
          ++pos_;
          bool single = false;
          CharSet escaped = ParseEscape(/*in_class=*/true, &single);
          if (!single) Fail("class escape used as range bound");
          hi = static_cast<int>(escaped._Find_first());
        } else {
          hi = static_cast<uint8_t>(Peek());
          ++pos_;
        }
        if (hi < lo) Fail("character range out of order");
        set |= Range(lo, hi);
      } else {
        set.set(lo);
      }
    }
    return negate ? ~set : set;
  }

  int ParseAtom() {
    char c = Peek();
    switch (c) {
      case '(': {
        ++pos_;
        if (!AtEnd() && Peek() == '?') Unsupported("group modifier or lookaround '(?'");
        int inner = ParseAlternation();
        if (AtEnd() || Peek() != ')') Fail("unterminated group");
        ++pos_;
        return inner;
      }
      case '[':
        ++pos_;
        return AddSet(ParseClass());
      case '.': {
        ++pos_;
        CharSet set;
        set.set();
        set.reset('\n');
        return AddSet(set);
      }
      case '\\': {
        ++pos_;
        bool single = false;
        return AddSet(ParseEscape(/*in_class=*/false, &single));
      }
      case '^':
      case '$':
        Unsupported(std::string("anchor '") + c + "'");
      case '*':
      case '+':
      case '?':
        Fail("nothing to repeat");
      default: {
        ++pos_;
        CharSet set;
        set.set(static_cast<uint8_t>(c));
        return AddSet(set);
      }
    }
  }

  std::string_view pattern_;
  size_t pos_ = 0;
  std::vector<RegexNode> nodes_;
};

// ---------------------------------------------------------------------------
// NFA
// ---------------------------------------------------------------------------

struct NfaState {
  std::vector<int> epsilon;
  std::vector<std::pair<CharSet, int>> edges;
};

struct Nfa {
  std::vector<NfaState> states;
  std::vector<uint8_t> accepting;
  int start = 0;

  int AddState() {
    states.emplace_back();
    accepting.push_back(0);
    return static_cast<int>(states.size()) - 1;
  }
};

struct Fragment {
  int start;
  int accept;
};

class ThompsonBuilder {
 public:
  ThompsonBuilder(const std::vector<RegexNode>& nodes, Nfa* nfa) : nodes_(nodes), nfa_(nfa) {}

  Fragment Build(int id) {
    const RegexNode& node = nodes_[id];
    switch (node.kind) {
      case RegexNode::Kind::kEmpty: {
        Fragment f{nfa_->AddState(), nfa_->AddState()};
        Eps(f.start, f.accept);
        return f;
      }
      case RegexNode::Kind::kSet: {
        Fragment f{nfa_->AddState(), nfa_->AddState()};
        if (node.set.any()) nfa_->states[f.start].edges.emplace_back(node.set, f.accept);
        return f;
      }
      case RegexNode::Kind::kConcat: {
        Fragment whole = Build(node.children[0]);
        for (size_t i = 1; i < node.children.size(); ++i) {
          Fragment next = Build(node.children[i]);
          Eps(whole.accept, next.start);
          whole.accept = next.accept;
        }
        return whole;
      }
      case RegexNode::Kind::kAlt: {
        Fragment f{nfa_->AddState(), nfa_->AddState()};
        for (int child : node.children) {
          Fragment branch = Build(child);
          Eps(f.start, branch.start);
          Eps(branch.accept, f.accept);
        }
        return f;
      }
      case RegexNode::Kind::kRepeat:
        return BuildRepeat(node.children[0], node.min, node.max);
    }
    return {};
  }

 private:
  void Eps(int from, int to) { nfa_->states[from].epsilon.push_back(to); }

  Fragment BuildRepeat(int child, int min, int max) {
    Fragment whole{nfa_->AddState(), -1};
    whole.accept = whole.start;
    for (int i = 0; i < min; ++i) {
      Fragment copy = Build(child);
      Eps(whole.accept, copy.start);
      whole.accept = copy.accept;
    }
    if (max == kInfinite) {
      Fragment loop = Build(child);
      int exit = nfa_->AddState();
      Eps(whole.accept, loop.start);
      Eps(whole.accept, exit);
      Eps(loop.accept, loop.start);
      Eps(loop.accept, exit);
      whole.accept = exit;
      return whole;
    }
    int exit = nfa_->AddState();
    for (int i = min; i < max; ++i) {
      Fragment copy = Build(child);
      Eps(whole.accept, copy.start);
      Eps(whole.accept, exit);
      whole.accept = copy.accept;
    }
    Eps(whole.accept, exit);
    whole.accept = exit;
    return whole;
  }

  const std::vector<RegexNode>& nodes_;
  Nfa* nfa_;
};

// ---------------------------------------------------------------------------
// Subset construction, minimization, canonical numbering
// ---------------------------------------------------------------------------

struct RawDfa {
  std::vector<StateId> transitions;  // n * 256
  std::vector<uint8_t> accepting;
  StateId initial = 0;
  size_t size() const { return accepting.size(); }
};

void EpsilonClosure(const Nfa& nfa, std::vector<int>* set, std::vector<uint8_t>* mark) {
  std::vector<int> stack(set->begin(), set->end());
  for (int s : *set) (*mark)[s] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : nfa.states[s].epsilon) {
      if (!(*mark)[t]) {
        (*mark)[t] = 1;
        set->push_back(t);
        stack.push_back(t);
      }
    }
  }
  for (int s : *set) (*mark)[s] = 0;
  std::sort(set->begin(), set->end());
}

RawDfa SubsetConstruction(const Nfa& nfa, size_t state_cap) {
  RawDfa dfa;
  std::map<std::vector<int>, StateId> ids;
  std::vector<std::vector<int>> subsets;
  std::vector<uint8_t> mark(nfa.states.size(), 0);

  auto intern = [&](std::vector<int> subset) -> StateId {
    auto it = ids.find(subset);
    if (it != ids.end()) return it->second;
    if (subsets.size() >= state_cap) {
      throw Error(ErrorKind::kStateCap,
                  "automaton exceeds the state cap of " + std::to_string(state_cap));
    }
    StateId id = static_cast<StateId>(subsets.size());
    ids.emplace(subset, id);
    subsets.push_back(std::move(subset));
    return id;
  };

  intern({});  // dead state, id 0
  std::vector<int> start{nfa.start};
  EpsilonClosure(nfa, &start, &mark);
  dfa.initial = intern(std::move(start));

  std::vector<std::vector<int>> by_byte(Dfa::kAlphabetSize);
  for (size_t current = 0; current < subsets.size(); ++current) {
    for (auto& targets : by_byte) targets.clear();
    for (int s : subsets[current]) {
      for (const auto& [chars, target] : nfa.states[s].edges) {
        for (size_t c = chars._Find_first(); c < chars.size(); c = chars._Find_next(c)) {
          by_byte[c].push_back(target);
        }
      }
    }
    dfa.transitions.resize((current + 1) * Dfa::kAlphabetSize);
    std::map<std::vector<int>, StateId> memo;  // many bytes share a target set
    for (int c = 0; c < Dfa::kAlphabetSize; ++c) {
      auto& targets = by_byte[c];
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      StateId next;
      auto hit = memo.find(targets);
      if (hit != memo.end()) {
        next = hit->second;
      } else {
        std::vector<int> closure = targets;
        EpsilonClosure(nfa, &closure, &mark);
        next = intern(std::move(closure));
        memo.emplace(targets, next);
      }
      dfa.transitions[current * Dfa::kAlphabetSize + c] = next;
    }
  }
  dfa.accepting.resize(subsets.size(), 0);
  for (size_t i = 0; i < subsets.size(); ++i) {
    for (int s : subsets[i]) {
      if (nfa.accepting[s]) {
        dfa.accepting[i] = 1;
        break;
      }
    }
  }
  return dfa;
}

// Hopcroft partition refinement. Returns block id per state.
std::vector<int> HopcroftBlocks(const RawDfa& dfa) {
  const size_t n = dfa.size();
  constexpr int kSigma = Dfa::kAlphabetSize;

  // Inverse transitions in CSR form per byte.
  std::vector<std::vector<int>> inv_offset(kSigma, std::vector<int>(n + 1, 0));
  std::vector<std::vector<int>> inv_source(kSigma, std::vector<int>(n));
  for (int c = 0; c < kSigma; ++c) {
    auto& offset = inv_offset[c];
    for (size_t s = 0; s < n; ++s) ++offset[dfa.transitions[s * kSigma + c] + 1];
    for (size_t t = 0; t < n; ++t) offset[t + 1] += offset[t];
    std::vector<int> fill(offset.begin(), offset.end() - 1);
    for (size_t s = 0; s < n; ++s) {
      inv_source[c][fill[dfa.transitions[s * kSigma + c]]++] = static_cast<int>(s);
    }
  }

  std::vector<int> block_of(n);
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> accepting, rejecting;
    for (size_t s = 0; s < n; ++s) (dfa.accepting[s] ? accepting : rejecting).push_back(static_cast<int>(s));
    for (auto* part : {&rejecting, &accepting}) {
      if (part->empty()) continue;
      for (int s : *part) block_of[s] = static_cast<int>(blocks.size());
      blocks.push_back(std::move(*part));
    }
  }

  std::deque<int> work;
  std::vector<uint8_t> in_work(blocks.size(), 0);
  for (size_t b = 0; b < blocks.size(); ++b) {
    work.push_back(static_cast<int>(b));
    in_work[b] = 1;
  }

  std::vector<uint8_t> marked(n, 0);
  std::vector<int> marked_count;
  std::vector<int> touched;
  std::vector<int> splitter_members;
  while (!work.empty()) {
    int splitter = work.front();
    work.pop_front();
    in_work[splitter] = 0;
    splitter_members = blocks[splitter];
    for (int c = 0; c < kSigma; ++c) {
      touched.clear();
      marked_count.resize(blocks.size(), 0);
      for (int t : splitter_members) {
        for (int i = inv_offset[c][t]; i < inv_offset[c][t + 1]; ++i) {
          int s = inv_source[c][i];
          if (marked[s]) continue;
          marked[s] = 1;
          int b = block_of[s];
          if (marked_count[b]++ == 0) touched.push_back(b);
        }
      }
      for (int b : touched) {
        if (marked_count[b] < static_cast<int>(blocks[b].size())) {
          std::vector<int> inside, outside;
          for (int s : blocks[b]) (marked[s] ? inside : outside).push_back(s);
          int fresh = static_cast<int>(blocks.size());
          for (int s : inside) block_of[s] = fresh;
          blocks[b] = std::move(outside);
          blocks.push_back(std::move(inside));
          in_work.push_back(0);
          marked_count.push_back(0);
          if (in_work[b]) {
            work.push_back(fresh);
            in_work[fresh] = 1;
          } else {
            int smaller = blocks[fresh].size() < blocks[b].size() ? fresh : b;
            work.push_back(smaller);
            in_work[smaller] = 1;
          }
        }
        marked_count[b] = 0;
      }
      for (int t : splitter_members) {
        for (int i = inv_offset[c][t]; i < inv_offset[c][t + 1]; ++i) marked[inv_source[c][i]] = 0;
      }
    }
  }
  return block_of;
}

// Quotient by blocks, then renumber breadth-first from the initial state with
// the dead block pinned to 0.
Dfa Canonicalize(const RawDfa& raw, const std::vector<int>& block_of, StateId raw_dead) {
  constexpr int kSigma = Dfa::kAlphabetSize;
  int num_blocks = *std::max_element(block_of.begin(), block_of.end()) + 1;
  std::vector<int> representative(num_blocks, -1);
  for (size_t s = 0; s < raw.size(); ++s) {
    if (representative[block_of[s]] < 0) representative[block_of[s]] = static_cast<int>(s);
  }
  const int dead_block = block_of[raw_dead];
  const int initial_block = block_of[raw.initial];
  if (initial_block == dead_block) {
    throw Error(ErrorKind::kEmptyLanguage, "pattern matches no string");
  }

  std::vector<int> new_id(num_blocks, -1);
  std::vector<int> order;
  new_id[dead_block] = 0;
  order.push_back(dead_block);
  new_id[initial_block] = 1;
  order.push_back(initial_block);
  for (size_t head = 1; head < order.size(); ++head) {
    int rep = representative[order[head]];
    for (int c = 0; c < kSigma; ++c) {
      int b = block_of[raw.transitions[static_cast<size_t>(rep) * kSigma + c]];
      if (new_id[b] < 0) {
        new_id[b] = static_cast<int>(order.size());
        order.push_back(b);
      }
    }
  }

  std::vector<StateId> transitions(order.size() * kSigma);
  std::vector<uint8_t> accepting(order.size(), 0);
  for (size_t id = 0; id < order.size(); ++id) {
    int rep = representative[order[id]];
    accepting[id] = raw.accepting[rep];
    for (int c = 0; c < kSigma; ++c) {
      transitions[id * kSigma + c] =
          static_cast<StateId>(new_id[block_of[raw.transitions[static_cast<size_t>(rep) * kSigma + c]]]);
    }
  }
  return Dfa(std::move(transitions), std::move(accepting), 1);
}

Dfa DeterminizeAndMinimize(const Nfa& nfa, size_t state_cap) {
  RawDfa raw = SubsetConstruction(nfa, state_cap);
  return Canonicalize(raw, HopcroftBlocks(raw), /*raw_dead=*/0);
}

// Imports a Dfa as NFA states at `offset`; live edges only.
void AppendDfa(const Dfa& dfa, Nfa* nfa) {
  const int offset = static_cast<int>(nfa->states.size());
  for (size_t s = 0; s < dfa.num_states(); ++s) nfa->AddState();
  for (size_t s = 0; s < dfa.num_states(); ++s) {
    std::map<StateId, CharSet> by_target;
    for (int c = 0; c < Dfa::kAlphabetSize; ++c) {
      StateId t = dfa.next(static_cast<StateId>(s), static_cast<uint8_t>(c));
      if (t != Dfa::kDead) by_target[t].set(c);
    }
    for (auto& [target, chars] : by_target) {
      nfa->states[offset + s].edges.emplace_back(chars, offset + static_cast<int>(target));
    }
  }
}

}  // namespace

Dfa::Dfa(std::vector<StateId> transitions, std::vector<uint8_t> accepting, StateId initial)
    : transitions_(std::move(transitions)), accepting_(std::move(accepting)), initial_(initial) {
  const size_t n = accepting_.size();
  if (n == 0 || transitions_.size() != n * kAlphabetSize || initial_ >= n) {
    throw Error(ErrorKind::kInvalidArgument, "malformed DFA table");
  }
  if (accepting_[kDead]) throw Error(ErrorKind::kInvalidArgument, "dead state must not accept");
  extendable_.assign(n, 0);
  for (size_t s = 0; s < n; ++s) {
    for (int c = 0; c < kAlphabetSize; ++c) {
      StateId t = transitions_[s * kAlphabetSize + c];
      if (t >= n) throw Error(ErrorKind::kInvalidArgument, "DFA transition out of range");
      if (s == kDead && t != kDead) throw Error(ErrorKind::kInvalidArgument, "dead state must absorb");
      if (t != kDead) extendable_[s] = 1;
    }
  }
}

Dfa compile_regex(std::string_view pattern, size_t state_cap) {
  RegexParser parser(pattern);
  int root = 0;
  std::vector<RegexNode> nodes = parser.Parse(&root);
  Nfa nfa;
  Fragment f = ThompsonBuilder(nodes, &nfa).Build(root);
  nfa.start = f.start;
  nfa.accepting[f.accept] = 1;
  return DeterminizeAndMinimize(nfa, state_cap);
}

Dfa dfa_concat(const Dfa& a, const Dfa& b, size_t state_cap) {
  Nfa nfa;
  AppendDfa(a, &nfa);
  const int b_offset = static_cast<int>(nfa.states.size());
  AppendDfa(b, &nfa);
  nfa.start = static_cast<int>(a.initial());
  for (size_t s = 0; s < a.num_states(); ++s) {
    if (a.is_accepting(static_cast<StateId>(s))) {
      nfa.states[s].epsilon.push_back(b_offset + static_cast<int>(b.initial()));
    }
  }
  for (size_t s = 0; s < b.num_states(); ++s) {
    nfa.accepting[b_offset + s] = b.accepting()[s];
  }
  return DeterminizeAndMinimize(nfa, state_cap);
}

}  // namespace truncproof
