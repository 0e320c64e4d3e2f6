/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/regex.h
 * \brief Byte-level regex compilation into minimal DFAs, plus concatenation
 * automata for ordered terminal pairs.
 *
 * Supported syntax: literals, escapes (\n \t \r \f \v \xNN \d \D \w \W \s \S and
 * escaped punctuation), character classes with ranges and negation, `.`,
 * grouping, alternation, and the quantifiers `* + ? {n} {n,} {n,m}`.
 * Backreferences, lookaround, anchors, lazy/possessive quantifiers and Unicode
 * property classes are rejected with ErrorKind::kUnsupportedRegex.
 */
#ifndef TRUNCPROOF_REGEX_H_
#define TRUNCPROOF_REGEX_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace truncproof {

using StateId = uint32_t;

/*!
 * \brief A complete DFA over the byte alphabet.
 *
 * State 0 is always the dead state: non-accepting and absorbing. Every other
 * state is reachable from the initial state and can reach an accepting state.
 * Instances are immutable once built.
 */
class Dfa {
 public:
  static constexpr StateId kDead = 0;
  static constexpr int kAlphabetSize = 256;

  Dfa() = default;

  /*!
   * \brief Build from a dense row-major table of num_states * 256 successors.
   * Validates the dead-state convention; throws Error(kInvalidArgument).
   */
  Dfa(std::vector<StateId> transitions, std::vector<uint8_t> accepting, StateId initial);

  size_t num_states() const { return accepting_.size(); }
  StateId initial() const { return initial_; }
  bool is_accepting(StateId state) const { return accepting_[state] != 0; }
  bool is_live(StateId state) const { return state != kDead; }

  /*! \brief True if some byte leads from `state` to a live state. */
  bool can_extend(StateId state) const { return extendable_[state] != 0; }

  StateId next(StateId state, uint8_t byte) const {
    return transitions_[static_cast<size_t>(state) * kAlphabetSize + byte];
  }

  /*! \brief Iterated transition; stops early on the dead state. */
  StateId run(StateId start, std::string_view input) const {
    StateId state = start;
    for (char c : input) {
      state = next(state, static_cast<uint8_t>(c));
      if (state == kDead) break;
    }
    return state;
  }

  bool accepts(std::string_view input) const { return is_accepting(run(initial_, input)); }

  std::span<const StateId> transitions() const { return transitions_; }
  std::span<const uint8_t> accepting() const { return accepting_; }

  bool operator==(const Dfa& other) const {
    return initial_ == other.initial_ && accepting_ == other.accepting_ &&
           transitions_ == other.transitions_;
  }

 private:
  std::vector<StateId> transitions_;
  std::vector<uint8_t> accepting_;
  std::vector<uint8_t> extendable_;
  StateId initial_ = kDead;
};

constexpr size_t kDefaultStateCap = 10000;

/*!
 * \brief Compile a pattern via Thompson NFA, subset construction and Hopcroft
 * minimization. The result is canonical: equal languages give equal Dfas.
 */
Dfa compile_regex(std::string_view pattern, size_t state_cap = kDefaultStateCap);

/*! \brief Minimal DFA for L(a)L(b). Throws Error(kStateCap) past `state_cap`. */
Dfa dfa_concat(const Dfa& a, const Dfa& b, size_t state_cap = kDefaultStateCap);

inline StateId dfa_run(const Dfa& dfa, StateId start, std::string_view input) {
  return dfa.run(start, input);
}

}  // namespace truncproof

#endif  // TRUNCPROOF_REGEX_H_
