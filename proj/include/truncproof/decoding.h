/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/decoding.h
 * \brief Toy language models and masked decoders: greedy, beam search, MCTS.
 */
#ifndef TRUNCPROOF_DECODING_H_
#define TRUNCPROOF_DECODING_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "truncproof/engine.h"
#include "truncproof/vocabulary.h"

namespace truncproof {

/*!
 * \brief Next-token distribution given the prompt and the tokens generated so
 * far. Implementations are deterministic and safe for concurrent const use.
 */
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::vector<double> next_distribution(std::span<const TokenId> prompt,
                                                std::span<const TokenId> generated) const = 0;
  virtual std::string name() const = 0;
};

class UniformModel : public LanguageModel {
 public:
  explicit UniformModel(size_t vocab_size) : size_(vocab_size) {}
  std::vector<double> next_distribution(std::span<const TokenId>, std::span<const TokenId>) const override;
  std::string name() const override { return "uniform"; }

 private:
  size_t size_;
};

/*! \brief Pseudo-random but reproducible distributions keyed by (seed, context). */
class RandomModel : public LanguageModel {
 public:
  RandomModel(size_t vocab_size, uint64_t seed) : size_(vocab_size), seed_(seed) {}
  std::vector<double> next_distribution(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated) const override;
  std::string name() const override { return "random:" + std::to_string(seed_); }

 private:
  size_t size_;
  uint64_t seed_;
};

/*!
 * \brief Interpolated trigram model with add-k smoothing. The corpus is split
 * into lines; each line is tokenized with Vocabulary::encode and closed with
 * eos. Prompt tokens are not part of the n-gram context.
 */
class NgramModel : public LanguageModel {
 public:
  NgramModel(const Vocabulary& vocab, std::string_view corpus);
  std::vector<double> next_distribution(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated) const override;
  std::string name() const override { return "ngram"; }

 private:
  struct Counts;
  std::shared_ptr<const Counts> counts_;
};

/*!
 * \brief Distributions read from a JSON file:
 *
 *     {"floor": 1e-3,
 *      "rules": [{"prompt": "...", "prefix": "...", "probs": {"tok": 0.9}}],
 *      "default": {"tok": 0.5}}
 *
 * A rule fires when the decoded generated text equals "prefix" and, if given,
 * the decoded prompt equals "prompt". Listed token texts ("<eos>" for eos)
 * get their mass; the floor is spread over every token and the result is
 * renormalized.
 */
class ScriptedModel : public LanguageModel {
 public:
  ScriptedModel(const Vocabulary& vocab, std::string_view json_config);
  std::vector<double> next_distribution(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated) const override;
  std::string name() const override { return "scripted"; }

 private:
  struct Rule {
    std::string prompt;
    bool any_prompt = true;
    std::vector<double> probs;
  };
  const Vocabulary* vocab_;
  std::unordered_map<std::string, std::vector<Rule>> rules_;  // keyed by generated text
  std::vector<double> default_;
};

/*! \brief Multiplies the mass of whitespace-only tokens by `factor`, then renormalizes. */
class VerboseBiasModel : public LanguageModel {
 public:
  VerboseBiasModel(const Vocabulary& vocab, std::shared_ptr<const LanguageModel> base, double factor);
  std::vector<double> next_distribution(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated) const override;
  std::string name() const override { return "verbose-bias:" + std::to_string(factor_) + "/" + base_->name(); }

 private:
  std::shared_ptr<const LanguageModel> base_;
  std::vector<uint8_t> whitespace_;
  double factor_;
};

/*!
 * \brief Parses uniform | random:<seed> | ngram:<corpus file> | scripted:<file>
 * | verbose-bias:<factor>[:<corpus file>]. Throws kInvalidArgument or kIo.
 */
std::shared_ptr<const LanguageModel> make_model(std::string_view spec, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Decoders
// ---------------------------------------------------------------------------

struct DecodeResult {
  std::vector<TokenId> tokens;  // generated tokens, eos included when emitted
  std::string text;
  bool complete = false;        // ended with eos on a complete sentence
  bool truncated = false;       // budget ran out first (baseline modes only)
  double log_prob = 0.0;        // sum of unmodified model log-probabilities
  size_t mask_calls = 0;
};

/*! \brief P'(t) ∝ exp(log p(t) / tau) over mask-true tokens; zero elsewhere. */
std::vector<double> softmax_prior(std::span<const double> probs, const Mask& mask, double tau);

/*! \brief Q + c_puct * prior * sqrt(sum_n) / (1 + n). */
inline double puct_score(double q, double prior, double sum_n, double n, double c_puct) {
  return q + c_puct * prior * std::sqrt(sum_n) / (1.0 + n);
}

/*! \brief exp(mean log p); 1 for an empty sequence. */
double geometric_mean(std::span<const double> probs);

/*! \brief argmax of p ⊙ mask, lowest id on ties. Runs from whatever state `session` is in. */
DecodeResult greedy_decode(const LanguageModel& model, Session session, std::span<const TokenId> prompt);

struct BeamConfig {
  size_t beams = 10;
};

/*!
 * \brief Length-normalized beam search over masked, renormalized
 * probabilities. Hypotheses that emit eos retire to a pool; the best pooled
 * hypothesis is returned.
 */
DecodeResult beam_search(const LanguageModel& model, const Session& session, std::span<const TokenId> prompt,
                         BeamConfig config = {});

struct MctsConfig {
  double c_puct = 5.0;
  double temperature = 2.0;
  size_t trials = 20;
};

struct MctsStats {
  size_t steps = 0;        // emitted tokens
  size_t simulations = 0;  // total trials run
  size_t rollout_tokens = 0;
  double root_value = 0.0;  // best value seen at the first root
};

/*!
 * \brief PUCT search. Per emitted token: `trials` rounds of selection,
 * one-child expansion, greedy rollout and max-backup of the rollout's
 * geometric-mean probability; then the child with the highest Q is committed
 * and its subtree reused.
 */
DecodeResult mcts_decode(const LanguageModel& model, const Session& session, std::span<const TokenId> prompt,
                         MctsConfig config = {}, MctsStats* stats = nullptr);

struct Strategy {
  enum class Kind { kGreedy, kBeam, kMcts };
  Kind kind = Kind::kGreedy;
  BeamConfig beam;
  MctsConfig mcts;

  std::string to_string() const;
};

/*! \brief greedy | beam:<b> | mcts:<trials>[,<c_puct>[,<tau>]]. Throws kInvalidArgument. */
Strategy parse_strategy(std::string_view spec);

DecodeResult run_strategy(const Strategy& strategy, const LanguageModel& model, const Session& session,
                          std::span<const TokenId> prompt, MctsStats* stats = nullptr);

}  // namespace truncproof

#endif  // TRUNCPROOF_DECODING_H_
