/*!
 *  Copyright (c) 2026 by Contributors
 * \file models.cc
 * \brief Toy language models.
 */
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "truncproof/decoding.h"
#include "truncproof/error.h"

namespace truncproof {

namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void Normalize(std::vector<double>& p) {
  double z = 0;
  for (double v : p) z += v;
  if (z <= 0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= z;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::vector<double> UniformModel::next_distribution(std::span<const TokenId>, std::span<const TokenId>) const {
  return std::vector<double>(size_, 1.0 / static_cast<double>(size_));
}

std::vector<double> RandomModel::next_distribution(std::span<const TokenId> prompt,
                                                   std::span<const TokenId> generated) const {
  uint64_t h = SplitMix(seed_);
  for (TokenId t : prompt) h = SplitMix(h ^ static_cast<uint64_t>(t));
  h = SplitMix(h ^ 0xabcdefULL);
  for (TokenId t : generated) h = SplitMix(h ^ static_cast<uint64_t>(t));
  std::vector<double> p(size_);
  for (size_t t = 0; t < size_; ++t) {
    double u = static_cast<double>(SplitMix(h + t) >> 11) * 0x1.0p-53;
    p[t] = 1e-3 + u * u * u;  // skewed, never zero
  }
  Normalize(p);
  return p;
}

// ---------------------------------------------------------------------------
// Trigram
// ---------------------------------------------------------------------------

struct NgramModel::Counts {
  size_t vocab_size = 0;
  std::vector<double> unigram;
  // Context key -> sparse next-token counts and their total.
  std::unordered_map<uint64_t, std::pair<std::unordered_map<TokenId, double>, double>> bigram, trigram;
};

namespace {

constexpr TokenId kBoundary = -1;
constexpr double kAddK = 0.01;

uint64_t ContextKey(TokenId a, TokenId b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

NgramModel::NgramModel(const Vocabulary& vocab, std::string_view corpus) {
  auto counts = std::make_shared<Counts>();
  counts->vocab_size = vocab.size();
  counts->unigram.assign(vocab.size(), 0.0);
  size_t start = 0;
  while (start <= corpus.size()) {
    size_t end = corpus.find('\n', start);
    if (end == std::string_view::npos) end = corpus.size();
    std::string_view line = corpus.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    std::vector<TokenId> ids = vocab.encode(line);
    ids.push_back(vocab.eos());
    TokenId prev2 = kBoundary, prev1 = kBoundary;
    for (TokenId t : ids) {
      counts->unigram[t] += 1;
      auto& bi = counts->bigram[ContextKey(kBoundary, prev1)];
      bi.first[t] += 1;
      bi.second += 1;
      auto& tri = counts->trigram[ContextKey(prev2, prev1)];
      tri.first[t] += 1;
      tri.second += 1;
      prev2 = prev1;
      prev1 = t;
    }
  }
  counts_ = std::move(counts);
}

std::vector<double> NgramModel::next_distribution(std::span<const TokenId>,
                                                  std::span<const TokenId> generated) const {
  const Counts& c = *counts_;
  const auto v = static_cast<double>(c.vocab_size);
  const size_t n = generated.size();
  TokenId prev1 = n >= 1 ? generated[n - 1] : kBoundary;
  TokenId prev2 = n >= 2 ? generated[n - 2] : kBoundary;

  double unigram_total = 0;
  for (double x : c.unigram) unigram_total += x;
  std::vector<double> p(c.vocab_size);
  for (size_t t = 0; t < c.vocab_size; ++t) p[t] = (c.unigram[t] + kAddK) / (unigram_total + kAddK * v);

  // Interpolate towards higher orders when their context was observed.
  auto blend = [&](const auto& table, uint64_t key, double weight) {
    auto it = table.find(key);
    if (it == table.end()) return;
    const auto& [next, total] = it->second;
    for (size_t t = 0; t < c.vocab_size; ++t) p[t] *= (1.0 - weight);
    const double base = kAddK / (total + kAddK * v);
    for (size_t t = 0; t < c.vocab_size; ++t) p[t] += weight * base;
    for (const auto& [t, count] : next) p[t] += weight * count / (total + kAddK * v);
  };
  blend(c.bigram, ContextKey(kBoundary, prev1), 0.7);
  blend(c.trigram, ContextKey(prev2, prev1), 0.8);
  Normalize(p);
  return p;
}

// ---------------------------------------------------------------------------
// Scripted
// ---------------------------------------------------------------------------

ScriptedModel::ScriptedModel(const Vocabulary& vocab, std::string_view json_config) : vocab_(&vocab) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_config);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("scripted model config is not valid JSON: ") + e.what());
  }
  std::unordered_map<std::string, TokenId> by_text;
  for (size_t t = vocab.size(); t-- > 0;) {
    auto id = static_cast<TokenId>(t);
    by_text[id == vocab.eos() ? std::string("<eos>") : std::string(vocab.text(id))] = id;
  }
  const double floor = doc.value("floor", 1e-3);
  auto distribution = [&](const nlohmann::json& probs) {
    std::vector<double> p(vocab.size(), floor / static_cast<double>(vocab.size()));
    for (const auto& [text, mass] : probs.items()) {
      auto it = by_text.find(unescape_token(text));
      if (it == by_text.end()) {
        throw Error(ErrorKind::kInvalidArgument, "scripted model names unknown token '" + text + "'");
      }
      p[it->second] += mass.get<double>();
    }
    Normalize(p);
    return p;
  };
  default_ = distribution(doc.value("default", nlohmann::json::object()));
  for (const auto& rule : doc.value("rules", nlohmann::json::array())) {
    Rule r;
    if (rule.contains("prompt")) {
      r.prompt = rule["prompt"].get<std::string>();
      r.any_prompt = false;
    }
    r.probs = distribution(rule.at("probs"));
    rules_[rule.value("prefix", std::string())].push_back(std::move(r));
  }
}

std::vector<double> ScriptedModel::next_distribution(std::span<const TokenId> prompt,
                                                     std::span<const TokenId> generated) const {
  std::vector<TokenId> text_ids;
  for (TokenId t : generated) {
    if (t != vocab_->eos()) text_ids.push_back(t);
  }
  auto it = rules_.find(vocab_->decode(text_ids));
  if (it == rules_.end()) return default_;
  const std::string prompt_text = vocab_->decode(prompt);
  for (const Rule& r : it->second) {
    if (!r.any_prompt && r.prompt == prompt_text) return r.probs;
  }
  for (const Rule& r : it->second) {
    if (r.any_prompt) return r.probs;
  }
  return default_;
}

// ---------------------------------------------------------------------------
// Verbosity bias
// ---------------------------------------------------------------------------

VerboseBiasModel::VerboseBiasModel(const Vocabulary& vocab, std::shared_ptr<const LanguageModel> base, double factor)
    : base_(std::move(base)), whitespace_(vocab.size(), 0), factor_(factor) {
  if (!(factor > 0)) throw Error(ErrorKind::kInvalidArgument, "verbosity factor must be positive");
  for (size_t t = 0; t < vocab.size(); ++t) {
    auto id = static_cast<TokenId>(t);
    std::string_view s = vocab.text(id);
    whitespace_[t] = id != vocab.eos() && !s.empty() &&
                     std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; });
  }
}

std::vector<double> VerboseBiasModel::next_distribution(std::span<const TokenId> prompt,
                                                        std::span<const TokenId> generated) const {
  std::vector<double> p = base_->next_distribution(prompt, generated);
  for (size_t t = 0; t < p.size(); ++t) {
    if (whitespace_[t]) p[t] *= factor_;
  }
  Normalize(p);
  return p;
}

std::shared_ptr<const LanguageModel> make_model(std::string_view spec, const Vocabulary& vocab) {
  auto colon = spec.find(':');
  std::string kind(spec.substr(0, colon));
  std::string arg = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
  auto need_arg = [&] {
    if (arg.empty()) throw Error(ErrorKind::kInvalidArgument, "model '" + kind + "' needs an argument");
  };
  if (kind == "uniform") return std::make_shared<UniformModel>(vocab.size());
  if (kind == "random") {
    need_arg();
    return std::make_shared<RandomModel>(vocab.size(), std::stoull(arg));
  }
  if (kind == "ngram") {
    need_arg();
    return std::make_shared<NgramModel>(vocab, ReadFile(arg));
  }
  if (kind == "scripted") {
    need_arg();
    return std::make_shared<ScriptedModel>(vocab, ReadFile(arg));
  }
  if (kind == "verbose-bias") {
    need_arg();
    auto second = arg.find(':');
    double factor = 0;
    try {
      factor = std::stod(arg.substr(0, second));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "bad verbosity factor '" + arg + "'");
    }
    std::shared_ptr<const LanguageModel> base;
    if (second == std::string::npos) {
      base = std::make_shared<UniformModel>(vocab.size());
    } else {
      base = std::make_shared<NgramModel>(vocab, ReadFile(arg.substr(second + 1)));
    }
    return std::make_shared<VerboseBiasModel>(vocab, std::move(base), factor);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown model '" + std::string(spec) + "'");
}

}  // namespace truncproof
