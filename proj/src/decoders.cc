/*!
 *  Copyright (c) 2026 by Contributors
 * \file decoders.cc
 * \brief Greedy, beam search and PUCT tree search over masked distributions.
 */
#include <algorithm>
#include <cmath>
#include <memory>

#include "truncproof/decoding.h"
#include "truncproof/error.h"

namespace truncproof {

namespace {

constexpr double kMinProb = 1e-300;

double SafeLog(double p) { return std::log(std::max(p, kMinProb)); }

// In full mode an empty mask is an engine error; baseline modes just stop.
Mask StepMask(const Session& s) {
  return s.mode() == MaskMode::kFull ? s.compute_mask() : s.compute_mask_unchecked();
}

bool OutOfBudget(const Session& s) { return s.generated() >= s.budget(); }

TokenId MaskedArgmax(std::span<const double> probs, const Mask& mask) {
  TokenId best = -1;
  for (size_t t = 0; t < probs.size(); ++t) {
    if (!mask.bits[t]) continue;
    if (best < 0 || probs[t] > probs[best]) best = static_cast<TokenId>(t);
  }
  return best;
}

void Finish(DecodeResult& r, const Session& s) {
  const Vocabulary& vocab = s.engine().vocab();
  std::vector<TokenId> text_ids;
  for (TokenId t : r.tokens) {
    if (t != vocab.eos()) text_ids.push_back(t);
  }
  r.text = vocab.decode(text_ids);
  r.complete = s.finished() && s.is_complete();
  r.truncated = !s.finished();
}

}  // namespace

std::vector<double> softmax_prior(std::span<const double> probs, const Mask& mask, double tau) {
  if (!(tau > 0)) throw Error(ErrorKind::kInvalidArgument, "temperature must be positive");
  std::vector<double> out(probs.size(), 0.0);
  double max_logit = -INFINITY;
  for (size_t t = 0; t < probs.size(); ++t) {
    if (mask.bits[t] && probs[t] > 0) max_logit = std::max(max_logit, std::log(probs[t]) / tau);
  }
  double z = 0;
  size_t admitted = 0;
  for (size_t t = 0; t < probs.size(); ++t) {
    if (!mask.bits[t]) continue;
    ++admitted;
    if (probs[t] > 0) {
      out[t] = std::exp(std::log(probs[t]) / tau - max_logit);
      z += out[t];
    }
  }
  if (admitted == 0) throw Error(ErrorKind::kDeadSession, "prior over an empty mask");
  for (size_t t = 0; t < probs.size(); ++t) {
    if (!mask.bits[t]) continue;
    out[t] = z > 0 ? out[t] / z : 1.0 / static_cast<double>(admitted);
  }
  return out;
}

double geometric_mean(std::span<const double> probs) {
  if (probs.empty()) return 1.0;
  double sum = 0;
  for (double p : probs) sum += SafeLog(p);
  return std::exp(sum / static_cast<double>(probs.size()));
}

// ---------------------------------------------------------------------------
// Greedy
// ---------------------------------------------------------------------------

namespace {

// Greedy continuation of `s`; appends to `tokens` and the per-token
// unmodified probabilities to `probs`.
void GreedyRun(const LanguageModel& model, Session& s, std::span<const TokenId> prompt, std::vector<TokenId>& tokens,
               std::vector<double>& probs, size_t* mask_calls) {
  while (!s.finished() && !OutOfBudget(s)) {
    Mask mask = StepMask(s);
    ++*mask_calls;
    if (mask.none()) break;
    std::vector<double> p = model.next_distribution(prompt, tokens);
    TokenId t = MaskedArgmax(p, mask);
    s.advance(t);
    tokens.push_back(t);
    probs.push_back(p[t]);
  }
}

}  // namespace

DecodeResult greedy_decode(const LanguageModel& model, Session session, std::span<const TokenId> prompt) {
  DecodeResult r;
  std::vector<double> probs;
  GreedyRun(model, session, prompt, r.tokens, probs, &r.mask_calls);
  for (double p : probs) r.log_prob += SafeLog(p);
  Finish(r, session);
  return r;
}

// ---------------------------------------------------------------------------
// Beam search
// ---------------------------------------------------------------------------

DecodeResult beam_search(const LanguageModel& model, const Session& session, std::span<const TokenId> prompt,
                         BeamConfig config) {
  if (config.beams < 1) throw Error(ErrorKind::kInvalidArgument, "beam width must be at least 1");
  struct Hypothesis {
    Session session;
    std::vector<TokenId> tokens;
    double score = 0;     // sum of masked, renormalized log-probabilities
    double log_prob = 0;  // sum of unmodified log-probabilities
    double normalized() const { return tokens.empty() ? 0.0 : score / static_cast<double>(tokens.size()); }
  };
  struct Candidate {
    size_t parent;
    TokenId token;
    double score;
    double log_prob;
    double normalized;
  };
  const TokenId eos = session.engine().vocab().eos();
  size_t mask_calls = 0;
  std::vector<Hypothesis> live{{session, {}, 0, 0}};
  std::vector<Hypothesis> pool;

  while (!live.empty()) {
    std::vector<Candidate> candidates;
    for (size_t h = 0; h < live.size(); ++h) {
      const Hypothesis& hyp = live[h];
      if (OutOfBudget(hyp.session)) {
        pool.push_back(hyp);  // truncated
        continue;
      }
      Mask mask = StepMask(hyp.session);
      ++mask_calls;
      if (mask.none()) {
        pool.push_back(hyp);
        continue;
      }
      std::vector<double> p = model.next_distribution(prompt, hyp.tokens);
      double z = 0;
      for (size_t t = 0; t < p.size(); ++t) z += mask.bits[t] ? p[t] : 0.0;
      const double admitted = static_cast<double>(mask.count());
      for (size_t t = 0; t < p.size(); ++t) {
        if (!mask.bits[t]) continue;
        double renormalized = z > 0 ? p[t] / z : 1.0 / admitted;
        double score = hyp.score + SafeLog(renormalized);
        candidates.push_back({h, static_cast<TokenId>(t), score, hyp.log_prob + SafeLog(p[t]),
                              score / static_cast<double>(hyp.tokens.size() + 1)});
      }
    }
    const size_t keep = std::min(config.beams, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.normalized != b.normalized) return a.normalized > b.normalized;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    for (size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      Hypothesis child{live[c.parent].session, live[c.parent].tokens, c.score, c.log_prob};
      child.session.advance(c.token);
      child.tokens.push_back(c.token);
      (c.token == eos ? pool : next).push_back(std::move(child));
    }
    live = std::move(next);
  }

  // Complete hypotheses first, then the best normalized score; earliest wins ties.
  const Hypothesis* best = nullptr;
  for (const Hypothesis& h : pool) {
    if (best == nullptr) {
      best = &h;
      continue;
    }
    bool h_complete = h.session.finished() && h.session.is_complete();
    bool b_complete = best->session.finished() && best->session.is_complete();
    if (h_complete != b_complete) {
      if (h_complete) best = &h;
    } else if (h.normalized() > best->normalized()) {
      best = &h;
    }
  }
  DecodeResult r;
  if (best == nullptr) {
    Finish(r, session);
    return r;
  }
  r.tokens = best->tokens;
  r.log_prob = best->log_prob;
  r.mask_calls = mask_calls;
  Finish(r, best->session);
  return r;
}

// ---------------------------------------------------------------------------
// MCTS
// ---------------------------------------------------------------------------

namespace {

struct SearchNode {
  TokenId token = -1;  // edge from the parent
  double prior = 0;
  size_t visits = 0;
  double q = 0;  // best value observed through this edge
  std::unique_ptr<Session> session;  // materialized on first visit
  double log_sum = 0;  // unmodified log-probabilities of all generated tokens
  size_t depth = 0;    // generated tokens
  double edge_prob = 0;
  bool expanded = false;
  std::vector<std::unique_ptr<SearchNode>> children;

  bool terminal() const { return session->finished() || session->generated() >= session->budget(); }
};

class TreeSearch {
 public:
  TreeSearch(const LanguageModel& model, std::span<const TokenId> prompt, const MctsConfig& cfg, MctsStats& stats)
      : model_(model), prompt_(prompt), cfg_(cfg), stats_(stats) {}

  // Tokens generated along the path root..node, preceded by the committed ones.
  std::vector<TokenId> committed;
  size_t mask_calls = 0;

  void Expand(SearchNode& node, const std::vector<TokenId>& context) {
    node.expanded = true;
    Mask mask = StepMask(*node.session);
    ++mask_calls;
    if (mask.none()) return;
    std::vector<double> p = model_.next_distribution(prompt_, context);
    std::vector<double> prior = softmax_prior(p, mask, cfg_.temperature);
    for (size_t t = 0; t < p.size(); ++t) {
      if (!mask.bits[t]) continue;
      auto child = std::make_unique<SearchNode>();
      child->token = static_cast<TokenId>(t);
      child->prior = prior[t];
      child->edge_prob = p[t];
      node.children.push_back(std::move(child));
    }
  }

  SearchNode* Select(SearchNode& node) const {
    double sum_n = 0;
    for (const auto& c : node.children) sum_n += static_cast<double>(c->visits);
    SearchNode* best = nullptr;
    double best_score = 0;
    for (const auto& c : node.children) {
      double score = puct_score(c->q, c->prior, sum_n, static_cast<double>(c->visits), cfg_.c_puct);
      // Ties (always the case before any visit) go to the higher prior, then the lower id.
      if (best == nullptr || score > best_score || (score == best_score && c->prior > best->prior)) {
        best = c.get();
        best_score = score;
      }
    }
    return best;
  }

  void Materialize(const SearchNode& parent, SearchNode& child) {
    if (child.session) return;
    child.session = std::make_unique<Session>(*parent.session);
    child.session->advance(child.token);
    child.log_sum = parent.log_sum + SafeLog(child.edge_prob);
    child.depth = parent.depth + 1;
  }

  double Simulate(const SearchNode& leaf, std::vector<TokenId> context) {
    Session s = *leaf.session;
    std::vector<double> probs;
    size_t before = context.size();
    if (!leaf.terminal()) GreedyRun(model_, s, prompt_, context, probs, &mask_calls);
    stats_.rollout_tokens += context.size() - before;
    double log_sum = leaf.log_sum;
    for (double p : probs) log_sum += SafeLog(p);
    size_t n = leaf.depth + probs.size();
    return n == 0 ? 1.0 : std::exp(log_sum / static_cast<double>(n));
  }

  void Trial(SearchNode& root) {
    std::vector<SearchNode*> path{&root};
    std::vector<TokenId> context = committed;
    SearchNode* node = &root;
    while (!node->terminal()) {
      if (!node->expanded) Expand(*node, context);
      if (node->children.empty()) break;
      SearchNode* child = Select(*node);
      Materialize(*node, *child);
      context.push_back(child->token);
      path.push_back(child);
      node = child;
      if (child->visits == 0) break;  // newly expanded leaf
    }
    double value = Simulate(*node, context);
    for (SearchNode* n : path) {
      ++n->visits;
      n->q = std::max(n->q, value);
    }
    ++stats_.simulations;
  }

 private:
  const LanguageModel& model_;
  std::span<const TokenId> prompt_;
  const MctsConfig& cfg_;
  MctsStats& stats_;
};

}  // namespace

DecodeResult mcts_decode(const LanguageModel& model, const Session& session, std::span<const TokenId> prompt,
                         MctsConfig config, MctsStats* stats) {
  if (config.trials < 1 || config.c_puct < 0 || !(config.temperature > 0)) {
    throw Error(ErrorKind::kInvalidArgument, "mcts needs trials >= 1, c_puct >= 0 and tau > 0");
  }
  MctsStats local;
  MctsStats& st = stats != nullptr ? *stats : local;
  st = MctsStats{};
  TreeSearch search(model, prompt, config, st);

  auto root = std::make_unique<SearchNode>();
  root->session = std::make_unique<Session>(session);
  DecodeResult r;
  bool first = true;
  while (!root->terminal()) {
    for (size_t i = 0; i < config.trials; ++i) search.Trial(*root);
    if (root->children.empty()) break;
    // Commit the child with the best observed value; visits then id break ties.
    SearchNode* best = nullptr;
    for (const auto& c : root->children) {
      if (c->visits == 0) continue;
      if (best == nullptr || c->q > best->q || (c->q == best->q && c->visits > best->visits)) best = c.get();
    }
    if (first) {
      st.root_value = best->q;
      first = false;
    }
    std::unique_ptr<SearchNode> next;
    for (auto& c : root->children) {
      if (c.get() == best) next = std::move(c);
    }
    root = std::move(next);
    search.committed.push_back(root->token);
    ++st.steps;
  }
  r.tokens = search.committed;
  r.log_prob = root->log_sum;
  r.mask_calls = search.mask_calls;
  Finish(r, *root->session);
  return r;
}

// ---------------------------------------------------------------------------
// Strategy plumbing
// ---------------------------------------------------------------------------

std::string Strategy::to_string() const {
  switch (kind) {
    case Kind::kGreedy:
      return "greedy";
    case Kind::kBeam:
      return "beam:" + std::to_string(beam.beams);
    case Kind::kMcts: {
      auto fmt = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
      };
      return "mcts:" + std::to_string(mcts.trials) + "," + fmt(mcts.c_puct) + "," + fmt(mcts.temperature);
    }
  }
  return "?";
}

Strategy parse_strategy(std::string_view spec) {
  Strategy s;
  auto colon = spec.find(':');
  std::string_view kind = spec.substr(0, colon);
  std::string arg = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
  try {
    if (kind == "greedy" && arg.empty()) {
      s.kind = Strategy::Kind::kGreedy;
      return s;
    }
    if (kind == "beam") {
      s.kind = Strategy::Kind::kBeam;
      if (!arg.empty()) s.beam.beams = std::stoul(arg);
      if (s.beam.beams < 1) throw Error(ErrorKind::kInvalidArgument, "beam width must be at least 1");
      return s;
    }
    if (kind == "mcts") {
      s.kind = Strategy::Kind::kMcts;
      std::vector<std::string> parts;
      size_t start = 0;
      while (!arg.empty() && start <= arg.size()) {
        size_t comma = arg.find(',', start);
        if (comma == std::string::npos) comma = arg.size();
        parts.push_back(arg.substr(start, comma - start));
        start = comma + 1;
      }
      if (parts.size() > 3) throw Error(ErrorKind::kInvalidArgument, "mcts takes at most trials,c_puct,tau");
      if (parts.size() > 0) s.mcts.trials = std::stoul(parts[0]);
      if (parts.size() > 1) s.mcts.c_puct = std::stod(parts[1]);
      if (parts.size() > 2) s.mcts.temperature = std::stod(parts[2]);
      if (s.mcts.trials < 1 || s.mcts.c_puct < 0 || !(s.mcts.temperature > 0)) {
        throw Error(ErrorKind::kInvalidArgument, "mcts needs trials >= 1, c_puct >= 0 and tau > 0");
      }
      return s;
    }
  } catch (const std::logic_error&) {
    // std::stoul / std::stod failures fall through to the error below.
  }
  throw Error(ErrorKind::kInvalidArgument, "bad strategy '" + std::string(spec) + "'");
}

DecodeResult run_strategy(const Strategy& strategy, const LanguageModel& model, const Session& session,
                          std::span<const TokenId> prompt, MctsStats* stats) {
  switch (strategy.kind) {
    case Strategy::Kind::kGreedy:
      return greedy_decode(model, session, prompt);
    case Strategy::Kind::kBeam:
      return beam_search(model, session, prompt, strategy.beam);
    case Strategy::Kind::kMcts:
      return mcts_decode(model, session, prompt, strategy.mcts, stats);
  }
  return {};
}

}  // namespace truncproof
