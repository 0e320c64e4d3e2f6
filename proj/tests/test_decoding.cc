#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.h"
#include "truncproof/decoding.h"
#include "truncproof/error.h"
#include "truncproof/oracle.h"

using namespace truncproof;

namespace {

std::string Scripted(const std::string& body) { return "{\"floor\": 0.01, " + body + "}"; }

double Sum(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("puct score and value") {
  CHECK(puct_score(0.5, 0.2, 4, 1, 5) == doctest::Approx(1.5));
  CHECK(geometric_mean(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.5));
  CHECK(geometric_mean(std::vector<double>{0.25, 1.0}) == doctest::Approx(0.5));
  CHECK(geometric_mean(std::vector<double>{}) == 1.0);
}

TEST_CASE("softmax prior") {
  Mask all{{1, 1}};
  std::vector<double> p{0.8, 0.2};
  std::vector<double> prior = softmax_prior(p, all, 2.0);
  CHECK(prior[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  CHECK(prior[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  std::vector<double> same = softmax_prior(p, all, 1.0);
  CHECK(same[0] == doctest::Approx(0.8));
  std::vector<double> flat = softmax_prior(std::vector<double>{0.7, 0.2, 0.1}, Mask{{1, 1, 1}}, 1e6);
  for (double v : flat) CHECK(std::abs(v - 1.0 / 3.0) < 1e-4);
  std::vector<double> masked = softmax_prior(std::vector<double>{0.7, 0.2, 0.1}, Mask{{0, 1, 1}}, 1.0);
  CHECK(masked[0] == 0.0);
  CHECK(masked[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("models produce distributions") {
  Vocabulary v = synthetic_json_vocabulary(300);
  std::vector<TokenId> context = v.encode("{\"a\": 1");
  const std::string corpus = test::DataPath("json_corpus.txt");
  for (const std::string spec : {std::string("uniform"), std::string("random:3"), "ngram:" + corpus,
                                 "verbose-bias:5:" + corpus, std::string("verbose-bias:2")}) {
    auto m = make_model(spec, v);
    std::vector<double> p = m->next_distribution({}, context);
    REQUIRE(p.size() == v.size());
    CHECK(std::abs(Sum(p) - 1.0) < 1e-9);
    CHECK(*std::min_element(p.begin(), p.end()) > 0.0);
    CHECK(p == m->next_distribution({}, context));
  }
  CHECK(make_model("random:3", v)->next_distribution({}, context) !=
        make_model("random:4", v)->next_distribution({}, context));
  CHECK_THROWS_AS(make_model("bogus", v), Error);
  CHECK_THROWS_AS(make_model("ngram", v), Error);
  CHECK_THROWS_AS(make_model("ngram:/nonexistent/corpus", v), Error);
}

TEST_CASE("verbosity bias boosts whitespace") {
  Vocabulary v = synthetic_json_vocabulary(300);
  auto base = std::make_shared<UniformModel>(v.size());
  VerboseBiasModel m(v, base, 10.0);
  std::vector<double> p = m.next_distribution({}, {});
  CHECK(p[test::Id(v, "  ")] == doctest::Approx(10.0 * p[test::Id(v, "a")]));
  CHECK(p[test::Id(v, "\n")] > p[test::Id(v, "{")]);
  CHECK(p[v.eos()] == doctest::Approx(p[test::Id(v, "a")]));
}

TEST_CASE("ngram model follows its corpus") {
  Vocabulary v({"a", "b", "c", ""}, 3);
  NgramModel m(v, "ab\nab\nab\n");
  std::vector<double> after_a = m.next_distribution({}, std::vector<TokenId>{0});
  CHECK(after_a[1] > 0.9);
  std::vector<double> after_ab = m.next_distribution({}, std::vector<TokenId>{0, 1});
  CHECK(after_ab[3] > 0.9);
}

TEST_CASE("scripted model rules") {
  Vocabulary v = test::ParenVocab();
  ScriptedModel m(v, Scripted(R"j("rules": [{"prefix": "", "probs": {"(": 0.9}},
                                          {"prompt": "x", "prefix": "", "probs": {"x": 0.9}},
                                          {"prefix": "x", "probs": {"<eos>": 1.0}}],
                                "default": {")": 1.0})j"));
  CHECK(m.next_distribution({}, {})[1] > 0.85);
  CHECK(m.next_distribution(std::vector<TokenId>{0}, {})[0] > 0.85);
  CHECK(m.next_distribution({}, std::vector<TokenId>{0})[4] > 0.95);
  CHECK(m.next_distribution({}, std::vector<TokenId>{2, 2})[2] > 0.95);
  CHECK_THROWS_AS(ScriptedModel(v, R"({"default": {"zz": 1}})"), Error);
  CHECK_THROWS_AS(ScriptedModel(v, "nope"), Error);
}

TEST_CASE("greedy on the parenthesis grammar") {
  auto e = test::ParenEngine();
  const Vocabulary& v = e->vocab();
  ScriptedModel open(v, Scripted(R"("default": {"(": 0.9})"));
  DecodeResult r = greedy_decode(open, Session::create(e, 3), {});
  CHECK((r.text == "x" || r.text == "(x)"));
  CHECK(r.complete);
  CHECK_FALSE(r.truncated);
  CHECK(r.tokens.size() <= 3);

  ScriptedModel stop(v, Scripted(R"("default": {"<eos>": 1.0})"));
  Session done = Session::replay(e, 4, std::vector<TokenId>{0});
  CHECK(greedy_decode(stop, done, {}).tokens == std::vector<TokenId>{4});

  UniformModel uniform(v.size());
  CHECK(greedy_decode(uniform, Session::create(e, 2), {}).tokens == std::vector<TokenId>{0, 4});
  try {
    greedy_decode(uniform, Session::create(e, 1), {});
    FAIL("expected budget exhaustion");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kBudgetExhausted);
  }
}

TEST_CASE("wide beam finds the best-scoring valid sequence") {
  auto e = test::ParenEngine();
  const Vocabulary& v = e->vocab();
  ScriptedModel deep(v, Scripted(R"j("default": {"(": 0.5, "(x": 0.3, ")": 0.15, "x": 0.05})j"));
  CfgOracle oracle(e->grammar());
  const size_t n_max = 6;

  // Exhaustive search; renormalization uses the oracle's mask.
  double best = -1e300;
  std::vector<TokenId> best_tokens;
  std::function<void(std::vector<TokenId>&, double)> walk = [&](std::vector<TokenId>& prefix, double score) {
    std::vector<uint8_t> mask = oracle.brute_force_mask(v, prefix, n_max);
    std::vector<double> p = deep.next_distribution({}, prefix);
    double z = 0;
    for (size_t t = 0; t < p.size(); ++t) z += mask[t] ? p[t] : 0.0;
    for (size_t t = 0; t < p.size(); ++t) {
      if (!mask[t]) continue;
      prefix.push_back(static_cast<TokenId>(t));
      double s = score + std::log(p[t] / z);
      if (static_cast<TokenId>(t) == v.eos()) {
        double normalized = s / static_cast<double>(prefix.size());
        if (normalized > best) {
          best = normalized;
          best_tokens = prefix;
        }
      } else {
        walk(prefix, s);
      }
      prefix.pop_back();
    }
  };
  std::vector<TokenId> empty;
  walk(empty, 0.0);

  DecodeResult r = beam_search(deep, Session::create(e, n_max), {}, BeamConfig{64});
  CHECK(r.complete);
  CHECK(r.tokens == best_tokens);
}

TEST_CASE("beam of one is greedy") {
  auto e = test::JsonEngine(300);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RandomModel m(e->vocab().size(), seed);
    Session s = Session::create(e, 6 + seed % 10);
    CHECK(beam_search(m, s, {}, BeamConfig{1}).tokens == greedy_decode(m, s, {}).tokens);
  }
}

TEST_CASE("mcts runs the configured trials per token") {
  auto e = test::ParenEngine();
  RandomModel m(e->vocab().size(), 7);
  MctsStats stats;
  DecodeResult r = mcts_decode(m, Session::create(e, 6), {}, MctsConfig{5.0, 2.0, 20}, &stats);
  CHECK(r.complete);
  CHECK(stats.steps == r.tokens.size());
  CHECK(stats.simulations == 20 * stats.steps);
  CHECK(stats.root_value > 0.0);
  CHECK(stats.root_value <= 1.0);
  CHECK_THROWS_AS(mcts_decode(m, Session::create(e, 6), {}, MctsConfig{5.0, 0.0, 20}), Error);
}

TEST_CASE("every decoder output is complete within budget") {
  auto paren = test::ParenEngine();
  auto mini = Engine::build(parse_grammar(test::Data("mini_json.grammar")),
                            load_vocabulary(test::DataPath("mini_json_vocab.json")));
  const std::vector<Strategy> strategies{parse_strategy("greedy"), parse_strategy("beam:3"),
                                         parse_strategy("mcts:4,5,2")};
  size_t runs = 0;
  for (const auto& engine : {paren, mini}) {
    for (uint64_t seed = 0; seed < 60; ++seed) {
      RandomModel m(engine->vocab().size(), seed);
      const size_t budget = 2 + seed % 9;
      for (const Strategy& s : strategies) {
        DecodeResult r = run_strategy(s, m, Session::create(engine, budget), {});
        ++runs;
        CHECK(r.complete);
        CHECK(r.tokens.size() <= budget);
        CHECK(r.tokens.back() == engine->vocab().eos());
        CHECK(cfg_membership(engine->grammar(), r.text) == Membership::kMember);
        CHECK(r.tokens == run_strategy(s, m, Session::create(engine, budget), {}).tokens);
      }
    }
  }
  CHECK(runs == 360);
}

TEST_CASE("baseline modes can truncate") {
  auto e = test::JsonEngine(300);
  VerboseBiasModel m(e->vocab(), std::make_shared<UniformModel>(e->vocab().size()), 50.0);
  DecodeResult grammar_only = greedy_decode(m, Session::create(e, 8, MaskMode::kGrammarOnly), {});
  CHECK(grammar_only.truncated);
  CHECK_FALSE(grammar_only.complete);
  DecodeResult full = greedy_decode(m, Session::create(e, 8), {});
  CHECK(full.complete);
}

TEST_CASE("strategy specs") {
  CHECK(parse_strategy("greedy").kind == Strategy::Kind::kGreedy);
  CHECK(parse_strategy("beam:10").beam.beams == 10);
  Strategy m = parse_strategy("mcts:20,5,2");
  CHECK(m.mcts.trials == 20);
  CHECK(m.mcts.c_puct == 5.0);
  CHECK(m.mcts.temperature == 2.0);
  CHECK(m.to_string() == "mcts:20,5,2");
  CHECK(parse_strategy("beam:3").to_string() == "beam:3");
  CHECK_THROWS_AS(parse_strategy("beam:0"), Error);
  CHECK_THROWS_AS(parse_strategy("sample"), Error);
  CHECK_THROWS_AS(parse_strategy("mcts:1,2,3,4"), Error);
  CHECK_THROWS_AS(parse_strategy("mcts:x"), Error);
}
