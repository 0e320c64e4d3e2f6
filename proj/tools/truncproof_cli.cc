/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof_cli.cc
 * \brief Command-line front end: precompute, generate, mask, eval.
 *
 * Exit codes: 0 ok, 1 generation incomplete, 2 grammar error, 3 I/O or
 * input error.
 */
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "truncproof/decoding.h"
#include "truncproof/engine.h"
#include "truncproof/error.h"
#include "truncproof/eval.h"
#include "truncproof/grammar.h"
#include "truncproof/precompute.h"
#include "truncproof/vocabulary.h"

namespace tp = truncproof;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIncomplete = 1;
constexpr int kExitGrammar = 2;
constexpr int kExitInput = 3;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tp::Error(tp::ErrorKind::kIo, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct EngineOptions {
  std::string grammar;
  std::string vocab;
  std::string cache;
  bool serial = false;
};

void AddEngineOptions(CLI::App* cmd, EngineOptions& o, bool cache_required) {
  cmd->add_option("--grammar", o.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--vocab", o.vocab, "Vocabulary JSON file")->required()->check(CLI::ExistingFile);
  auto* cache = cmd->add_option("--cache", o.cache, "Cost-table cache file");
  if (cache_required) cache->required();
  cmd->add_flag("--serial", o.serial, "Use the single-threaded kernels");
}

/*! \brief Loads the cache when one is given and present; otherwise precomputes in memory. */
std::shared_ptr<const tp::Engine> LoadEngine(const EngineOptions& o) {
  const std::string grammar_text = ReadFile(o.grammar);
  const std::string vocab_text = ReadFile(o.vocab);
  tp::PrecomputeOptions options;
  options.execution = o.serial ? tp::Execution::kSerial : tp::Execution::kParallel;
  if (o.cache.empty() || !std::filesystem::exists(o.cache)) return tp::Engine::from_sources(grammar_text, vocab_text, options);
  const uint64_t gh = tp::content_hash(grammar_text);
  const uint64_t vh = tp::content_hash(vocab_text);
  tp::CostTables tables = tp::load_cache(o.cache, gh, vh);
  return std::make_shared<const tp::Engine>(tp::parse_grammar(grammar_text), tp::parse_vocabulary(vocab_text),
                                            std::move(tables), gh, vh);
}

struct ModeFlags {
  bool full = false;
  bool grammar_only = false;
  bool no_constraint = false;

  tp::MaskMode mode() const {
    if (grammar_only) return tp::MaskMode::kGrammarOnly;
    if (no_constraint) return tp::MaskMode::kNoConstraint;
    return tp::MaskMode::kFull;
  }
};

void AddModeFlags(CLI::App* cmd, ModeFlags& m) {
  auto* full = cmd->add_flag("--full", m.full, "Grammar and budget constraints (default)");
  auto* grammar = cmd->add_flag("--grammar-only", m.grammar_only, "Grammar constraint only");
  auto* none = cmd->add_flag("--no-constraint", m.no_constraint, "No constraint at all");
  full->excludes(grammar)->excludes(none);
  grammar->excludes(none);
}

/*! \brief `random` without a seed takes the --seed value. */
std::string ResolveModelSpec(const std::string& spec, uint64_t seed) {
  if (spec == "random") return "random:" + std::to_string(seed);
  return spec;
}

std::string TokenLabel(const tp::Vocabulary& vocab, tp::TokenId t) {
  if (t == vocab.eos()) return "<eos>";
  return "'" + tp::escape_token(vocab.text(t)) + "'";
}

std::string CostText(tp::Cost c) { return c >= tp::kInfiniteCost ? std::string("inf") : std::to_string(c); }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int RunPrecompute(const EngineOptions& o) {
  const std::string grammar_text = ReadFile(o.grammar);
  const std::string vocab_text = ReadFile(o.vocab);
  const auto start = std::chrono::steady_clock::now();
  tp::Grammar g = tp::parse_grammar(grammar_text);
  tp::Vocabulary vocab = tp::parse_vocabulary(vocab_text);
  tp::Ll1Table table = tp::build_ll1_table(g);
  tp::PrecomputeOptions options;
  options.execution = o.serial ? tp::Execution::kSerial : tp::Execution::kParallel;
  options.grammar_hash = tp::content_hash(grammar_text);
  options.vocab_hash = tp::content_hash(vocab_text);
  tp::CostTables tables = tp::build_cost_tables(g, table, vocab, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  tp::save_cache(tables, o.cache);
  std::printf("terminals %zu\npairs %zu\nautomaton states %zu\ntoken-map entries %zu\nvocabulary %zu\n",
              tables.num_terminals(), tables.num_pairs(), tables.total_states(), tables.total_token_entries(),
              vocab.size());
  std::printf("precompute %.3f s\nwrote %s\n", seconds, o.cache.c_str());
  return kExitOk;
}

struct GenerateOptions {
  std::string model = "uniform";
  std::string strategy = "greedy";
  std::string prompt;
  std::string prompt_file;
  size_t budget = 0;
  double ratio = 0;
  size_t reference_length = 0;
  uint64_t seed = 0;
  std::string format = "text";
};

int RunGenerate(const EngineOptions& eo, const GenerateOptions& go, const ModeFlags& mf) {
  auto engine = LoadEngine(eo);
  const tp::Vocabulary& vocab = engine->vocab();
  size_t budget = go.budget;
  if (go.ratio > 0) {
    if (go.reference_length == 0) throw tp::Error(tp::ErrorKind::kInvalidArgument, "--ratio needs --reference-length");
    budget = tp::BudgetPolicy::Ratio(go.ratio).budget_for(go.reference_length);
  }
  if (budget == 0) throw tp::Error(tp::ErrorKind::kInvalidArgument, "give --budget or --ratio");
  std::string prompt_text = go.prompt_file.empty() ? go.prompt : ReadFile(go.prompt_file);
  std::vector<tp::TokenId> prompt = prompt_text.empty() ? std::vector<tp::TokenId>{} : vocab.encode(prompt_text);

  auto model = tp::make_model(ResolveModelSpec(go.model, go.seed), vocab);
  tp::Strategy strategy = tp::parse_strategy(go.strategy);
  tp::MctsStats stats;
  const auto start = std::chrono::steady_clock::now();
  tp::Session session = tp::Session::create(engine, budget, mf.mode());
  tp::DecodeResult r = tp::run_strategy(strategy, *model, session, prompt, &stats);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const bool ok = r.complete && r.tokens.size() <= budget;

  if (go.format == "json-lines") {
    nlohmann::json line = {{"output", r.text},
                           {"tokens", r.tokens.size()},
                           {"budget", budget},
                           {"complete", ok},
                           {"strategy", strategy.to_string()},
                           {"mode", tp::MaskModeName(mf.mode())},
                           {"simulations", stats.simulations},
                           {"ms", ms}};
    std::printf("%s\n", line.dump().c_str());
  } else if (go.format == "csv") {
    std::printf("tokens,budget,complete,strategy,mode,simulations,output\n%zu,%zu,%d,%s,%s,%zu,\"", r.tokens.size(),
                budget, ok ? 1 : 0, strategy.to_string().c_str(), tp::MaskModeName(mf.mode()), stats.simulations);
    for (char c : r.text) {
      if (c == '"') std::putchar('"');
      std::putchar(c);
    }
    std::printf("\"\n");
  } else {
    std::printf("%s\n", r.text.c_str());
    std::printf("tokens %zu / budget %zu, complete %s, strategy %s, mode %s", r.tokens.size(), budget,
                ok ? "yes" : "no", strategy.to_string().c_str(), tp::MaskModeName(mf.mode()));
    if (strategy.kind == tp::Strategy::Kind::kMcts) {
      std::printf(", simulations %zu (%zu per token)", stats.simulations,
                  stats.steps == 0 ? size_t{0} : stats.simulations / stats.steps);
    }
    std::printf(", %.2f ms\n", ms);
  }
  return ok ? kExitOk : kExitIncomplete;
}

struct MaskOptions {
  std::string prefix;
  size_t budget = 0;
  bool admitted_only = false;
};

int RunMask(const EngineOptions& eo, const MaskOptions& mo, const ModeFlags& mf) {
  auto engine = LoadEngine(eo);
  const tp::Vocabulary& vocab = engine->vocab();
  const tp::Grammar& g = engine->grammar();
  std::vector<tp::TokenId> prefix = mo.prefix.empty() ? std::vector<tp::TokenId>{} : vocab.encode(mo.prefix);
  tp::Session s = tp::Session::replay(engine, mo.budget, prefix, mf.mode());
  if (s.broken()) throw tp::Error(tp::ErrorKind::kLexFailure, "prefix is not a valid prefix under the grammar");

  std::printf("prefix '%s' = %zu tokens, budget %zu, mode %s\n", tp::escape_token(mo.prefix).c_str(), prefix.size(),
              mo.budget, tp::MaskModeName(mf.mode()));
  std::printf("terminals:");
  for (tp::SymbolId a : s.terminals()) std::printf(" %s", std::string(g.name(a)).c_str());
  std::printf("\nremainder '%s'\n", tp::escape_token(s.remainder()).c_str());
  auto sequences = s.accept_sequences();
  std::printf("accept sequences:\n");
  for (size_t k = 0; k < sequences.size(); ++k) {
    const auto& a = sequences[k];
    std::string label(g.name(a.first));
    if (a.second != tp::kNoSymbol) label += " " + std::string(g.name(a.second));
    std::printf("  [%zu] (%s) d=%s\n", k, label.c_str(), CostText(a.d_cost).c_str());
  }

  tp::Mask mask = s.compute_mask_unchecked();
  std::printf("%-16s %-6s %-5s %5s %5s %5s %7s\n", "token", "admit", "seq", "i+1", "C", "d", "total");
  for (const tp::TokenVerdict& v : s.explain()) {
    if (mo.admitted_only && !v.admitted) continue;
    std::string seq = v.sequence < 0 ? std::string("-") : std::to_string(v.sequence);
    std::string total = "inf";
    if (v.completion < tp::kInfiniteCost && v.d_cost < tp::kInfiniteCost) {
      total = std::to_string(v.consumed + v.completion + v.d_cost);
    }
    if (v.token == vocab.eos()) {
      // eos is governed by the completion rule alone.
      std::printf("%-16s %-6s %-5s %5s %5s %5s %7s  complete %s\n", "<eos>", v.admitted ? "yes" : "no", "-",
                  CostText(v.consumed).c_str(), "-", "-", "-", s.is_complete() ? "yes" : "no");
      continue;
    }
    std::printf("%-16s %-6s %-5s %5s %5s %5s %7s\n", TokenLabel(vocab, v.token).c_str(), v.admitted ? "yes" : "no",
                seq.c_str(), CostText(v.consumed).c_str(), CostText(v.completion).c_str(), CostText(v.d_cost).c_str(),
                total.c_str());
  }
  std::printf("admitted %zu of %zu%s\n", mask.count(), vocab.size(),
              mf.mode() == tp::MaskMode::kFull ? " (admit iff total < budget)" : "");
  return kExitOk;
}

struct EvalOptions {
  std::string model = "uniform";
  std::string tasks;
  std::vector<std::string> strategies{"greedy"};
  std::vector<double> ratios{1.1};
  std::vector<std::string> modes;
  uint64_t seed = 0;
  std::string format = "text";
  std::string output;
  bool serial = false;
};

int RunEval(const EngineOptions& eo, const EvalOptions& vo, const ModeFlags& mf) {
  auto engine = LoadEngine(eo);
  auto model = tp::make_model(ResolveModelSpec(vo.model, vo.seed), engine->vocab());
  std::vector<tp::Task> tasks = tp::load_tasks(vo.tasks, engine->vocab());
  tp::EvalConfig config;
  for (const auto& s : vo.strategies) config.strategies.push_back(tp::parse_strategy(s));
  config.ratios = vo.ratios;
  if (vo.modes.empty()) {
    config.modes = {mf.mode()};
  } else {
    config.modes.clear();
    for (const auto& m : vo.modes) {
      auto mode = tp::ParseMaskMode(m);
      if (!mode) throw tp::Error(tp::ErrorKind::kInvalidArgument, "unknown mode '" + m + "'");
      config.modes.push_back(*mode);
    }
  }
  config.parallel = !vo.serial;
  tp::EvalReport report = tp::run_eval(engine, *model, tasks, config);

  std::string text;
  if (vo.format == "csv") {
    text = report.to_csv();
  } else if (vo.format == "json-lines") {
    text = report.to_json_lines();
  } else {
    text = report.to_text();
  }
  if (vo.output.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    std::ofstream out(vo.output, std::ios::binary);
    if (!out) throw tp::Error(tp::ErrorKind::kIo, "cannot write " + vo.output);
    out << text;
    if (!out) throw tp::Error(tp::ErrorKind::kIo, "cannot write " + vo.output);
  }
  // A full-mode cell that misses completion means the budget guarantee broke.
  for (const auto& r : report.records) {
    if (r.mode == tp::MaskModeName(tp::MaskMode::kFull) && !r.complete) return kExitIncomplete;
  }
  return kExitOk;
}

int ExitCodeFor(const tp::Error& e) {
  if (e.is_grammar_error()) return kExitGrammar;
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-aware grammar-constrained decoding"};
  app.require_subcommand(1);

  EngineOptions pre_engine, gen_engine, mask_engine, eval_engine;
  GenerateOptions gen;
  MaskOptions mask;
  EvalOptions eval;
  ModeFlags gen_mode, mask_mode, eval_mode;
  const std::vector<std::string> formats{"text", "csv", "json-lines"};

  auto* pre = app.add_subcommand("precompute", "Build and save the cost tables");
  AddEngineOptions(pre, pre_engine, true);

  auto* generate = app.add_subcommand("generate", "Decode one output under the mask");
  AddEngineOptions(generate, gen_engine, false);
  generate->add_option("--model", gen.model, "uniform | random[:seed] | ngram:<corpus> | scripted:<file> | "
                                             "verbose-bias:<factor>[:<corpus>]");
  generate->add_option("--strategy", gen.strategy, "greedy | beam:<b> | mcts:<trials>,<c_puct>,<tau>");
  auto* budget = generate->add_option("--budget", gen.budget, "Token budget, eos included");
  auto* ratio = generate->add_option("--ratio", gen.ratio, "Expansion ratio over --reference-length");
  budget->excludes(ratio);
  generate->add_option("--reference-length", gen.reference_length, "Reference length in tokens");
  auto* prompt = generate->add_option("--prompt", gen.prompt, "Prompt text");
  generate->add_option("--prompt-file", gen.prompt_file, "Prompt file")->excludes(prompt)->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "Seed for the random model");
  generate->add_option("--format", gen.format, "Output format")->check(CLI::IsMember(formats));
  AddModeFlags(generate, gen_mode);

  auto* mask_cmd = app.add_subcommand("mask", "Show the mask for a prefix with its cost terms");
  AddEngineOptions(mask_cmd, mask_engine, false);
  mask_cmd->add_option("--prefix", mask.prefix, "Generated text so far");
  mask_cmd->add_option("--budget", mask.budget, "Token budget, eos included")->required();
  mask_cmd->add_flag("--admitted-only", mask.admitted_only, "List admitted tokens only");
  AddModeFlags(mask_cmd, mask_mode);

  auto* eval_cmd = app.add_subcommand("eval", "Run a task file over strategies, modes and ratios");
  AddEngineOptions(eval_cmd, eval_engine, false);
  eval_cmd->add_option("--model", eval.model, "Language model spec");
  eval_cmd->add_option("--tasks", eval.tasks, "JSONL task file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--strategies", eval.strategies, "Strategies, space separated");
  eval_cmd->add_option("--ratios", eval.ratios, "Expansion ratios")->delimiter(',');
  eval_cmd->add_option("--modes", eval.modes, "full, grammar-only, no-constraint")->delimiter(',');
  eval_cmd->add_option("--seed", eval.seed, "Seed for the random model");
  eval_cmd->add_option("--format", eval.format, "Report format")->check(CLI::IsMember(formats));
  eval_cmd->add_option("--output", eval.output, "Write the report here instead of stdout");
  eval_cmd->add_flag("--serial-cells", eval.serial, "Run cells one at a time");
  AddModeFlags(eval_cmd, eval_mode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*pre) return RunPrecompute(pre_engine);
    if (*generate) return RunGenerate(gen_engine, gen, gen_mode);
    if (*mask_cmd) return RunMask(mask_engine, mask, mask_mode);
    if (*eval_cmd) return RunEval(eval_engine, eval, eval_mode);
  } catch (const tp::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", tp::ErrorKindName(e.kind()), e.what());
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}
