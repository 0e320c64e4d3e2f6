/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/eval.h
 * \brief Evaluation harness: budget policy, task files, Syntax / Exact-match
 * reports and their CSV form.
 */
#ifndef TRUNCPROOF_EVAL_H_
#define TRUNCPROOF_EVAL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "truncproof/decoding.h"
#include "truncproof/engine.h"

namespace truncproof {

struct BudgetPolicy {
  enum class Mode { kFixed, kRatio };
  Mode mode = Mode::kFixed;
  size_t fixed = 0;
  double ratio = 1.0;

  static BudgetPolicy Fixed(size_t n) { return {Mode::kFixed, n, 1.0}; }
  static BudgetPolicy Ratio(double e) { return {Mode::kRatio, 0, e}; }

  /*! \brief N_max = floor(L_GT * e) in ratio mode. Throws kInvalidArgument when e < 1 or the budget is 0. */
  size_t budget_for(size_t reference_length) const;
};

struct Task {
  std::string id;
  std::string prompt;
  std::string output;     // ground truth
  size_t l_gt = 0;        // ground-truth length in tokens
};

/*!
 * \brief One JSON object per line: {"id", "prompt", "output", "l_gt"}. When
 * l_gt is missing it is derived as |encode(output)| + 1 for eos. Throws
 * kTaskFormat naming the line.
 */
std::vector<Task> parse_tasks(std::string_view jsonl, const Vocabulary& vocab);
std::vector<Task> load_tasks(const std::string& path, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Structural JSON equality
// ---------------------------------------------------------------------------

struct JsonValue {
  using Array = std::vector<JsonValue>;
  using Object = std::map<std::string, JsonValue>;
  std::variant<std::nullptr_t, bool, double, std::string, Array, Object> value;
  bool operator==(const JsonValue&) const = default;
};

/*! \brief Strict RFC 8259 value parser; nullopt on any syntax error. Duplicate keys keep the last. */
std::optional<JsonValue> parse_json_value(std::string_view text);

/*! \brief Whitespace-insensitive structural equality; byte equality when either side is not JSON. */
bool outputs_match(std::string_view produced, std::string_view expected);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EvalRecord {
  std::string task_id;
  std::string strategy;
  std::string mode;
  double ratio = 0;
  size_t budget = 0;
  size_t tokens = 0;  // eos included
  bool complete = false;
  bool exact_match = false;
  std::string output;
  double ms_per_token = 0;  // decode latency; text report only, kept out of the CSV

  bool operator==(const EvalRecord& o) const {
    return task_id == o.task_id && strategy == o.strategy && mode == o.mode && ratio == o.ratio &&
           budget == o.budget && tokens == o.tokens && complete == o.complete && exact_match == o.exact_match &&
           output == o.output;
  }
};

struct EvalAggregate {
  std::string strategy;
  std::string mode;
  double ratio = 0;
  size_t tasks = 0;
  double syntax_pct = 0;
  double exact_match_pct = 0;
  double mean_tokens = 0;
};

struct EvalReport {
  std::vector<EvalRecord> records;

  /*! \brief One row per (strategy, mode, ratio) in first-seen order. */
  std::vector<EvalAggregate> aggregates() const;
  std::string to_csv() const;
  std::string to_text() const;
  std::string to_json_lines() const;
};

/*! \brief Inverse of EvalReport::to_csv. Throws kTaskFormat. */
EvalReport parse_report_csv(std::string_view csv);

struct EvalConfig {
  std::vector<Strategy> strategies;
  std::vector<double> ratios;
  std::vector<MaskMode> modes{MaskMode::kFull};
  bool parallel = true;
};

/*!
 * \brief Runs every (task, strategy, mode, ratio) cell. Cells are independent
 * and may run concurrently; the record order is fixed regardless.
 */
EvalReport run_eval(const std::shared_ptr<const Engine>& engine, const LanguageModel& model,
                    const std::vector<Task>& tasks, const EvalConfig& config);

}  // namespace truncproof

#endif  // TRUNCPROOF_EVAL_H_
