/*!
 *  Copyright (c) 2026 by Contributors
 * \file eval.cc
 */
#include "truncproof/eval.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "truncproof/error.h"

namespace truncproof {

size_t BudgetPolicy::budget_for(size_t reference_length) const {
  size_t n = fixed;
  if (mode == Mode::kRatio) {
    if (!(ratio >= 1.0)) throw Error(ErrorKind::kInvalidArgument, "expansion ratio must be at least 1.0");
    // The epsilon keeps products such as 100 * 1.1 from landing just below an integer.
    n = static_cast<size_t>(std::floor(static_cast<double>(reference_length) * ratio + 1e-9));
  }
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "token budget must be at least 1");
  return n;
}

std::vector<Task> parse_tasks(std::string_view jsonl, const Vocabulary& vocab) {
  std::vector<Task> tasks;
  size_t line_no = 0;
  size_t start = 0;
  while (start < jsonl.size()) {
    size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto fail = [&](const std::string& what) {
      return Error(ErrorKind::kTaskFormat, "task file line " + std::to_string(line_no) + ": " + what);
    };
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (!doc.is_object() || !doc.contains("output") || !doc["output"].is_string()) {
      throw fail("expected an object with a string \"output\"");
    }
    Task t;
    t.id = doc.contains("id") ? (doc["id"].is_string() ? doc["id"].get<std::string>() : doc["id"].dump())
                              : std::to_string(tasks.size());
    t.prompt = doc.value("prompt", std::string());
    t.output = doc["output"].get<std::string>();
    if (doc.contains("l_gt")) {
      if (!doc["l_gt"].is_number_unsigned()) throw fail("\"l_gt\" must be a positive integer");
      t.l_gt = doc["l_gt"].get<size_t>();
    } else {
      try {
        t.l_gt = vocab.encode(t.output).size() + 1;
      } catch (const Error& e) {
        throw fail(std::string("cannot tokenize output: ") + e.what());
      }
    }
    if (t.l_gt == 0) throw fail("\"l_gt\" must be positive");
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<Task> load_tasks(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read task file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tasks(buffer.str(), vocab);
}

// ---------------------------------------------------------------------------
// Minimal JSON value parser
// ---------------------------------------------------------------------------

namespace {

class JsonReader {
 public:
  explicit JsonReader(std::string_view s) : s_(s) {}

  std::optional<JsonValue> Document() {
    SkipWs();
    auto v = Value(0);
    SkipWs();
    if (!v || i_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  static constexpr int kMaxDepth = 512;

  void SkipWs() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
  }
  bool Eat(char c) {
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  bool Literal(std::string_view word) {
    if (s_.substr(i_, word.size()) != word) return false;
    i_ += word.size();
    return true;
  }

  std::optional<JsonValue> Value(int depth) {
    if (depth > kMaxDepth || i_ >= s_.size()) return std::nullopt;
    char c = s_[i_];
    if (c == '{') return Object(depth);
    if (c == '[') return Array(depth);
    if (c == '"') {
      auto str = String();
      if (!str) return std::nullopt;
      return JsonValue{std::move(*str)};
    }
    if (Literal("true")) return JsonValue{true};
    if (Literal("false")) return JsonValue{false};
    if (Literal("null")) return JsonValue{nullptr};
    return Number();
  }

  std::optional<JsonValue> Object(int depth) {
    ++i_;
    JsonValue::Object members;
    SkipWs();
    if (Eat('}')) return JsonValue{std::move(members)};
    while (true) {
      SkipWs();
      auto key = String();
      if (!key) return std::nullopt;
      SkipWs();
      if (!Eat(':')) return std::nullopt;
      SkipWs();
      auto v = Value(depth + 1);
      if (!v) return std::nullopt;
      members[*key] = std::move(*v);
      SkipWs();
      if (Eat('}')) return JsonValue{std::move(members)};
      if (!Eat(',')) return std::nullopt;
    }
  }

  std::optional<JsonValue> Array(int depth) {
    ++i_;
    JsonValue::Array items;
    SkipWs();
    if (Eat(']')) return JsonValue{std::move(items)};
    while (true) {
      SkipWs();
      auto v = Value(depth + 1);
      if (!v) return std::nullopt;
      items.push_back(std::move(*v));
      SkipWs();
      if (Eat(']')) return JsonValue{std::move(items)};
      if (!Eat(',')) return std::nullopt;
    }
  }

  static int Hex(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  static void AppendUtf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::optional<std::string> String() {
    if (!Eat('"')) return std::nullopt;
    std::string out;
    while (i_ < s_.size()) {
      auto c = static_cast<unsigned char>(s_[i_++]);
      if (c == '"') return out;
      if (c < 0x20) return std::nullopt;
      if (c != '\\') {
        out += static_cast<char>(c);
        continue;
      }
      if (i_ >= s_.size()) return std::nullopt;
      char e = s_[i_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case '/': out += '/'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'u': {
          if (i_ + 4 > s_.size()) return std::nullopt;
          uint32_t cp = 0;
          for (int k = 0; k < 4; ++k) {
            int h = Hex(s_[i_++]);
            if (h < 0) return std::nullopt;
            cp = cp * 16 + static_cast<uint32_t>(h);
          }
          AppendUtf8(out, cp);
          break;
        }
        default:
          return std::nullopt;
      }
    }
    return std::nullopt;
  }

  std::optional<JsonValue> Number() {
    size_t start = i_;
    auto digits = [&] {
      size_t before = i_;
      while (i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '9') ++i_;
      return i_ > before;
    };
    Eat('-');
    if (Eat('0')) {
      // no leading zeros
    } else if (!digits()) {
      return std::nullopt;
    }
    if (Eat('.') && !digits()) return std::nullopt;
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      ++i_;
      if (!Eat('+')) Eat('-');
      if (!digits()) return std::nullopt;
    }
    return JsonValue{std::strtod(std::string(s_.substr(start, i_ - start)).c_str(), nullptr)};
  }

  std::string_view s_;
  size_t i_ = 0;
};

}  // namespace

std::optional<JsonValue> parse_json_value(std::string_view text) { return JsonReader(text).Document(); }

bool outputs_match(std::string_view produced, std::string_view expected) {
  auto a = parse_json_value(produced);
  auto b = parse_json_value(expected);
  if (a && b) return *a == *b;
  return produced == expected;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string FormatRatio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", r);
  return buf;
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* kCsvHeader = "task_id,strategy,mode,ratio,budget,tokens,complete,exact_match,output";

}  // namespace

std::vector<EvalAggregate> EvalReport::aggregates() const {
  std::vector<EvalAggregate> out;
  std::vector<size_t> complete, exact, tokens;
  for (const EvalRecord& r : records) {
    size_t k = 0;
    while (k < out.size() && !(out[k].strategy == r.strategy && out[k].mode == r.mode && out[k].ratio == r.ratio)) ++k;
    if (k == out.size()) {
      out.push_back({r.strategy, r.mode, r.ratio, 0, 0, 0, 0});
      complete.push_back(0);
      exact.push_back(0);
      tokens.push_back(0);
    }
    ++out[k].tasks;
    complete[k] += r.complete;
    exact[k] += r.exact_match;
    tokens[k] += r.tokens;
  }
  for (size_t k = 0; k < out.size(); ++k) {
    const auto n = static_cast<double>(out[k].tasks);
    out[k].syntax_pct = 100.0 * static_cast<double>(complete[k]) / n;
    out[k].exact_match_pct = 100.0 * static_cast<double>(exact[k]) / n;
    out[k].mean_tokens = static_cast<double>(tokens[k]) / n;
  }
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const EvalRecord& r : records) {
    out += CsvField(r.task_id) + "," + CsvField(r.strategy) + "," + r.mode + "," + FormatRatio(r.ratio) + "," +
           std::to_string(r.budget) + "," + std::to_string(r.tokens) + "," + (r.complete ? "1" : "0") + "," +
           (r.exact_match ? "1" : "0") + "," + CsvField(r.output) + "\n";
  }
  return out;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-14s %6s %6s %9s %11s %11s\n", "strategy", "mode", "ratio", "tasks",
                "syntax%", "exact%", "mean_tok");
  out << line;
  for (const EvalAggregate& a : aggregates()) {
    std::snprintf(line, sizeof(line), "%-18s %-14s %6s %6zu %9.1f %11.1f %11.2f\n", a.strategy.c_str(),
                  a.mode.c_str(), FormatRatio(a.ratio).c_str(), a.tasks, a.syntax_pct, a.exact_match_pct,
                  a.mean_tokens);
    out << line;
  }
  double ms = 0;
  for (const EvalRecord& r : records) ms += r.ms_per_token;
  if (!records.empty()) {
    std::snprintf(line, sizeof(line), "mean decode latency: %.3f ms/token\n",
                  ms / static_cast<double>(records.size()));
    out << line;
  }
  return out.str();
}

std::string EvalReport::to_json_lines() const {
  std::string out;
  for (const EvalRecord& r : records) {
    nlohmann::json j = {{"task_id", r.task_id}, {"strategy", r.strategy}, {"mode", r.mode},
                        {"ratio", r.ratio},     {"budget", r.budget},     {"tokens", r.tokens},
                        {"complete", r.complete}, {"exact_match", r.exact_match}, {"output", r.output}};
    out += j.dump() + "\n";
  }
  return out;
}

EvalReport parse_report_csv(std::string_view csv) {
  // Split into rows of fields, honouring quoted fields that span lines.
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  for (size_t i = 0; i < csv.size(); ++i) {
    char c = csv[i];
    row_started = true;
    if (quoted) {
      if (c == '"' && i + 1 < csv.size() && csv[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      row_started = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorKind::kTaskFormat, "report CSV ends inside a quoted field");
  if (row_started) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::kTaskFormat, "report CSV is empty");
  std::string header;
  for (size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kCsvHeader) throw Error(ErrorKind::kTaskFormat, "unexpected report CSV header");
  EvalReport report;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 9) throw Error(ErrorKind::kTaskFormat, "report CSV row " + std::to_string(i) + " has wrong arity");
    EvalRecord r;
    try {
      r.task_id = f[0];
      r.strategy = f[1];
      r.mode = f[2];
      r.ratio = std::stod(f[3]);
      r.budget = std::stoul(f[4]);
      r.tokens = std::stoul(f[5]);
      r.complete = f[6] == "1";
      r.exact_match = f[7] == "1";
      r.output = f[8];
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kTaskFormat, "report CSV row " + std::to_string(i) + " has a bad number");
    }
    report.records.push_back(std::move(r));
  }
  return report;
}

EvalReport run_eval(const std::shared_ptr<const Engine>& engine, const LanguageModel& model,
                    const std::vector<Task>& tasks, const EvalConfig& config) {
  struct Cell {
    size_t task;
    size_t strategy;
    MaskMode mode;
    double ratio;
  };
  std::vector<Cell> cells;
  for (size_t s = 0; s < config.strategies.size(); ++s) {
    for (MaskMode mode : config.modes) {
      for (double ratio : config.ratios) {
        for (size_t t = 0; t < tasks.size(); ++t) cells.push_back({t, s, mode, ratio});
      }
    }
  }
  const Vocabulary& vocab = engine->vocab();
  std::vector<std::vector<TokenId>> prompts(tasks.size());
  for (size_t t = 0; t < tasks.size(); ++t) {
    if (!tasks[t].prompt.empty()) prompts[t] = vocab.encode(tasks[t].prompt);
  }

  EvalReport report;
  report.records.resize(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const auto n = static_cast<int64_t>(cells.size());
  auto run_cell = [&](int64_t i) {
    const Cell& c = cells[i];
    const Task& task = tasks[c.task];
    EvalRecord& r = report.records[i];
    r.task_id = task.id;
    r.strategy = config.strategies[c.strategy].to_string();
    r.mode = MaskModeName(c.mode);
    r.ratio = c.ratio;
    try {
      r.budget = BudgetPolicy::Ratio(c.ratio).budget_for(task.l_gt);
      Session session = Session::create(engine, r.budget, c.mode);
      auto start = std::chrono::steady_clock::now();
      DecodeResult out = run_strategy(config.strategies[c.strategy], model, session, prompts[c.task]);
      double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      r.tokens = out.tokens.size();
      r.complete = out.complete && r.tokens <= r.budget;
      r.exact_match = r.complete && outputs_match(out.text, task.output);
      r.output = out.text;
      r.ms_per_token = out.tokens.empty() ? 0 : ms / static_cast<double>(out.tokens.size());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (config.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < n; ++i) run_cell(i);
  } else {
    for (int64_t i = 0; i < n; ++i) run_cell(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

}  // namespace truncproof
