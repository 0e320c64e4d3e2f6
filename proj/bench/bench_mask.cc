/*!
 *  Copyright (c) 2026 by Contributors
 * \file bench_mask.cc
 * \brief Serial vs. parallel kernels: cost-table precompute and the per-step mask.
 *
 * Usage: bench_mask [grammar file] [vocab size] [steps]
 */
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "truncproof/engine.h"
#include "truncproof/error.h"
#include "truncproof/grammar.h"
#include "truncproof/precompute.h"
#include "truncproof/vocabulary.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tp = truncproof;
using Clock = std::chrono::steady_clock;

namespace {

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tp::Error(tp::ErrorKind::kIo, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string grammar_path = argc > 1 ? argv[1] : std::string(TRUNCPROOF_DATA_DIR) + "/json_rfc8259.grammar";
  const size_t vocab_size = argc > 2 ? std::stoul(argv[2]) : 1000;
  const size_t steps = argc > 3 ? std::stoul(argv[3]) : 400;
  try {
    tp::Grammar g = tp::parse_grammar(ReadFile(grammar_path));
    tp::Ll1Table table = tp::build_ll1_table(g);
    tp::Vocabulary vocab = tp::synthetic_json_vocabulary(vocab_size);
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("grammar %s, vocabulary %zu, threads %d\n", grammar_path.c_str(), vocab.size(), threads);

    tp::PrecomputeOptions serial_opts, parallel_opts;
    serial_opts.execution = tp::Execution::kSerial;
    parallel_opts.execution = tp::Execution::kParallel;
    auto t0 = Clock::now();
    tp::CostTables serial_tables = tp::build_cost_tables(g, table, vocab, serial_opts);
    const double serial_pre = Seconds(t0);
    t0 = Clock::now();
    tp::CostTables parallel_tables = tp::build_cost_tables(g, table, vocab, parallel_opts);
    const double parallel_pre = Seconds(t0);
    std::printf("precompute  serial %8.3f s  parallel %8.3f s  speedup %.2fx  identical %s\n", serial_pre,
                parallel_pre, serial_pre / parallel_pre, serial_tables == parallel_tables ? "yes" : "NO");

    auto engine = std::make_shared<const tp::Engine>(std::move(g), std::move(vocab), std::move(parallel_tables), 0, 0);
    // Random admitted walks give a spread of lexer and parser states.
    std::mt19937_64 rng(42);
    std::vector<tp::Session> sessions;
    while (sessions.size() < steps) {
      tp::Session s = tp::Session::create(engine, 48);
      while (sessions.size() < steps && !s.finished()) {
        tp::Mask m = s.compute_mask();
        sessions.push_back(s);
        std::vector<tp::TokenId> admitted;
        for (size_t t = 0; t < m.bits.size(); ++t) {
          if (m.bits[t]) admitted.push_back(static_cast<tp::TokenId>(t));
        }
        s.advance(admitted[rng() % admitted.size()]);
      }
    }

    size_t mismatches = 0;
    double serial_ms = 0, parallel_ms = 0;
    for (const tp::Session& s : sessions) {
      (void)s.accept_sequences();  // shared setup, kept out of both timings
      auto a = Clock::now();
      tp::Mask ms = s.compute_mask_unchecked(tp::Execution::kSerial);
      serial_ms += Seconds(a) * 1e3;
      a = Clock::now();
      tp::Mask mp = s.compute_mask_unchecked(tp::Execution::kParallel);
      parallel_ms += Seconds(a) * 1e3;
      mismatches += ms == mp ? 0 : 1;
    }
    const double n = static_cast<double>(sessions.size());
    std::printf("mask/step   serial %8.3f ms parallel %8.3f ms speedup %.2fx  mismatches %zu over %zu steps\n",
                serial_ms / n, parallel_ms / n, serial_ms / parallel_ms, mismatches, sessions.size());
    return mismatches == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
