/*!
 *  Copyright (c) 2026 by Contributors
 * \file make_vocab.cc
 * \brief Writes the bundled vocabularies: `make_vocab bytes` or `make_vocab synthetic <size>`.
 */
#include <cstdio>
#include <string>

#include "truncproof/error.h"
#include "truncproof/vocabulary.h"

int main(int argc, char** argv) {
  const std::string kind = argc > 1 ? argv[1] : "";
  try {
    if (kind == "bytes") {
      std::puts(truncproof::vocabulary_to_json(truncproof::byte_vocabulary()).c_str());
      return 0;
    }
    if (kind == "synthetic" && argc > 2) {
      std::puts(truncproof::vocabulary_to_json(truncproof::synthetic_json_vocabulary(std::stoul(argv[2]))).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  std::fprintf(stderr, "usage: make_vocab bytes | synthetic <size>\n");
  return 3;
}
