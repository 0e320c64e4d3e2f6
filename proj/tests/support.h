// Shared fixtures for the unit tests.
#ifndef TRUNCPROOF_TESTS_SUPPORT_H_
#define TRUNCPROOF_TESTS_SUPPORT_H_

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "truncproof/engine.h"
#include "truncproof/grammar.h"
#include "truncproof/vocabulary.h"

namespace test {

inline std::string DataPath(const std::string& name) { return std::string(TRUNCPROOF_DATA_DIR) + "/" + name; }

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string Data(const std::string& name) { return Slurp(DataPath(name)); }

/*! \brief V0: x ( ) (x plus eos at id 4. */
inline truncproof::Vocabulary ParenVocab() { return truncproof::Vocabulary({"x", "(", ")", "(x", ""}, 4); }

inline std::shared_ptr<const truncproof::Engine> ParenEngine() {
  return truncproof::Engine::build(truncproof::parse_grammar(Data("paren.grammar")), ParenVocab());
}

inline std::shared_ptr<const truncproof::Engine> JsonEngine(size_t vocab_size = 1000) {
  return truncproof::Engine::build(truncproof::parse_grammar(Data("json_rfc8259.grammar")),
                                   truncproof::synthetic_json_vocabulary(vocab_size));
}

inline truncproof::TokenId Id(const truncproof::Vocabulary& v, const std::string& text) {
  for (size_t t = 0; t < v.size(); ++t) {
    if (static_cast<truncproof::TokenId>(t) != v.eos() && v.text(static_cast<truncproof::TokenId>(t)) == text) {
      return static_cast<truncproof::TokenId>(t);
    }
  }
  return -1;
}

/*! \brief Every string over `alphabet` of length <= max_len. */
inline std::vector<std::string> Enumerate(const std::string& alphabet, size_t max_len) {
  std::vector<std::string> out{""};
  size_t begin = 0;
  for (size_t len = 1; len <= max_len; ++len) {
    size_t end = out.size();
    for (size_t i = begin; i < end; ++i) {
      for (char c : alphabet) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

}  // namespace test

#endif  // TRUNCPROOF_TESTS_SUPPORT_H_
