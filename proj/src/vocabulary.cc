/*!
 *  Copyright (c) 2026 by Contributors
 * \file vocabulary.cc
 */
#include "truncproof/vocabulary.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "truncproof/error.h"

namespace truncproof {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos) : tokens_(std::move(tokens)), eos_(eos) {
  if (tokens_.empty()) throw Error(ErrorKind::kVocabulary, "empty vocabulary");
  if (!valid(eos_)) throw Error(ErrorKind::kVocabulary, "missing eos: index out of range");
  tokens_[eos_].clear();
  std::unordered_set<std::string_view> seen;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (static_cast<TokenId>(i) == eos_) continue;
    if (tokens_[i].empty()) {
      throw Error(ErrorKind::kVocabulary, "token " + std::to_string(i) + " is the empty string");
    }
    if (!seen.insert(tokens_[i]).second) ++duplicates_;
    max_token_length_ = std::max(max_token_length_, tokens_[i].size());
  }
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (!valid(id)) throw Error(ErrorKind::kUnknownToken, "unknown token id " + std::to_string(id));
    out += tokens_[id];
  }
  return out;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::unordered_map<std::string_view, TokenId> lookup;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (static_cast<TokenId>(i) != eos_) lookup.emplace(tokens_[i], static_cast<TokenId>(i));
  }
  constexpr int kUnreachable = std::numeric_limits<int>::max();
  const size_t n = text.size();
  std::vector<int> best(n + 1, kUnreachable);
  std::vector<TokenId> choice(n + 1, -1);
  best[n] = 0;
  for (size_t i = n; i-- > 0;) {
    const size_t longest = std::min(max_token_length_, n - i);
    for (size_t len = longest; len >= 1; --len) {
      auto it = lookup.find(text.substr(i, len));
      if (it == lookup.end() || best[i + len] == kUnreachable) continue;
      if (best[i + len] + 1 < best[i]) {
        best[i] = best[i + len] + 1;
        choice[i] = it->second;
      }
    }
  }
  if (best[0] == kUnreachable) {
    throw Error(ErrorKind::kVocabulary, "text cannot be segmented with this vocabulary");
  }
  std::vector<TokenId> ids;
  for (size_t i = 0; i < n; i += tokens_[choice[i]].size()) ids.push_back(choice[i]);
  return ids;
}

std::string escape_token(std::string_view bytes) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (char ch : bytes) {
    auto c = static_cast<uint8_t>(ch);
    if (c == '\\') {
      out += "\\\\";
    } else if (c < 0x20 || c >= 0x7f) {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 15];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string unescape_token(std::string_view escaped) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  for (size_t i = 0; i < escaped.size(); ++i) {
    if (escaped[i] != '\\' || i + 1 >= escaped.size()) {
      out += escaped[i];
      continue;
    }
    char next = escaped[i + 1];
    if (next == '\\') {
      out += '\\';
      ++i;
    } else if (next == 'x' && i + 3 < escaped.size() && hex(escaped[i + 2]) >= 0 && hex(escaped[i + 3]) >= 0) {
      out += static_cast<char>(hex(escaped[i + 2]) * 16 + hex(escaped[i + 3]));
      i += 3;
    } else {
      out += escaped[i];
    }
  }
  return out;
}

Vocabulary parse_vocabulary(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kVocabulary, std::string("vocabulary is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array()) {
    throw Error(ErrorKind::kVocabulary, "vocabulary needs a \"tokens\" array");
  }
  if (!doc.contains("eos") || !doc["eos"].is_number_integer()) {
    throw Error(ErrorKind::kVocabulary, "missing eos: vocabulary needs an integer \"eos\" field");
  }
  std::vector<std::string> tokens;
  for (const auto& entry : doc["tokens"]) {
    if (!entry.is_string()) throw Error(ErrorKind::kVocabulary, "token entries must be strings");
    tokens.push_back(unescape_token(entry.get<std::string>()));
  }
  if (tokens.empty()) throw Error(ErrorKind::kVocabulary, "empty vocabulary");
  const auto eos = doc["eos"].get<int64_t>();
  if (eos < 0 || eos > static_cast<int64_t>(tokens.size())) {
    throw Error(ErrorKind::kVocabulary, "missing eos: index " + std::to_string(eos) + " out of range");
  }
  if (eos == static_cast<int64_t>(tokens.size())) tokens.emplace_back();
  return Vocabulary(std::move(tokens), static_cast<TokenId>(eos));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read vocabulary " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_vocabulary(buffer.str());
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json doc;
  doc["tokens"] = nlohmann::json::array();
  for (size_t i = 0; i < vocab.size(); ++i) {
    bool is_eos = static_cast<TokenId>(i) == vocab.eos();
    doc["tokens"].push_back(is_eos ? std::string("<eos>") : escape_token(vocab.text(static_cast<TokenId>(i))));
  }
  doc["eos"] = vocab.eos();
  return doc.dump(1) + "\n";
}

Vocabulary byte_vocabulary() {
  std::vector<std::string> tokens;
  for (int c = 0; c < 256; ++c) tokens.emplace_back(1, static_cast<char>(c));
  tokens.emplace_back();
  return Vocabulary(std::move(tokens), 256);
}

Vocabulary synthetic_json_vocabulary(size_t size) {
  if (size < 257) throw Error(ErrorKind::kInvalidArgument, "synthetic vocabulary needs at least 257 entries");
  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string t) {
    if (tokens.size() + 1 >= size || t.empty() || !seen.insert(t).second) return;
    tokens.push_back(std::move(t));
  };
  for (int c = 0; c < 256; ++c) {
    tokens.emplace_back(1, static_cast<char>(c));
    seen.insert(tokens.back());
  }
  for (const char* piece :
       {"{\"", "\"}", "\":", "\": ", "\",", "\", ", ", \"", ",\"", "\"]", "[\"", "[]", "{}", "},", "],", "}]", "]}",
        "true", "false", "null", "  ", "    ", "\n", "\n  ", "\n    ", "\n}", "\n  }", "\": \"", "\":\"", ": ",
        "\": {", "\": [", "\": true", "\": false", "\": null", "0.", ".5", "e+", "e-", "-1", "\\n", "\\\"",
        "\\\\", "\\u00"}) {
    add(piece);
  }
  for (int n = 0; n < 100; ++n) add(std::to_string(n));
  for (const char* word :
       {"name", "id", "value", "type", "items", "title", "description", "price", "count", "status", "user", "email",
        "address", "city", "age", "tags", "data", "date", "code", "level", "key", "list", "size", "color", "model",
        "version", "enabled", "score", "rating", "owner", "state", "phone", "url", "label", "amount", "currency"}) {
    std::string w(word);
    add(w);
    add("\"" + w);
    add("\"" + w + "\"");
    add("\"" + w + "\":");
    add("\"" + w + "\": ");
  }
  static const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u"};
  static const char* kCodas[] = {"", "n", "r", "s", "t", "l"};
  for (const char* onset : kOnsets) {
    for (const char* vowel : kVowels) {
      for (const char* coda : kCodas) add(std::string(onset) + vowel + coda);
    }
  }
  for (size_t n = 0; tokens.size() + 1 < size; ++n) {
    add(std::string(kOnsets[n % 16]) + kVowels[(n / 16) % 5] + kOnsets[(n / 80) % 16] + kVowels[(n / 1280) % 5] +
        std::to_string(n / 6400));
  }
  tokens.emplace_back();
  const auto eos = static_cast<TokenId>(tokens.size() - 1);
  return Vocabulary(std::move(tokens), eos);
}

}  // namespace truncproof
