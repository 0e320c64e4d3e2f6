/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/vocabulary.h
 * \brief Token vocabulary over raw byte strings.
 *
 * File format (JSON):
 *
 *     {"tokens": ["x", "(", "\\x80"], "eos": 3}
 *
 * After JSON decoding, `\xNN` is a byte escape and `\\` a literal backslash.
 * When `eos` equals the number of listed tokens, an eos entry is appended;
 * otherwise the entry at that index is the eos token and its text is ignored.
 */
#ifndef TRUNCPROOF_VOCABULARY_H_
#define TRUNCPROOF_VOCABULARY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace truncproof {

using TokenId = int32_t;

class Vocabulary {
 public:
  /*! \brief `tokens[eos]` is ignored and stored as "". */
  Vocabulary(std::vector<std::string> tokens, TokenId eos);

  size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  bool valid(TokenId id) const { return id >= 0 && static_cast<size_t>(id) < tokens_.size(); }
  std::string_view text(TokenId id) const { return tokens_[id]; }
  /*! \brief Number of non-eos tokens whose bytes repeat an earlier token. */
  size_t duplicate_count() const { return duplicates_; }

  /*! \brief Concatenate token contents; eos contributes nothing. Throws kUnknownToken. */
  std::string decode(std::span<const TokenId> ids) const;

  /*!
   * \brief Minimum-token segmentation of `text` (ties prefer the longer first
   * token). Throws kVocabulary when the text cannot be segmented.
   */
  std::vector<TokenId> encode(std::string_view text) const;

 private:
  std::vector<std::string> tokens_;
  TokenId eos_;
  size_t duplicates_ = 0;
  size_t max_token_length_ = 0;
};

/*! \brief Parse the JSON vocabulary format. Throws kVocabulary. */
Vocabulary parse_vocabulary(std::string_view json_text);
Vocabulary load_vocabulary(const std::filesystem::path& path);

/*! \brief Inverse of the `\xNN` escaping used by the file format. */
std::string escape_token(std::string_view bytes);
std::string unescape_token(std::string_view escaped);

/*! \brief JSON text of the file format for `vocab`. */
std::string vocabulary_to_json(const Vocabulary& vocab);

/*! \brief One token per byte value plus eos: 257 entries. */
Vocabulary byte_vocabulary();

/*!
 * \brief Deterministic JSON-flavoured vocabulary of exactly `size` entries
 * (>= 257): all 256 bytes, common JSON fragments, then filler words; eos last.
 */
Vocabulary synthetic_json_vocabulary(size_t size);

}  // namespace truncproof

#endif  // TRUNCPROOF_VOCABULARY_H_
