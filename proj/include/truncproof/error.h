/*!
 *  Copyright (c) 2026 by Contributors
 * \file truncproof/error.h
 * \brief Error type shared by every module. The kind drives CLI exit codes.
 */
#ifndef TRUNCPROOF_ERROR_H_
#define TRUNCPROOF_ERROR_H_

#include <stdexcept>
#include <string>

namespace truncproof {

enum class ErrorKind {
  kUnsupportedRegex,
  kEmptyLanguage,
  kStateCap,
  kGrammarSyntax,
  kUndeclaredSymbol,
  kDuplicateSymbol,
  kLl1Conflict,
  kVocabulary,
  kUnknownToken,
  kCacheVersion,
  kCacheHash,
  kCacheCorrupt,
  kIo,
  kInvalidArgument,
  kParseFailure,
  kLexFailure,
  kMaskedTokenRejected,
  kBudgetExhausted,
  kDeadSession,
  kInstanceTooLarge,
  kTaskFormat,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  /*! \brief True for errors caused by the grammar or its regexes. */
  bool is_grammar_error() const {
    switch (kind_) {
      case ErrorKind::kUnsupportedRegex:
      case ErrorKind::kEmptyLanguage:
      case ErrorKind::kStateCap:
      case ErrorKind::kGrammarSyntax:
      case ErrorKind::kUndeclaredSymbol:
      case ErrorKind::kDuplicateSymbol:
      case ErrorKind::kLl1Conflict:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace truncproof

#endif  // TRUNCPROOF_ERROR_H_
