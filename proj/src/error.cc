/*!
 *  Copyright (c) 2026 by Contributors
 * \file error.cc
 */
#include "truncproof/error.h"

namespace truncproof {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnsupportedRegex: return "unsupported-regex-feature";
    case ErrorKind::kEmptyLanguage: return "empty-language";
    case ErrorKind::kStateCap: return "state-cap-exceeded";
    case ErrorKind::kGrammarSyntax: return "grammar-syntax";
    case ErrorKind::kUndeclaredSymbol: return "undeclared-symbol";
    case ErrorKind::kDuplicateSymbol: return "duplicate-symbol";
    case ErrorKind::kLl1Conflict: return "ll1-conflict";
    case ErrorKind::kVocabulary: return "vocabulary";
    case ErrorKind::kUnknownToken: return "unknown-id";
    case ErrorKind::kCacheVersion: return "version-mismatch";
    case ErrorKind::kCacheHash: return "hash-mismatch";
    case ErrorKind::kCacheCorrupt: return "corrupt-cache";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kParseFailure: return "parse-failure";
    case ErrorKind::kLexFailure: return "lex-failure";
    case ErrorKind::kMaskedTokenRejected: return "masked-token-rejected";
    case ErrorKind::kBudgetExhausted: return "budget-exhausted";
    case ErrorKind::kDeadSession: return "dead-session";
    case ErrorKind::kInstanceTooLarge: return "instance-too-large";
    case ErrorKind::kTaskFormat: return "task-format";
  }
  return "unknown";
}

}  // namespace truncproof
