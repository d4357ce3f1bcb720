#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smellkit/span.hpp"

namespace smellkit::py {

enum class TokType {
  Name,     // identifiers and keywords
  Number,
  String,   // all string literals, f-strings included, scanned atomically
  Op,
  Newline,  // end of a logical line
  Indent,
  Dedent,
  EndMarker,
};

struct Token {
  TokType type = TokType::EndMarker;
  std::string_view text;
  Span span;

  bool is(TokType t) const { return type == t; }
  bool is_op(std::string_view s) const { return type == TokType::Op && text == s; }
  bool is_name(std::string_view s) const { return type == TokType::Name && text == s; }
};

bool is_python_keyword(std::string_view name);

struct TokenizeError {
  int line = 0;
  int col = 0;
  std::string message;
};

// Tokenizes Python 3 source. The text must outlive the returned tokens,
// which hold views into it. Comments and non-logical newlines are dropped;
// INDENT/DEDENT tokens encode block structure.
struct TokenizeResult {
  std::vector<Token> tokens;
  std::vector<TokenizeError> errors;  // empty on success; first entry is authoritative
  bool ok() const { return errors.empty(); }
};

TokenizeResult tokenize(std::string_view text);

}  // namespace smellkit::py
