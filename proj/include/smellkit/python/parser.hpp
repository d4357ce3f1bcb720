#pragma once

#include <memory>
#include <string>
#include <variant>

#include "smellkit/python/ast.hpp"
#include "smellkit/python/token.hpp"

namespace smellkit::py {

struct ParseError {
  int line = 0;
  int col = 0;
  std::string message;
};

struct ParseOutcome {
  std::shared_ptr<const ParseTree> tree;  // null on failure
  std::optional<ParseError> error;
  bool ok() const { return tree != nullptr; }
};

// Parses Python 3 source text. The returned tree does not reference the
// text; spans carry byte offsets into it.
ParseOutcome parse_module(std::string_view text);

}  // namespace smellkit::py
