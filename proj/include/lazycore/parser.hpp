#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "lazycore/ast.hpp"
#include "lazycore/span.hpp"

namespace lazycore {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, SourceSpan where)
      : std::runtime_error(std::move(msg)), span(where) {}
  SourceSpan span;
};

// Parses one complete program (a single expression followed by end of input).
// Throws ParseError with a one-line message and the offending span.
ExprPtr parse(std::string_view source);

bool is_reserved_word(std::string_view word);

}  // namespace lazycore
