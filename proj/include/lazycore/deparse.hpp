#pragma once

#include <string>

#include "lazycore/ast.hpp"

namespace lazycore {

// Deterministic source rendering. For every tree e produced by the parser or
// built programmatically, parse(deparse(e)) is structurally equal to e.
std::string deparse(const ExprPtr& e);

// `text` rendered as a double-quoted literal with \" \\ \n \t escapes.
std::string quote_string(const std::string& text);

}  // namespace lazycore
