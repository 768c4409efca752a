#pragma once

#include <cstdint>
#include <string>

namespace lazycore {

// Half-open byte range [begin, end) into the source text, with the 1-based
// line/column of the first byte. Child node spans always nest inside their
// parent's span.
struct SourceSpan {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 1;
  std::uint32_t col = 1;

  bool operator==(const SourceSpan&) const = default;
};

// Rendered as "begin:end:line:col"; used in diagnostics and trace files.
std::string to_string(const SourceSpan& s);

// Strict-weak order so spans can key maps.
struct SpanLess {
  bool operator()(const SourceSpan& a, const SourceSpan& b) const {
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end < b.end;
    if (a.line != b.line) return a.line < b.line;
    return a.col < b.col;
  }
};

}  // namespace lazycore
