#pragma once

#include <cstddef>
#include <tuple>

namespace smellkit {

// Source region. Lines are 1-based physical lines; columns are 1-based and
// count Unicode scalars. (end_line, end_col) points one past the last
// character; byte offsets are half-open [begin, end).
struct Span {
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  bool strictly_contains(const Span& other) const {
    return contains(other) && !(begin == other.begin && end == other.end);
  }
  int line_count() const { return end_line - start_line + 1; }

  friend bool operator==(const Span& a, const Span& b) {
    return a.begin == b.begin && a.end == b.end;
  }
  friend bool operator<(const Span& a, const Span& b) {
    return std::tie(a.begin, a.end) < std::tie(b.begin, b.end);
  }
};

}  // namespace smellkit
