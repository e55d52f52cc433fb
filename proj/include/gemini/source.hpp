#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gemini {

// Byte range within one source file, plus the 1-based line/column of its
// start. Columns count bytes, not display width.
struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;
  uint32_t line = 1;
  uint32_t column = 1;

  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
};

// Owns the text of one compilation unit and resolves offsets to line/column.
class SourceFile {
 public:
  SourceFile() = default;
  SourceFile(std::string origin, std::string text)
      : origin_(std::move(origin)), text_(std::move(text)) {
    line_starts_.push_back(0);
    for (uint32_t i = 0; i < text_.size(); ++i) {
      if (text_[i] == '\n') line_starts_.push_back(i + 1);
    }
  }

  const std::string& origin() const { return origin_; }
  const std::string& text() const { return text_; }

  std::pair<uint32_t, uint32_t> line_col(uint32_t offset) const {
    uint32_t lo = 0, hi = static_cast<uint32_t>(line_starts_.size());
    while (lo + 1 < hi) {
      uint32_t mid = (lo + hi) / 2;
      if (line_starts_[mid] <= offset) lo = mid; else hi = mid;
    }
    return {lo + 1, offset - line_starts_[lo] + 1};
  }

  Span span(uint32_t begin, uint32_t end) const {
    auto [line, col] = line_col(begin);
    return Span{begin, end, line, col};
  }

 private:
  std::string origin_;
  std::string text_;
  std::vector<uint32_t> line_starts_;
};

}  // namespace gemini
