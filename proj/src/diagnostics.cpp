#include "gemini/diagnostics.hpp"

#include <fmt/format.h>

namespace gemini {

std::string DiagnosticSink::render(const SourceFile& file, bool color) const {
  std::string out;
  for (const auto& d : diags_) {
    const char* label = d.severity == Severity::Error ? "error" : "warning";
    const char* start = "";
    const char* reset = "";
    if (color) {
      start = d.severity == Severity::Error ? "\x1b[31m" : "\x1b[33m";
      reset = "\x1b[0m";
    }
    out += fmt::format("{}{}[{}{:03d}]{}: {} @{}:{}:{}\n", start, label,
                       d.severity == Severity::Error ? 'E' : 'W',
                       static_cast<int>(d.code), reset, d.message, file.origin(),
                       d.span.line, d.span.column);
  }
  return out;
}

}  // namespace gemini
