#pragma once

#include <string>
#include <vector>

#include "gemini/source.hpp"

namespace gemini {

enum class Severity { Error, Warning };

// Stable diagnostic codes. The numeric part is what `error[E###]` prints.
enum class Code {
  // lexer
  IllegalCharacter = 1,
  UnterminatedComment = 2,
  UnterminatedString = 3,
  BadIntegerLiteral = 4,
  // parser
  UnexpectedToken = 101,
  DuplicateLabel = 102,
  // semantic analysis
  TypeMismatch = 201,
  KindMismatch = 202,
  OccursCycle = 203,
  UnboundIdentifier = 204,
  NonExhaustiveMatch = 205,
  NonModuleProgram = 206,
  UnknownTypeName = 207,
  // staging / evaluation
  OutOfRange = 301,
  MatchFailure = 302,
  DivisionByZero = 303,
  UnsupportedFeature = 304,
  NonConcreteModule = 305,
  EvalError = 306,
  // hardware checking
  HwTypeError = 401,
  CombinationalCycle = 402,
  // internal
  Internal = 901,
};

struct Diagnostic {
  Severity severity = Severity::Error;
  Code code = Code::Internal;
  Span span;
  std::string message;
};

class DiagnosticSink {
 public:
  void error(Code code, Span span, std::string message) {
    diags_.push_back({Severity::Error, code, span, std::move(message)});
  }
  void warning(Code code, Span span, std::string message) {
    diags_.push_back({Severity::Warning, code, span, std::move(message)});
  }

  const std::vector<Diagnostic>& all() const { return diags_; }
  bool has_errors() const {
    for (const auto& d : diags_)
      if (d.severity == Severity::Error) return true;
    return false;
  }
  size_t error_count() const {
    size_t n = 0;
    for (const auto& d : diags_)
      if (d.severity == Severity::Error) ++n;
    return n;
  }
  bool has_code(Code c) const {
    for (const auto& d : diags_)
      if (d.code == c) return true;
    return false;
  }
  void clear() { diags_.clear(); }

  // `file:line:col`-style rendering, one diagnostic per line.
  std::string render(const SourceFile& file, bool color = false) const;

 private:
  std::vector<Diagnostic> diags_;
};

}  // namespace gemini
