#pragma once

#include <vector>

#include "gemini/ast.hpp"
#include "gemini/diagnostics.hpp"
#include "gemini/token.hpp"

namespace gemini {

// Parses a token stream into the program expression. Returns null when the
// stream is unrecoverably malformed (diagnostics explain why).
ExprPtr parse_program(const std::vector<Token>& tokens, DiagnosticSink& diags);

// Parses a single expression (test and tooling entry point).
ExprPtr parse_expression(const std::vector<Token>& tokens, DiagnosticSink& diags);

// Rewrites derived terms into core forms: tuples become numeric-label
// records, unit becomes the empty record, if-then gains an empty-record else,
// the logical connectives become conditionals, reductions over array literals
// are expanded, and collapse operators become reductions joined by a gate.
void desugar(Expr& e);

}  // namespace gemini
