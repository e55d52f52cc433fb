#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gemini/diagnostics.hpp"
#include "gemini/token.hpp"

namespace gemini {

// Tokenizes a whole compilation unit. Follows longest-match, then
// earliest-pattern priority; keywords are matched before identifiers.
// Comment nesting depth and open strings must be balanced at end of file.
std::vector<Token> tokenize(const SourceFile& file, DiagnosticSink& diags);

// Decodes an integer-literal lexeme (binary #'b:, octal #'o:, decimal,
// hex #'x: or #'h:, optional leading ~ on decimal) to its base-10 value.
// Returns nullopt when a digit is invalid for the base or the value falls
// outside the signed 32-bit range.
std::optional<int32_t> decode_integer(const std::string& lexeme);

// One token per line: CLASS "lexeme" @line:col
std::string dump_tokens(const std::vector<Token>& tokens);

}  // namespace gemini
