#pragma once

#include <optional>
#include <string>

#include "gemini/diagnostics.hpp"
#include "gemini/netlist.hpp"
#include "gemini/types.hpp"

namespace gemini {

struct CompileOptions {
  std::string module_name;          // default: source file stem
  std::string emit;                 // tokens | ast | typed-ast | ir | ir-lowered | verilog
  int substitution_cap = 10000;
  bool warnings_as_errors = false;
  std::string source_dir = ".";     // Core.read base directory
};

struct CompileResult {
  bool ok = false;
  std::string emitted;              // text of the requested --emit stage
  std::string verilog;              // final Verilog (when the pipeline ran through)
  std::string staging_output;       // Core.print output produced during staging
  DiagnosticSink diags;
  TypePtr program_type;
  std::optional<Netlist> lowered;   // for the sim command and tests
};

// Runs the whole pipeline over one compilation unit: tokens, parse, desugar,
// semantic analysis, staging, hardware checking, lowering, Verilog emission.
// Stops early when `options.emit` names an earlier stage.
CompileResult compile_source(const std::string& origin, const std::string& text,
                             const CompileOptions& options = {});

// Module name defaulting: the stem of a path ("designs/adder.gem" -> "adder").
std::string path_stem(const std::string& path);

}  // namespace gemini
