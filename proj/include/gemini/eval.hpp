#pragma once

#include <string>
#include <vector>

#include "gemini/ast.hpp"
#include "gemini/diagnostics.hpp"
#include "gemini/types.hpp"
#include "gemini/value.hpp"

namespace gemini {

// Raised for staging-time failures (they are compile errors: evaluation
// happens at compile time).
struct EvalError {
  Code code;
  Span span;
  std::string message;
};

struct EvalContext {
  SubstEnv* subst = nullptr;          // final substitution from analysis
  std::vector<ValuePtr> store;        // mutable reference cells
  std::string* print_sink = nullptr;  // Core.print output (stdout when null)
  std::string source_dir = ".";       // Core.read resolves paths here
  int substitution_cap = 10000;
  int depth = 0;                      // recursion guard

  int64_t alloc(ValuePtr v) {
    store.push_back(std::move(v));
    return static_cast<int64_t>(store.size()) - 1;
  }
};

// Big-step evaluation of a type-checked expression. Observable behavior
// follows the small-step rules: call-by-value, left to right, guard-first
// conditionals, first-matching-clause case analysis.
ValuePtr evaluate(EvalContext& ctx, const Expr& e, EnvPtr env);

// Applies a function or module value to an argument.
ValuePtr apply_value(EvalContext& ctx, const ValuePtr& fn, const ValuePtr& arg,
                     Span span);

// Builds the hardware IR node for a gate-level operator, recursing
// elementwise over arrays and fieldwise over records, and folding gates whose
// inputs are all literal bits.
ValuePtr build_hardware_op(EvalContext& ctx, BinOp op, const ValuePtr& lhs,
                           const ValuePtr& rhs, Span span);
ValuePtr build_hardware_not(EvalContext& ctx, const ValuePtr& operand, Span span);
ValuePtr build_reduction(EvalContext& ctx, GateOp op, const ValuePtr& array, Span span);

// Gate construction with literal folding.
ValuePtr hw_gate(GateOp op, std::vector<ValuePtr> inputs);

// Pattern matching; returns false when the pattern does not match.
bool match_pattern(EvalContext& ctx, const Pattern& p, const ValuePtr& v, EnvPtr& env);

// The expanded top-level module: named input pins in declaration order plus
// the hardware value graph of the body.
struct ExpandedModule {
  std::vector<std::pair<std::string, TypePtr>> ports;
  ValuePtr output;
};

// Applies pin names to the program's module value (the final staging step).
// Fails with NonConcreteModule when input types retain metavariables or the
// module still expects a size parameter.
ExpandedModule expand_top_module(EvalContext& ctx, const ValuePtr& module, Span span);

}  // namespace gemini
