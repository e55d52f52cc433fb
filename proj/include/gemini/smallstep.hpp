#pragma once

#include <set>
#include <string>
#include <vector>

#include "gemini/ast.hpp"

namespace gemini {

// One small-step outcome: the next term, "already a value", or a stuck
// state (a non-value with no applicable rule).
struct StepResult {
  enum class Kind { Next, IsValue, Stuck };
  Kind kind;
  ExprPtr next;
  std::string stuck_reason;
};

// A literal implementation of the one-step evaluation rules over terms.
// Stores live term-level: `ref v` allocates a Location term, `sw v` a
// WrapHandle term. Terms must be closed up to constructor names (supplied
// at construction) — the engine has no value environment.
class SmallStep {
 public:
  explicit SmallStep(std::set<std::string> ctor_names = {})
      : ctors_(std::move(ctor_names)) {}

  bool is_value(const Expr& t) const;

  // Applies exactly one rule. Rule selection is a function of the term
  // shape, so evaluation is deterministic.
  StepResult step(const Expr& t);

  // Counts how many rules could fire at the root of t (determinacy probe;
  // well-formed terms never exceed one).
  int applicable_rules(const Expr& t);

  const std::vector<ExprPtr>& locations() const { return mu_; }
  const std::vector<ExprPtr>& wraps() const { return omega_; }
  size_t location_count() const { return mu_.size(); }
  size_t wrap_count() const { return omega_.size(); }

  // Capture-correct substitution [name -> value]term for closed values.
  static ExprPtr substitute(const Expr& term, const std::string& name, const Expr& value);

 private:
  bool is_bit_value(const Expr& t) const;
  bool is_ctor_app(const Expr& t) const;
  StepResult next(ExprPtr t) {
    return StepResult{StepResult::Kind::Next, std::move(t), {}};
  }
  StepResult stuck(std::string reason) {
    return StepResult{StepResult::Kind::Stuck, nullptr, std::move(reason)};
  }

  std::set<std::string> ctors_;
  std::vector<ExprPtr> mu_;
  std::vector<ExprPtr> omega_;
};

// The hardware type of a hardware value term (bit literals, gate terms,
// arrays, records, wrap-free). Used for wrap-store typing.
TypePtr hw_term_type(const Expr& t, const SmallStep& engine);

}  // namespace gemini
