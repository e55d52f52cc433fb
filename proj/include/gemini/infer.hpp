#pragma once

#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gemini/ast.hpp"
#include "gemini/diagnostics.hpp"
#include "gemini/types.hpp"

namespace gemini {

// Lexically scoped name table. Inner bindings shadow outer ones; popping a
// scope restores the outer table exactly.
template <typename V>
class ScopedMap {
 public:
  ScopedMap() { scopes_.emplace_back(); }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  void bind(const std::string& name, V value) {
    scopes_.back().emplace_back(name, std::move(value));
  }

  V* lookup(const std::string& name) {
    for (auto scope = scopes_.rbegin(); scope != scopes_.rend(); ++scope) {
      for (auto entry = scope->rbegin(); entry != scope->rend(); ++entry) {
        if (entry->first == name) return &entry->second;
      }
    }
    return nullptr;
  }

  template <typename F>
  void for_each(F&& f) {
    for (auto& scope : scopes_)
      for (auto& [name, value] : scope) f(name, value);
  }

  size_t scope_depth() const { return scopes_.size(); }

 private:
  std::vector<std::vector<std::pair<std::string, V>>> scopes_;
};

// A named type: a plain alias has no parameters; a parametric alias or
// datatype substitutes its parameter metavariables on application.
struct TyBinding {
  std::vector<int> params;
  TypePtr body;
};

// Everything pattern matching and constructor application need to know
// about one datatype constructor.
struct CtorInfo {
  std::string name;
  TypePtr datatype;   // generic (mu-wrapped) datatype
  TypePtr payload;    // generic payload, null when nullary
  std::vector<int> poly_params;  // datatype parameters to freshen per use
  uint64_t tag = 0;
  bool hardware = false;
  std::vector<std::string> sibling_ctors;  // all ctors, for exhaustiveness
};

using TypeEnv = ScopedMap<TypePtr>;

// Fig.-10-style fixed-point substitution over a whole environment. Throws
// InternalError past `iteration_cap` passes.
void substitute_env(const SubstEnv& env, TypeEnv& gamma, int iteration_cap = 10000);

// The semantic analysis pipeline: decoration of binders with explicit types,
// unification-driven inference, and typing-rule checking in one traversal.
// On a mismatch the offending node is given a recovery (TOP/BOTTOM) type and
// analysis continues, so independent errors each get a diagnostic.
class Analyzer {
 public:
  Analyzer(DiagnosticSink& diags, MetaSource& fresh, SubstEnv& subst)
      : diags_(diags), fresh_(fresh), subst_(subst) {}

  // Pre-binds a value name (the standard library installer uses this).
  void bind_value(const std::string& name, TypePtr type) { gamma_.bind(name, type); }
  void bind_type(const std::string& name, TypePtr type) {
    tau_.bind(name, TyBinding{{}, std::move(type)});
  }

  // Analyzes a whole program. When `require_module` is set the program type
  // must live in the module kind. Returns the substituted program type.
  TypePtr analyze(Expr& program, bool require_module = true);

  // Analyzes one expression without the top-level module requirement and
  // without resetting environments (tests and the emit pipeline use this).
  TypePtr check(Expr& e);

  // Looks up a binding's (already generalized) type.
  TypePtr lookup_value(const std::string& name);

  int substitution_cap = 10000;

 private:
  friend struct AnalyzerTestPeer;

  TypePtr check_inner(Expr& e);
  void check_dec(Dec& d);
  void check_val_dec(Dec& d);
  void check_fun_dec(Dec& d);
  void check_type_dec(Dec& d);
  void check_datatype_dec(Dec& d);
  void check_module_dec(Dec& d);

  TypePtr check_pattern(Pattern& p, const TypePtr& scrutinee);
  bool arms_exhaustive(const std::vector<std::pair<PatternPtr, ExprPtr>>& arms,
                       const TypePtr& scrutinee);
  bool pattern_irrefutable(const Pattern& p);

  // Annotation translation (the decoration step for explicit types).
  TypePtr translate_ty(const AstTy& ty, Dec* size_sink);

  TypePtr unify_or_diag(TypePtr expected, TypePtr actual, Span span,
                        const char* context);
  TypePtr recovery_for(const TypePtr& a, const TypePtr& b) const;
  TypePtr resolve_now(TypePtr t) { return resolve(subst_, std::move(t)); }
  TypePtr instantiate_binding(TypePtr t) { return instantiate(t, fresh_); }

  void free_in_gamma(std::unordered_set<int>& metas, std::unordered_set<int>& sizes);
  TypePtr generalize_binding(TypePtr t);

  void retry_deferred(bool final_pass);
  void check_comparison(BinOp op, const TypePtr& t, Span span);
  bool equality_comparable(const TypePtr& t, std::unordered_set<uint64_t>& seen);

  DiagnosticSink& diags_;
  MetaSource& fresh_;
  SubstEnv& subst_;
  TypeEnv gamma_;
  ScopedMap<TyBinding> tau_;
  ScopedMap<CtorInfo> ctors_;
  ScopedMap<TypePtr> tyvars_;  // surface 'a variables in annotations

  struct DeferredField {
    TypePtr source;
    std::string label;
    TypePtr result;
    Span span;
    bool done = false;
  };
  std::vector<DeferredField> deferred_fields_;
};

}  // namespace gemini
