#include "gemini/infer.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace gemini {

namespace {

const char* unify_error_name(UnifyStatus s) {
  switch (s) {
    case UnifyStatus::KindError: return "kind mismatch";
    case UnifyStatus::OccursError: return "occurs check failed";
    default: return "type mismatch";
  }
}

Code unify_error_code(UnifyStatus s) {
  switch (s) {
    case UnifyStatus::KindError: return Code::KindMismatch;
    case UnifyStatus::OccursError: return Code::OccursCycle;
    default: return Code::TypeMismatch;
  }
}

}  // namespace

void substitute_env(const SubstEnv& env, TypeEnv& gamma, int iteration_cap) {
  bool has_changed = true;
  int iterations = 0;
  while (has_changed) {
    has_changed = false;
    gamma.for_each([&](const std::string&, TypePtr& type) {
      bool changed = false;
      type = subst_pass(env, type, &changed);
      has_changed = has_changed || changed;
    });
    if (++iterations > iteration_cap)
      throw InternalError("environment substitution exceeded its iteration cap");
  }
}

TypePtr Analyzer::lookup_value(const std::string& name) {
  TypePtr* t = gamma_.lookup(name);
  return t ? subst_fully(subst_, *t, substitution_cap) : nullptr;
}

TypePtr Analyzer::recovery_for(const TypePtr& a, const TypePtr& b) const {
  TyKind ka = kind_of(a), kb = kind_of(b);
  if (ka == kb) {
    switch (ka) {
      case TyKind::Software: return t_sbottom();
      case TyKind::Hardware: return t_hbottom();
      case TyKind::Module: return t_mbottom();
      default: return t_bottom();
    }
  }
  return t_bottom();
}

TypePtr Analyzer::unify_or_diag(TypePtr expected, TypePtr actual, Span span,
                                const char* context) {
  Unifier u(subst_);
  UnifyResult r = u.unify(expected, actual);
  if (r.ok()) return resolve_now(std::move(expected));
  TypeRenderer renderer;
  std::string left = renderer.render(subst_fully(subst_, r.left, substitution_cap));
  std::string right = renderer.render(subst_fully(subst_, r.right, substitution_cap));
  diags_.error(unify_error_code(r.status), span,
               fmt::format("{} in {}: {} vs {}", unify_error_name(r.status), context,
                           left, right));
  return recovery_for(r.left, r.right);
}

void Analyzer::free_in_gamma(std::unordered_set<int>& metas,
                             std::unordered_set<int>& sizes) {
  gamma_.for_each([&](const std::string&, TypePtr& type) {
    std::vector<int> m, s;
    free_metas(subst_, type, m, s);
    metas.insert(m.begin(), m.end());
    sizes.insert(s.begin(), s.end());
  });
}

TypePtr Analyzer::generalize_binding(TypePtr t) {
  std::unordered_set<int> metas, sizes;
  free_in_gamma(metas, sizes);
  return generalize(subst_, std::move(t), metas, sizes);
}

// ---------------------------------------------------------------------------
// Annotation translation (decoration of explicit types)
// ---------------------------------------------------------------------------

TypePtr Analyzer::translate_ty(const AstTy& ty, Dec* size_sink) {
  switch (ty.kind) {
    case AstTy::Kind::Name: {
      if (ty.name == "int") return t_int();
      if (ty.name == "real") return t_real();
      if (ty.name == "string") return t_string();
      if (ty.name == "bit") return t_bit();
      if (ty.name == "unit") return t_unit();
      TyBinding* binding = tau_.lookup(ty.name);
      if (!binding) {
        diags_.error(Code::UnknownTypeName, ty.span,
                     fmt::format("unknown type name '{}'", ty.name));
        return t_bottom();
      }
      if (!binding->params.empty()) {
        diags_.error(Code::UnknownTypeName, ty.span,
                     fmt::format("type constructor '{}' expects an argument", ty.name));
        return t_bottom();
      }
      return binding->body;
    }
    case AstTy::Kind::Apply: {
      TypePtr arg = translate_ty(*ty.args[0], size_sink);
      TyBinding* binding = tau_.lookup(ty.name);
      if (!binding) {
        diags_.error(Code::UnknownTypeName, ty.span,
                     fmt::format("unknown type name '{}'", ty.name));
        return t_bottom();
      }
      if (binding->params.size() != 1) {
        diags_.error(Code::UnknownTypeName, ty.span,
                     fmt::format("type constructor '{}' takes {} argument(s)", ty.name,
                                 binding->params.size()));
        return t_bottom();
      }
      TypePtr body = subst_fully(subst_, binding->body, substitution_cap);
      Unifier u(subst_);
      // Parameter metavariables are datatype-global; applying a constructor
      // instantiates them through a fresh copy.
      std::unordered_set<int> outer;
      TypePtr generic = generalize(subst_, body, {}, {});
      (void)outer;
      std::vector<int> params = binding->params;
      // Build an explicit substitution param -> arg over a fresh instance.
      struct Repl {
        static TypePtr run(const TypePtr& t, int param, const TypePtr& arg) {
          if (is_meta(t) && t->meta_id == param) return arg;
          auto copy = std::make_shared<Type>(*t);
          bool changed = false;
          for (auto& a : copy->args) {
            if (!a) continue;
            TypePtr r = run(a, param, arg);
            if (r != a) changed = true;
            a = r;
          }
          return changed ? TypePtr(copy) : t;
        }
      };
      TypePtr out = body;
      out = Repl::run(out, params[0], arg);
      return out;
    }
    case AstTy::Kind::Var: {
      TypePtr* bound = tyvars_.lookup(ty.name);
      if (bound) return *bound;
      TypePtr fresh = fresh_.fresh(TyKind::Software);
      tyvars_.bind(ty.name, fresh);
      return fresh;
    }
    case AstTy::Kind::SwRecord:
    case AstTy::Kind::HwRecord: {
      bool hw = ty.kind == AstTy::Kind::HwRecord;
      std::vector<std::string> labels;
      std::vector<TypePtr> types;
      for (const auto& [label, field] : ty.fields) {
        labels.push_back(label);
        TypePtr t = translate_ty(*field, size_sink);
        if (kind_of(t) != (hw ? TyKind::Hardware : TyKind::Software) &&
            kind_of(t) != TyKind::Unknown) {
          diags_.error(Code::KindMismatch, field->span,
                       fmt::format("record field '{}' has the wrong kind", label));
          t = hw ? t_hbottom() : t_sbottom();
        }
        types.push_back(t);
      }
      return hw ? t_hrecord(std::move(labels), std::move(types))
                : t_srecord(std::move(labels), std::move(types));
    }
    case AstTy::Kind::Tuple:
    case AstTy::Kind::HwTuple: {
      bool hw = ty.kind == AstTy::Kind::HwTuple;
      std::vector<TypePtr> types;
      for (const auto& a : ty.args) types.push_back(translate_ty(*a, size_sink));
      return hw ? t_htuple(std::move(types)) : t_tuple(std::move(types));
    }
    case AstTy::Kind::Array:
    case AstTy::Kind::Temporal: {
      TypePtr elem = translate_ty(*ty.args[0], size_sink);
      if (kind_of(elem) == TyKind::Software) {
        diags_.error(Code::KindMismatch, ty.span,
                     "array and temporal types take hardware elements");
        elem = t_hbottom();
      }
      SizeTerm size;
      if (ty.size->kind == Expr::Kind::IntLit) {
        if (ty.size->int_value < 0) {
          diags_.error(Code::TypeMismatch, ty.size->span, "size must be non-negative");
        }
        size = SizeTerm::concrete(std::max<int64_t>(0, ty.size->int_value));
      } else {
        // The size is fixed by staged evaluation; give it a variable now and
        // remember which expression pins it.
        size = SizeTerm::variable(fresh_.fresh_size_var());
        if (size_sink) size_sink->size_constraints.emplace_back(size.var, ty.size.get());
      }
      return ty.kind == AstTy::Kind::Array ? t_array(elem, size)
                                           : t_temporal(elem, size);
    }
    case AstTy::Kind::List: {
      TypePtr elem = translate_ty(*ty.args[0], size_sink);
      if (kind_of(elem) == TyKind::Hardware || kind_of(elem) == TyKind::Module) {
        diags_.error(Code::KindMismatch, ty.span, "list elements must be software");
        elem = t_sbottom();
      }
      return t_list(elem);
    }
    case AstTy::Kind::Ref: {
      TypePtr elem = translate_ty(*ty.args[0], size_sink);
      if (kind_of(elem) == TyKind::Hardware || kind_of(elem) == TyKind::Module) {
        diags_.error(Code::KindMismatch, ty.span, "ref contents must be software");
        elem = t_sbottom();
      }
      return t_ref(elem);
    }
    case AstTy::Kind::Sw: {
      TypePtr inner = translate_ty(*ty.args[0], size_sink);
      if (kind_of(inner) == TyKind::Software || kind_of(inner) == TyKind::Module) {
        diags_.error(Code::KindMismatch, ty.span, "sw wraps a hardware type");
        inner = t_hbottom();
      }
      return t_sw(inner);
    }
    case AstTy::Kind::Fun: {
      TypePtr a = translate_ty(*ty.args[0], size_sink);
      TypePtr b = translate_ty(*ty.args[1], size_sink);
      for (TypePtr* t : {&a, &b}) {
        if (kind_of(*t) == TyKind::Hardware || kind_of(*t) == TyKind::Module) {
          diags_.error(Code::KindMismatch, ty.span,
                       "function types connect software types");
          *t = t_sbottom();
        }
      }
      return t_arrow(a, b);
    }
    case AstTy::Kind::Module: {
      TypePtr a = translate_ty(*ty.args[0], size_sink);
      TypePtr b = translate_ty(*ty.args[1], size_sink);
      return t_module(a, b);
    }
  }
  return t_bottom();
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

void Analyzer::check_dec(Dec& d) {
  switch (d.kind) {
    case Dec::Kind::Val: check_val_dec(d); break;
    case Dec::Kind::Fun: check_fun_dec(d); break;
    case Dec::Kind::Type: check_type_dec(d); break;
    case Dec::Kind::Datatype: check_datatype_dec(d); break;
    case Dec::Kind::Module: check_module_dec(d); break;
  }
  // Persist the unification results into the visible environment, then keep
  // trying field accesses that were blocked on unresolved record types.
  substitute_env(subst_, gamma_, substitution_cap);
  retry_deferred(false);
}

namespace {

bool is_syntactic_value(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::RealLit:
    case Expr::Kind::StringLit:
    case Expr::Kind::BitLit:
    case Expr::Kind::Var:
    case Expr::Kind::Lambda:
      return true;
    case Expr::Kind::ListLit:
    case Expr::Kind::TupleLit:
    case Expr::Kind::ArrayLit:
      for (const auto& item : e.items)
        if (!is_syntactic_value(*item)) return false;
      return true;
    case Expr::Kind::RecordLit:
      for (const auto& [label, sub] : e.fields)
        if (!is_syntactic_value(*sub)) return false;
      return true;
    case Expr::Kind::SwWrap:
      return is_syntactic_value(*e.items[0]);
    default:
      return false;
  }
}

}  // namespace

void Analyzer::check_val_dec(Dec& d) {
  tyvars_.push_scope();
  TypePtr annotated;
  if (d.annotation) annotated = translate_ty(*d.annotation, &d);

  // An array-generation right-hand side may refer to the binding itself
  // (earlier elements are visible while later ones are generated), so the
  // name is pre-bound for the body.
  bool self_recursive = d.rhs->kind == Expr::Kind::ArrayGen;
  TypePtr pre;
  if (self_recursive) {
    pre = fresh_.fresh(TyKind::Hardware);
    gamma_.bind(d.name, pre);
  }

  TypePtr rhs = check_inner(*d.rhs);
  if (annotated) rhs = unify_or_diag(annotated, rhs, d.span, "the value annotation");
  if (self_recursive) rhs = unify_or_diag(pre, rhs, d.span, "the recursive array binding");

  // Only syntactic values generalize; expressions such as `ref nil` must
  // stay monomorphic.
  TypePtr final_ty = is_syntactic_value(*d.rhs) && !self_recursive
                         ? generalize_binding(rhs)
                         : subst_fully(subst_, rhs, substitution_cap);
  d.sem_type = final_ty;
  gamma_.bind(d.name, final_ty);
  tyvars_.pop_scope();
}

void Analyzer::check_fun_dec(Dec& d) {
  tyvars_.push_scope();
  d.sem_params.clear();

  // Parameters and result start as metavariables (or their annotations); the
  // function name is visible in its own body with this preliminary type, so
  // recursive applications unify against it.
  std::vector<TypePtr> group_tys;
  for (const auto& group : d.groups) {
    std::vector<TypePtr> params;
    for (const auto& [name, ann] : group.params) {
      TypePtr t = ann ? translate_ty(*ann, &d) : fresh_.fresh(TyKind::Software);
      if (kind_of(t) == TyKind::Hardware || kind_of(t) == TyKind::Module) {
        diags_.error(Code::KindMismatch, group.span,
                     fmt::format("function parameter '{}' must be software-typed", name));
        t = t_sbottom();
      }
      params.push_back(t);
    }
    d.sem_params.push_back(params);
    switch (group.kind) {
      case ParamGroup::Kind::Single:
        group_tys.push_back(params[0]);
        break;
      case ParamGroup::Kind::Tuple:
        group_tys.push_back(t_tuple(params));
        break;
      case ParamGroup::Kind::Record: {
        std::vector<std::string> labels;
        for (const auto& [name, ann] : group.params) labels.push_back(name);
        group_tys.push_back(t_srecord(labels, params));
        break;
      }
    }
  }
  TypePtr result = d.annotation ? translate_ty(*d.annotation, &d)
                                : fresh_.fresh(TyKind::Software);
  TypePtr full = result;
  for (auto it = group_tys.rbegin(); it != group_tys.rend(); ++it)
    full = t_arrow(*it, full);

  gamma_.push_scope();
  gamma_.bind(d.name, full);
  for (size_t g = 0; g < d.groups.size(); ++g)
    for (size_t i = 0; i < d.groups[g].params.size(); ++i)
      gamma_.bind(d.groups[g].params[i].first, d.sem_params[g][i]);

  TypePtr body = check_inner(*d.body);
  unify_or_diag(result, body, d.body->span, "the function result");
  gamma_.pop_scope();

  TypePtr final_ty = generalize_binding(full);
  d.sem_type = final_ty;
  gamma_.bind(d.name, final_ty);
  tyvars_.pop_scope();
}

void Analyzer::check_type_dec(Dec& d) {
  tyvars_.push_scope();
  std::vector<int> params;
  for (const auto& var : d.tyvars) {
    TypePtr m = fresh_.fresh(TyKind::Software);
    params.push_back(m->meta_id);
    tyvars_.bind(var, m);
  }
  TypePtr body = translate_ty(*d.ty_rhs, &d);
  tyvars_.pop_scope();
  d.sem_type = body;
  tau_.bind(d.name, TyBinding{std::move(params), body});
}

void Analyzer::check_datatype_dec(Dec& d) {
  tyvars_.push_scope();
  uint64_t tag = fresh_.fresh_datatype_tag();
  TyKind payload_kind = d.hardware ? TyKind::Hardware : TyKind::Software;

  std::vector<int> params;
  for (const auto& var : d.tyvars) {
    TypePtr m = fresh_.fresh(payload_kind);
    params.push_back(m->meta_id);
    tyvars_.bind(var, m);
  }

  // While the constructors are processed, the datatype name maps to a
  // temporary metavariable; recursive references pick it up.
  TypePtr temp = fresh_.fresh(payload_kind);
  tau_.bind(d.name, TyBinding{params, temp});

  std::vector<std::string> names;
  std::vector<TypePtr> payloads;
  for (const auto& ctor : d.ctors) {
    names.push_back(ctor.name);
    TypePtr payload = ctor.payload ? translate_ty(*ctor.payload, &d) : nullptr;
    if (payload) {
      TyKind k = kind_of(payload);
      if (d.hardware ? k == TyKind::Software || k == TyKind::Module
                     : k == TyKind::Hardware || k == TyKind::Module) {
        diags_.error(Code::KindMismatch, ctor.span,
                     fmt::format("constructor '{}' payload has the wrong kind",
                                 ctor.name));
        payload = d.hardware ? t_hbottom() : t_sbottom();
      }
    }
    payloads.push_back(payload);
  }

  TypePtr union_ty;
  if (d.hardware) {
    for (const auto& p : payloads) {
      if (p && occurs(subst_, temp->meta_id, p)) {
        diags_.error(Code::UnsupportedFeature, d.span,
                     "recursive hardware datatypes are not supported");
      }
    }
    union_ty = t_hdatatype(names, payloads, tag, d.name);
    subst_.bind(temp->meta_id, union_ty);
  } else {
    // The recursive knot: the union is wrapped in a mu binder over the
    // temporary metavariable, which expands one level per constructor use.
    union_ty = t_smu({temp->meta_id}, t_sdatatype(names, payloads, tag, d.name));
    subst_.bind(temp->meta_id, union_ty);
  }
  d.sem_type = union_ty;

  for (size_t i = 0; i < d.ctors.size(); ++i) {
    CtorInfo info;
    info.name = d.ctors[i].name;
    info.datatype = union_ty;
    info.payload = payloads[i];
    info.poly_params = params;
    info.tag = tag;
    info.hardware = d.hardware;
    info.sibling_ctors = names;
    ctors_.bind(info.name, info);

    // Constructors are also ordinary values: C : payload -> D, or D itself
    // when nullary, generalized over the datatype parameters.
    TypePtr value_ty = payloads[i] ? t_arrow(payloads[i], union_ty) : union_ty;
    if (!params.empty() && !d.hardware) value_ty = t_spoly(params, {}, value_ty);
    gamma_.bind(info.name, value_ty);
  }
  tyvars_.pop_scope();
}

void Analyzer::check_module_dec(Dec& d) {
  tyvars_.push_scope();
  d.sem_params.clear();
  gamma_.push_scope();
  if (d.size_param) gamma_.bind(*d.size_param, t_int());

  const ParamGroup& group = d.groups[0];
  std::vector<TypePtr> params;
  for (const auto& [name, ann] : group.params) {
    TypePtr t = ann ? translate_ty(*ann, &d) : fresh_.fresh(TyKind::Hardware);
    if (kind_of(t) == TyKind::Software || kind_of(t) == TyKind::Module) {
      diags_.error(Code::KindMismatch, group.span,
                   fmt::format("module parameter '{}' must be hardware-typed", name));
      t = t_hbottom();
    }
    params.push_back(t);
    gamma_.bind(name, t);
  }
  d.sem_params.push_back(params);

  TypePtr input;
  switch (group.kind) {
    case ParamGroup::Kind::Single: input = params[0]; break;
    case ParamGroup::Kind::Tuple: input = t_htuple(params); break;
    case ParamGroup::Kind::Record: {
      std::vector<std::string> labels;
      for (const auto& [name, ann] : group.params) labels.push_back(name);
      input = t_hrecord(labels, params);
      break;
    }
  }

  TypePtr body = check_inner(*d.body);
  TypePtr out = unify_or_diag(fresh_.fresh(TyKind::Hardware), body, d.body->span,
                              "the module body");
  if (d.annotation) {
    TypePtr ann = translate_ty(*d.annotation, &d);
    out = unify_or_diag(ann, out, d.span, "the module result annotation");
  }
  gamma_.pop_scope();

  TypePtr module_ty = d.size_param ? t_param_module(t_int(), input, out)
                                   : t_module(input, out);
  TypePtr final_ty = generalize_binding(module_ty);
  d.sem_type = final_ty;
  gamma_.bind(d.name, final_ty);
  tyvars_.pop_scope();
}

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

TypePtr Analyzer::check_pattern(Pattern& p, const TypePtr& scrutinee) {
  switch (p.kind) {
    case Pattern::Kind::Int:
      return unify_or_diag(scrutinee, t_int(), p.span, "an integer pattern");
    case Pattern::Kind::Real:
      return unify_or_diag(scrutinee, t_real(), p.span, "a real pattern");
    case Pattern::Kind::String:
      return unify_or_diag(scrutinee, t_string(), p.span, "a string pattern");
    case Pattern::Kind::Var: {
      // A bare identifier naming a constructor is a nullary constructor
      // pattern; anything else binds.
      CtorInfo* info = ctors_.lookup(p.str_value);
      if (info && !info->payload) {
        p.resolved_ctor = true;
        p.ctor_tag = info->tag;
        TypePtr dt = info->datatype;
        if (!info->poly_params.empty())
          dt = instantiate_binding(t_spoly(info->poly_params, {}, dt));
        return unify_or_diag(scrutinee, dt, p.span, "a constructor pattern");
      }
      gamma_.bind(p.str_value, scrutinee);
      return scrutinee;
    }
    case Pattern::Kind::Ctor: {
      CtorInfo* info = ctors_.lookup(p.str_value);
      if (!info) {
        diags_.error(Code::UnboundIdentifier, p.span,
                     fmt::format("unknown constructor '{}'", p.str_value));
        return scrutinee;
      }
      if (!info->payload) {
        diags_.error(Code::TypeMismatch, p.span,
                     fmt::format("constructor '{}' takes no argument", p.str_value));
        return scrutinee;
      }
      p.resolved_ctor = true;
      p.ctor_tag = info->tag;
      TypePtr dt = info->datatype;
      TypePtr payload = info->payload;
      if (!info->poly_params.empty()) {
        // Freshen the datatype parameters uniformly across both types.
        TypePtr pair =
            instantiate_binding(t_spoly(info->poly_params, {}, t_tuple({payload, dt})));
        payload = pair->args[0];
        dt = pair->args[1];
      }
      unify_or_diag(scrutinee, dt, p.span, "a constructor pattern");
      check_pattern(*p.items[0], resolve_now(payload));
      return scrutinee;
    }
    case Pattern::Kind::Tuple: {
      std::vector<TypePtr> elems;
      for (size_t i = 0; i < p.items.size(); ++i)
        elems.push_back(fresh_.fresh(TyKind::Software));
      unify_or_diag(scrutinee, t_tuple(elems), p.span, "a tuple pattern");
      for (size_t i = 0; i < p.items.size(); ++i)
        check_pattern(*p.items[i], resolve_now(elems[i]));
      return scrutinee;
    }
    case Pattern::Kind::Record: {
      std::vector<std::string> labels;
      std::vector<TypePtr> elems;
      for (const auto& [label, sub] : p.fields) {
        labels.push_back(label);
        elems.push_back(fresh_.fresh(TyKind::Software));
      }
      unify_or_diag(scrutinee, t_srecord(labels, elems), p.span, "a record pattern");
      for (size_t i = 0; i < p.fields.size(); ++i)
        check_pattern(*p.fields[i].second, resolve_now(elems[i]));
      return scrutinee;
    }
    case Pattern::Kind::Cons: {
      TypePtr elem = fresh_.fresh(TyKind::Software);
      unify_or_diag(scrutinee, t_list(elem), p.span, "a cons pattern");
      check_pattern(*p.items[0], resolve_now(elem));
      check_pattern(*p.items[1], resolve_now(t_list(elem)));
      return scrutinee;
    }
    case Pattern::Kind::List: {
      TypePtr elem = fresh_.fresh(TyKind::Software);
      unify_or_diag(scrutinee, t_list(elem), p.span, "a list pattern");
      for (auto& item : p.items) check_pattern(*item, resolve_now(elem));
      return scrutinee;
    }
  }
  return scrutinee;
}

bool Analyzer::pattern_irrefutable(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Var:
      return !p.resolved_ctor;
    case Pattern::Kind::Tuple:
    case Pattern::Kind::Record: {
      for (const auto& item : p.items)
        if (!pattern_irrefutable(*item)) return false;
      for (const auto& [label, sub] : p.fields)
        if (!pattern_irrefutable(*sub)) return false;
      return true;
    }
    default:
      return false;
  }
}

bool Analyzer::arms_exhaustive(const std::vector<std::pair<PatternPtr, ExprPtr>>& arms,
                               const TypePtr& scrutinee) {
  for (const auto& [pat, body] : arms)
    if (pattern_irrefutable(*pat)) return true;

  TypePtr t = resolve_now(scrutinee);
  if (t->tag == TyTag::SMu) t = resolve_now(t->args[0]);
  if (t->tag == TyTag::SDatatype) {
    // Covered when every constructor appears with an irrefutable payload.
    std::unordered_set<std::string> covered;
    for (const auto& [pat, body] : arms) {
      if (pat->kind == Pattern::Kind::Var && pat->resolved_ctor)
        covered.insert(pat->str_value);
      if (pat->kind == Pattern::Kind::Ctor && pat->resolved_ctor &&
          (pat->items.empty() || pattern_irrefutable(*pat->items[0])))
        covered.insert(pat->str_value);
    }
    for (const auto& name : t->labels)
      if (!covered.count(name)) return false;
    return true;
  }
  if (t->tag == TyTag::List) {
    bool has_empty = false, has_cons = false;
    for (const auto& [pat, body] : arms) {
      if (pat->kind == Pattern::Kind::List && pat->items.empty()) has_empty = true;
      if (pat->kind == Pattern::Kind::Cons && pattern_irrefutable(*pat->items[0]) &&
          pattern_irrefutable(*pat->items[1]))
        has_cons = true;
    }
    return has_empty && has_cons;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Comparisons (semantics defined per type)
// ---------------------------------------------------------------------------

bool Analyzer::equality_comparable(const TypePtr& t0, std::unordered_set<uint64_t>& seen) {
  TypePtr t = resolve_now(t0);
  switch (t->tag) {
    case TyTag::Int:
    case TyTag::Real:
    case TyTag::String:
      return true;
    case TyTag::Meta:
    case TyTag::SMeta:
      return true;  // polymorphic equality stays open
    case TyTag::List:
      return equality_comparable(t->args[0], seen);
    case TyTag::SRecord: {
      for (const auto& a : t->args)
        if (!equality_comparable(a, seen)) return false;
      return true;
    }
    case TyTag::SMu:
      return equality_comparable(t->args[0], seen);
    case TyTag::SDatatype: {
      if (!seen.insert(t->dt_tag).second) return true;
      for (const auto& a : t->args)
        if (a && !equality_comparable(a, seen)) return false;
      return true;
    }
    case TyTag::STop:
    case TyTag::SBottom:
    case TyTag::Top:
    case TyTag::Bottom:
      return true;
    default:
      return false;  // functions, refs, sw wrappers, hardware
  }
}

void Analyzer::check_comparison(BinOp op, const TypePtr& t, Span span) {
  bool ordering = op == BinOp::Lt || op == BinOp::Gt || op == BinOp::Le || op == BinOp::Ge;
  TypePtr r = resolve_now(t);
  if (ordering) {
    if (is_meta(r)) {
      // Overloaded orderings default to int, the kind's principal base type.
      unify_or_diag(r, t_int(), span, "an ordering comparison");
      return;
    }
    if (r->tag != TyTag::Int && r->tag != TyTag::Real && r->tag != TyTag::String &&
        !is_recovery(r)) {
      diags_.error(Code::TypeMismatch, span,
                   fmt::format("'{}' is not ordered: {}", binop_name(op), render_type(r)));
    }
    return;
  }
  std::unordered_set<uint64_t> seen;
  if (!equality_comparable(r, seen)) {
    diags_.error(Code::TypeMismatch, span,
                 fmt::format("'{}' is not defined for {}", binop_name(op), render_type(r)));
  }
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

TypePtr Analyzer::check(Expr& e) {
  TypePtr t = check_inner(e);
  retry_deferred(false);
  return subst_fully(subst_, t, substitution_cap);
}

TypePtr Analyzer::check_inner(Expr& e) {
  TypePtr t = [&]() -> TypePtr {
    switch (e.kind) {
      case Expr::Kind::IntLit: return t_int();
      case Expr::Kind::RealLit: return t_real();
      case Expr::Kind::StringLit: return t_string();
      case Expr::Kind::BitLit: return t_bit();
      case Expr::Kind::Location:
      case Expr::Kind::WrapHandle:
        // Not reachable from source programs; the small-step engine types
        // these through its own store typing.
        return t_bottom();

      case Expr::Kind::Var: {
        TypePtr* bound = gamma_.lookup(e.str_value);
        if (!bound) {
          diags_.error(Code::UnboundIdentifier, e.span,
                       fmt::format("unbound identifier '{}'", e.str_value));
          return t_bottom();
        }
        TypePtr t = subst_fully(subst_, *bound, substitution_cap);
        return instantiate_binding(t);
      }

      case Expr::Kind::ListLit: {
        TypePtr elem = fresh_.fresh(TyKind::Software);
        for (auto& item : e.items)
          unify_or_diag(elem, check_inner(*item), item->span, "a list element");
        return t_list(elem);
      }

      case Expr::Kind::TupleLit:
      case Expr::Kind::UnitLit:
      case Expr::Kind::HwTupleLit:
        throw InternalError("derived term survived desugaring");

      case Expr::Kind::RecordLit: {
        std::vector<std::string> labels;
        std::vector<TypePtr> types;
        for (auto& [label, sub] : e.fields) {
          labels.push_back(label);
          TypePtr ft = check_inner(*sub);
          TypePtr want = fresh_.fresh(e.hardware ? TyKind::Hardware : TyKind::Software);
          types.push_back(unify_or_diag(want, ft, sub->span,
                                        e.hardware ? "a hardware record field"
                                                   : "a record field"));
        }
        return e.hardware ? t_hrecord(std::move(labels), std::move(types))
                          : t_srecord(std::move(labels), std::move(types));
      }

      case Expr::Kind::ArrayLit: {
        TypePtr elem = fresh_.fresh(TyKind::Hardware);
        for (auto& item : e.items)
          unify_or_diag(elem, check_inner(*item), item->span, "an array element");
        return t_array(elem, SizeTerm::concrete(static_cast<int64_t>(e.items.size())));
      }

      case Expr::Kind::ArrayGen: {
        unify_or_diag(t_int(), check_inner(*e.items[0]), e.items[0]->span,
                      "the array size");
        gamma_.push_scope();
        gamma_.bind(e.str_value, t_int());
        TypePtr elem = unify_or_diag(fresh_.fresh(TyKind::Hardware),
                                     check_inner(*e.items[1]), e.items[1]->span,
                                     "the generator body");
        gamma_.pop_scope();
        SizeTerm size = e.items[0]->kind == Expr::Kind::IntLit
                            ? SizeTerm::concrete(e.items[0]->int_value)
                            : SizeTerm::variable(fresh_.fresh_size_var());
        return t_array(elem, size);
      }

      case Expr::Kind::BitArrayBuild: {
        unify_or_diag(t_int(), check_inner(*e.items[0]), e.items[0]->span,
                      "the bit-array width");
        unify_or_diag(t_int(), check_inner(*e.items[1]), e.items[1]->span,
                      "the bit-array value");
        SizeTerm size = e.items[0]->kind == Expr::Kind::IntLit
                            ? SizeTerm::concrete(e.items[0]->int_value)
                            : SizeTerm::variable(fresh_.fresh_size_var());
        return t_array(t_bit(), size);
      }

      case Expr::Kind::RefLit: {
        TypePtr inner = unify_or_diag(fresh_.fresh(TyKind::Software),
                                      check_inner(*e.items[0]), e.items[0]->span,
                                      "the ref contents");
        return t_ref(inner);
      }

      case Expr::Kind::SwWrap: {
        TypePtr inner = unify_or_diag(fresh_.fresh(TyKind::Hardware),
                                      check_inner(*e.items[0]), e.items[0]->span,
                                      "the sw wrapper");
        return t_sw(inner);
      }

      case Expr::Kind::UnswWrap: {
        TypePtr inner = fresh_.fresh(TyKind::Hardware);
        unify_or_diag(t_sw(inner), check_inner(*e.items[0]), e.items[0]->span,
                      "the unsw operand");
        return resolve_now(inner);
      }

      case Expr::Kind::Unary: {
        TypePtr operand = check_inner(*e.items[0]);
        switch (e.unop) {
          case UnOp::IntNeg: {
            TypePtr r = resolve_now(operand);
            if (r->tag == TyTag::Real) return t_real();
            return unify_or_diag(t_int(), operand, e.span, "integer negation");
          }
          case UnOp::BitNot:
            return unify_or_diag(fresh_.fresh(TyKind::Hardware), operand, e.span,
                                 "bitwise negation");
          case UnOp::AndReduce:
          case UnOp::OrReduce:
          case UnOp::XorReduce:
            unify_or_diag(t_array(t_bit(), SizeTerm::variable(fresh_.fresh_size_var())),
                          operand, e.span, "a reduction");
            return t_bit();
          case UnOp::Deref: {
            TypePtr inner = fresh_.fresh(TyKind::Software);
            unify_or_diag(t_ref(inner), operand, e.span, "a dereference");
            return resolve_now(inner);
          }
          case UnOp::LogNot:
            throw InternalError("derived term survived desugaring");
        }
        return t_bottom();
      }

      case Expr::Kind::Binary: {
        TypePtr lhs = check_inner(*e.items[0]);
        TypePtr rhs = check_inner(*e.items[1]);
        switch (e.binop) {
          case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
          case BinOp::Div: case BinOp::Mod:
            unify_or_diag(t_int(), lhs, e.items[0]->span, "integer arithmetic");
            unify_or_diag(t_int(), rhs, e.items[1]->span, "integer arithmetic");
            return t_int();
          case BinOp::RAdd: case BinOp::RSub: case BinOp::RMul: case BinOp::RDiv:
            unify_or_diag(t_real(), lhs, e.items[0]->span, "real arithmetic");
            unify_or_diag(t_real(), rhs, e.items[1]->span, "real arithmetic");
            return t_real();
          case BinOp::And: case BinOp::Or: case BinOp::Xor: {
            TypePtr t = unify_or_diag(fresh_.fresh(TyKind::Hardware), lhs,
                                      e.items[0]->span, "a bitwise operation");
            return unify_or_diag(t, rhs, e.span, "a bitwise operation");
          }
          case BinOp::Shl: case BinOp::Shr: case BinOp::Sar: {
            TypePtr t = unify_or_diag(
                t_array(t_bit(), SizeTerm::variable(fresh_.fresh_size_var())), lhs,
                e.items[0]->span, "a shift");
            unify_or_diag(t_array(t_bit(), SizeTerm::variable(fresh_.fresh_size_var())),
                          rhs, e.items[1]->span, "a shift amount");
            return t;
          }
          case BinOp::Eq: case BinOp::NotEq:
          case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge: {
            TypePtr want = fresh_.fresh(TyKind::Software);
            unify_or_diag(want, lhs, e.items[0]->span, "a comparison");
            TypePtr t = unify_or_diag(want, rhs, e.span, "a comparison");
            check_comparison(e.binop, t, e.span);
            return t_int();
          }
          case BinOp::Cons: {
            TypePtr elem = fresh_.fresh(TyKind::Software);
            unify_or_diag(elem, lhs, e.items[0]->span, "the cons head");
            unify_or_diag(t_list(elem), rhs, e.items[1]->span, "the cons tail");
            return resolve_now(t_list(elem));
          }
          case BinOp::Assign: {
            TypePtr inner = fresh_.fresh(TyKind::Software);
            unify_or_diag(t_ref(inner), lhs, e.items[0]->span, "an assignment target");
            unify_or_diag(inner, rhs, e.items[1]->span, "an assignment");
            return t_unit();
          }
          case BinOp::LogAnd: case BinOp::LogOr: case BinOp::LogXor:
          case BinOp::Andalso: case BinOp::Orelse:
            throw InternalError("derived term survived desugaring");
        }
        return t_bottom();
      }

      case Expr::Kind::FieldAccess: {
        TypePtr target = resolve_now(check_inner(*e.items[0]));
        if (is_meta(target)) {
          // The record shape is not known yet; retry once unification has
          // pinned the source type down.
          TypePtr result = fresh_.fresh(TyKind::Unknown);
          deferred_fields_.push_back({target, e.str_value, result, e.span, false});
          return result;
        }
        if (target->tag == TyTag::SRecord || target->tag == TyTag::HRecord) {
          for (size_t i = 0; i < target->labels.size(); ++i)
            if (target->labels[i] == e.str_value) return resolve_now(target->args[i]);
          diags_.error(Code::TypeMismatch, e.span,
                       fmt::format("record {} has no field '{}'", render_type(target),
                                   e.str_value));
          return t_bottom();
        }
        if (is_recovery(target)) return t_bottom();
        diags_.error(Code::TypeMismatch, e.span,
                     fmt::format("#{} needs a record, found {}", e.str_value,
                                 render_type(target)));
        return t_bottom();
      }

      case Expr::Kind::ArrayAccess: {
        TypePtr elem = fresh_.fresh(TyKind::Hardware);
        unify_or_diag(t_array(elem, SizeTerm::variable(fresh_.fresh_size_var())),
                      check_inner(*e.items[0]), e.items[0]->span, "an array access");
        unify_or_diag(t_int(), check_inner(*e.items[1]), e.items[1]->span,
                      "an array index");
        return resolve_now(elem);
      }

      case Expr::Kind::If: {
        unify_or_diag(t_int(), check_inner(*e.items[0]), e.items[0]->span,
                      "the conditional guard");
        TypePtr then_ty = check_inner(*e.items[1]);
        TypePtr else_ty = check_inner(*e.items[2]);
        TypePtr t = unify_or_diag(then_ty, else_ty, e.span, "the conditional branches");
        // Conditionals produce software values.
        return unify_or_diag(fresh_.fresh(TyKind::Software), t, e.span,
                             "the conditional result");
      }

      case Expr::Kind::Let: {
        gamma_.push_scope();
        tau_.push_scope();
        ctors_.push_scope();
        for (auto& d : e.decs) check_dec(d);
        TypePtr body = check_inner(*e.items[0]);
        body = subst_fully(subst_, body, substitution_cap);
        gamma_.pop_scope();
        tau_.pop_scope();
        ctors_.pop_scope();
        return body;
      }

      case Expr::Kind::Seq: {
        TypePtr last;
        for (auto& item : e.items) last = check_inner(*item);
        return last;
      }

      case Expr::Kind::Lambda: {
        tyvars_.push_scope();
        TypePtr param = e.lambda_param_ty ? translate_ty(*e.lambda_param_ty, nullptr)
                                          : fresh_.fresh(TyKind::Software);
        tyvars_.pop_scope();
        gamma_.push_scope();
        gamma_.bind(e.str_value, param);
        TypePtr body = check_inner(*e.items[0]);
        gamma_.pop_scope();
        return t_arrow(param, body);
      }

      case Expr::Kind::App: {
        TypePtr fn = resolve_now(check_inner(*e.items[0]));
        TypePtr arg = check_inner(*e.items[1]);
        if (fn->tag == TyTag::Module) {
          unify_or_diag(fn->args[0], arg, e.items[1]->span, "the module argument");
          return resolve_now(fn->args[1]);
        }
        if (fn->tag == TyTag::ParamModule) {
          diags_.error(Code::TypeMismatch, e.span,
                       "this module needs a size argument <:n:> before application");
          return t_hbottom();
        }
        if (is_recovery(fn)) {
          return t_bottom();
        }
        // Hardware-datatype constructors are applied like functions, so the
        // parameter slot carries an unknown kind until unification fixes it.
        TypePtr result = fresh_.fresh(TyKind::Unknown);
        TypePtr param = fresh_.fresh(TyKind::Unknown);
        unify_or_diag(t_arrow(param, result), fn, e.items[0]->span, "a function application");
        unify_or_diag(param, arg, e.items[1]->span, "the function argument");
        return resolve_now(result);
      }

      case Expr::Kind::Parameterize: {
        TypePtr fn = resolve_now(check_inner(*e.items[0]));
        unify_or_diag(t_int(), check_inner(*e.items[1]), e.items[1]->span,
                      "the module size argument");
        TypePtr in = fresh_.fresh(TyKind::Hardware);
        TypePtr out = fresh_.fresh(TyKind::Hardware);
        unify_or_diag(t_param_module(t_int(), in, out), fn, e.items[0]->span,
                      "a module size application");
        return t_module(resolve_now(in), resolve_now(out));
      }

      case Expr::Kind::Case: {
        TypePtr scrutinee = subst_fully(subst_, check_inner(*e.items[0]),
                                        substitution_cap);
        TypePtr result;
        for (auto& [pat, body] : e.arms) {
          gamma_.push_scope();
          scrutinee = resolve_now(scrutinee);
          check_pattern(*pat, scrutinee);
          TypePtr body_ty = check_inner(*body);
          result = result ? unify_or_diag(result, body_ty, body->span, "the case arms")
                          : body_ty;
          gamma_.pop_scope();
        }
        if (!arms_exhaustive(e.arms, scrutinee)) {
          diags_.warning(Code::NonExhaustiveMatch, e.span,
                         "pattern match is not exhaustive");
        }
        return result ? result : t_bottom();
      }
    }
    return t_bottom();
  }();

  e.sem_type = t;
  return t;
}

void Analyzer::retry_deferred(bool final_pass) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& d : deferred_fields_) {
      if (d.done) continue;
      TypePtr source = resolve_now(d.source);
      if (source->tag == TyTag::SMu) source = unroll_mu(source);
      if (is_meta(source)) continue;
      d.done = true;
      progress = true;
      if (source->tag == TyTag::SRecord || source->tag == TyTag::HRecord) {
        bool found = false;
        for (size_t i = 0; i < source->labels.size(); ++i) {
          if (source->labels[i] == d.label) {
            unify_or_diag(d.result, source->args[i], d.span, "a field access");
            found = true;
            break;
          }
        }
        if (!found) {
          diags_.error(Code::TypeMismatch, d.span,
                       fmt::format("record {} has no field '{}'", render_type(source),
                                   d.label));
        }
      } else if (!is_recovery(source)) {
        diags_.error(Code::TypeMismatch, d.span,
                     fmt::format("#{} needs a record, found {}", d.label,
                                 render_type(source)));
      }
    }
  }
  if (final_pass) {
    for (auto& d : deferred_fields_) {
      if (d.done) continue;
      d.done = true;
      diags_.error(Code::TypeMismatch, d.span,
                   fmt::format("cannot determine the record type for field '{}'", d.label));
    }
  }
}

TypePtr Analyzer::analyze(Expr& program, bool require_module) {
  TypePtr t = check_inner(program);
  retry_deferred(true);
  t = subst_fully(subst_, t, substitution_cap);

  // Metavariables with still-unknown kind default to software.
  std::vector<int> metas, sizes;
  free_metas(subst_, t, metas, sizes);
  bool changed = false;
  for (int id : metas) {
    const TypePtr* bound = subst_.lookup(id);
    if (bound) continue;
    // Kind is recorded in the occurrence; find it in t.
    struct Find {
      static TypePtr run(const TypePtr& n, int id) {
        if (!n) return nullptr;
        if (is_meta(n) && n->meta_id == id) return n;
        for (const auto& a : n->args)
          if (TypePtr r = run(a, id)) return r;
        return nullptr;
      }
    };
    TypePtr occurrence = Find::run(t, id);
    if (occurrence && occurrence->tag == TyTag::Meta) {
      subst_.bind(id, t_smeta(id));
      changed = true;
    }
  }
  if (changed) t = subst_fully(subst_, t, substitution_cap);

  if (require_module && kind_of(t) != TyKind::Module) {
    diags_.error(Code::NonModuleProgram, program.span,
                 fmt::format("a program must return a module, found {}", render_type(t)));
  }
  if (require_module && t->tag == TyTag::ParamModule) {
    diags_.error(Code::NonModuleProgram, program.span,
                 "the program module still expects a size parameter");
  }
  return t;
}

}  // namespace gemini
