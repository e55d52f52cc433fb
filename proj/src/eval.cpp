#include "gemini/eval.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gemini {

namespace {

[[noreturn]] void fail(Code code, Span span, std::string message) {
  throw EvalError{code, span, std::move(message)};
}

int64_t as_int(const ValuePtr& v, Span span) {
  if (v->kind != Value::Kind::Int)
    fail(Code::EvalError, span, "expected an integer value");
  return v->int_value;
}

// Integer semantics are fixed 32-bit two's complement.
int32_t wrap32(int64_t v) { return static_cast<int32_t>(static_cast<uint32_t>(v)); }

// Division rounds toward negative infinity; modulo takes the divisor's sign
// so that a = (a/b)*b + a%b.
int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
int64_t floor_mod(int64_t a, int64_t b) { return a - floor_div(a, b) * b; }

bool all_literal_bits(const std::vector<ValuePtr>& inputs) {
  for (const auto& v : inputs)
    if (v->kind != Value::Kind::Bit) return false;
  return true;
}

}  // namespace

// Gates whose inputs are all literal bits fold at compile time.
ValuePtr hw_gate(GateOp op, std::vector<ValuePtr> inputs) {
  if (all_literal_bits(inputs)) {
    int acc = op == GateOp::And ? 1 : 0;
    for (const auto& v : inputs) {
      int b = static_cast<int>(v->int_value);
      switch (op) {
        case GateOp::And: acc &= b; break;
        case GateOp::Or: acc |= b; break;
        case GateOp::Xor: acc ^= b; break;
      }
    }
    return v_bit(acc);
  }
  auto g = Value::make(Value::Kind::Gate);
  g->gate_op = op;
  g->items = std::move(inputs);
  return g;
}

namespace {

ValuePtr make_gate(GateOp op, std::vector<ValuePtr> inputs) {
  return hw_gate(op, std::move(inputs));
}

// Element access that stays symbolic on opaque sources (pins, delayed
// values, slices of pins).
ValuePtr element_of(const ValuePtr& array, int64_t index, Span span) {
  if (array->kind == Value::Kind::Array) {
    if (index < 0 || index >= static_cast<int64_t>(array->items.size())) {
      fail(Code::OutOfRange, span,
           fmt::format("array index {} out of range for length {}", index,
                       array->items.size()));
    }
    return array->items[index];
  }
  TypePtr t = hw_type_of(array);
  if (t->tag != TyTag::Array)
    fail(Code::EvalError, span, "indexed value is not an array");
  if (!t->size.is_concrete() || index < 0 || index >= t->size.offset) {
    fail(Code::OutOfRange, span,
         fmt::format("array index {} out of range for length {}", index,
                     t->size.is_concrete() ? std::to_string(t->size.offset)
                                           : "unknown"));
  }
  auto s = Value::make(Value::Kind::Slice);
  s->inner = array;
  s->int_value = index;
  return s;
}

ValuePtr field_of(const ValuePtr& record, const std::string& label, Span span) {
  if (record->kind == Value::Kind::Record || record->kind == Value::Kind::HwRecord) {
    for (const auto& [name, value] : record->fields)
      if (name == label) return value;
    fail(Code::EvalError, span, fmt::format("record has no field '{}'", label));
  }
  if (is_hardware_value(*record)) {
    TypePtr t = hw_type_of(record);
    if (t->tag == TyTag::HRecord) {
      auto f = Value::make(Value::Kind::FieldSel);
      f->inner = record;
      f->str_value = label;
      return f;
    }
  }
  fail(Code::EvalError, span, fmt::format("#{} applied to a non-record value", label));
}

int64_t array_length(const ValuePtr& v, Span span) {
  if (v->kind == Value::Kind::Array) return static_cast<int64_t>(v->items.size());
  TypePtr t = hw_type_of(v);
  if (t->tag == TyTag::Array && t->size.is_concrete()) return t->size.offset;
  fail(Code::EvalError, span, "value is not a sized array");
}

std::vector<std::string> record_labels(const ValuePtr& v, Span span) {
  if (v->kind == Value::Kind::HwRecord || v->kind == Value::Kind::Record) {
    std::vector<std::string> labels;
    for (const auto& [name, value] : v->fields) labels.push_back(name);
    return labels;
  }
  TypePtr t = hw_type_of(v);
  if (t->tag == TyTag::HRecord) return t->labels;
  fail(Code::EvalError, span, "value is not a record");
}

}  // namespace

// ---------------------------------------------------------------------------
// Hardware operators
// ---------------------------------------------------------------------------

ValuePtr build_hardware_not(EvalContext& ctx, const ValuePtr& operand, Span span) {
  TypePtr t = hw_type_of(operand);
  switch (t->tag) {
    case TyTag::Bit: {
      if (operand->kind == Value::Kind::Bit) return v_bit(!operand->int_value);
      auto n = Value::make(Value::Kind::Not);
      n->inner = operand;
      return n;
    }
    case TyTag::Array: {
      int64_t len = array_length(operand, span);
      auto arr = Value::make(Value::Kind::Array);
      for (int64_t i = 0; i < len; ++i)
        arr->items.push_back(build_hardware_not(ctx, element_of(operand, i, span), span));
      return arr;
    }
    case TyTag::HRecord: {
      auto rec = Value::make(Value::Kind::HwRecord);
      for (const auto& label : record_labels(operand, span))
        rec->fields.emplace_back(label,
                                 build_hardware_not(ctx, field_of(operand, label, span), span));
      return rec;
    }
    default:
      fail(Code::EvalError, span, "bitwise negation applied to a non-hardware value");
  }
}

ValuePtr build_hardware_op(EvalContext& ctx, BinOp op, const ValuePtr& lhs,
                           const ValuePtr& rhs, Span span) {
  GateOp gate = op == BinOp::And ? GateOp::And
                : op == BinOp::Or ? GateOp::Or : GateOp::Xor;
  TypePtr lt = hw_type_of(lhs);
  switch (lt->tag) {
    case TyTag::Bit:
      return make_gate(gate, {lhs, rhs});
    case TyTag::Array: {
      int64_t ln = array_length(lhs, span);
      int64_t rn = array_length(rhs, span);
      if (ln != rn) {
        fail(Code::HwTypeError, span,
             fmt::format("elementwise '{}' over arrays of different lengths {} and {}",
                         binop_name(op), ln, rn));
      }
      auto arr = Value::make(Value::Kind::Array);
      for (int64_t i = 0; i < ln; ++i) {
        arr->items.push_back(build_hardware_op(ctx, op, element_of(lhs, i, span),
                                               element_of(rhs, i, span), span));
      }
      return arr;
    }
    case TyTag::HRecord: {
      auto rec = Value::make(Value::Kind::HwRecord);
      for (const auto& label : record_labels(lhs, span)) {
        rec->fields.emplace_back(
            label, build_hardware_op(ctx, op, field_of(lhs, label, span),
                                     field_of(rhs, label, span), span));
      }
      return rec;
    }
    default:
      fail(Code::EvalError, span,
           fmt::format("'{}' applied to a non-hardware value", binop_name(op)));
  }
}

ValuePtr build_reduction(EvalContext& ctx, GateOp op, const ValuePtr& array, Span span) {
  int64_t len = array_length(array, span);
  if (len == 0)
    fail(Code::EvalError, span, "reduction over an empty array");
  if (len == 1) return element_of(array, 0, span);
  std::vector<ValuePtr> inputs;
  for (int64_t i = 0; i < len; ++i) inputs.push_back(element_of(array, i, span));
  return make_gate(op, std::move(inputs));
}

namespace {

// Shift amounts must be statically known: the result is a rewiring of the
// left operand, not a barrel shifter.
int64_t constant_bits_value(const ValuePtr& v, Span span, const char* what) {
  if (v->kind != Value::Kind::Array)
    fail(Code::EvalError, span, fmt::format("{} must be a constant bit array", what));
  int64_t out = 0;
  for (size_t i = v->items.size(); i-- > 0;) {
    if (v->items[i]->kind != Value::Kind::Bit)
      fail(Code::EvalError, span,
           fmt::format("{} must be built from literal bits", what));
    out = (out << 1) | v->items[i]->int_value;
  }
  return out;
}

ValuePtr build_shift(EvalContext& ctx, BinOp op, const ValuePtr& lhs,
                     const ValuePtr& rhs, Span span) {
  int64_t n = array_length(lhs, span);
  int64_t amount = constant_bits_value(rhs, span, "the shift amount");
  auto out = Value::make(Value::Kind::Array);
  auto bit_at = [&](int64_t i) -> ValuePtr { return element_of(lhs, i, span); };
  for (int64_t i = 0; i < n; ++i) {
    switch (op) {
      case BinOp::Shl:
        out->items.push_back(i - amount >= 0 ? bit_at(i - amount) : v_bit(0));
        break;
      case BinOp::Shr:
        out->items.push_back(i + amount < n ? bit_at(i + amount) : v_bit(0));
        break;
      default:  // Sar fills with the most significant bit
        out->items.push_back(i + amount < n ? bit_at(i + amount)
                                            : (n > 0 ? bit_at(n - 1) : v_bit(0)));
        break;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pattern matching
// ---------------------------------------------------------------------------

bool match_pattern(EvalContext& ctx, const Pattern& p, const ValuePtr& v, EnvPtr& env) {
  switch (p.kind) {
    case Pattern::Kind::Int:
      return v->kind == Value::Kind::Int && v->int_value == p.int_value;
    case Pattern::Kind::Real:
      return v->kind == Value::Kind::Real && v->real_value == p.real_value;
    case Pattern::Kind::String:
      return v->kind == Value::Kind::String && v->str_value == p.str_value;
    case Pattern::Kind::Var:
      if (p.resolved_ctor) {
        return v->kind == Value::Kind::Datatype && v->str_value == p.str_value &&
               v->dt_tag == p.ctor_tag;
      }
      env = env_bind(env, p.str_value, v);
      return true;
    case Pattern::Kind::Ctor: {
      if (v->kind != Value::Kind::Datatype || v->str_value != p.str_value ||
          v->dt_tag != p.ctor_tag)
        return false;
      if (!v->inner) return p.items.empty();
      return match_pattern(ctx, *p.items[0], v->inner, env);
    }
    case Pattern::Kind::Tuple: {
      if (v->kind != Value::Kind::Record || v->fields.size() != p.items.size())
        return false;
      for (size_t i = 0; i < p.items.size(); ++i)
        if (!match_pattern(ctx, *p.items[i], v->fields[i].second, env)) return false;
      return true;
    }
    case Pattern::Kind::Record: {
      if (v->kind != Value::Kind::Record) return false;
      for (const auto& [label, sub] : p.fields) {
        const ValuePtr* field = nullptr;
        for (const auto& [name, value] : v->fields)
          if (name == label) field = &value;
        if (!field || !match_pattern(ctx, *sub, *field, env)) return false;
      }
      return true;
    }
    case Pattern::Kind::Cons: {
      if (v->kind != Value::Kind::List || v->items.empty()) return false;
      if (!match_pattern(ctx, *p.items[0], v->items[0], env)) return false;
      auto tail = v_list(std::vector<ValuePtr>(v->items.begin() + 1, v->items.end()));
      return match_pattern(ctx, *p.items[1], tail, env);
    }
    case Pattern::Kind::List: {
      if (v->kind != Value::Kind::List || v->items.size() != p.items.size())
        return false;
      for (size_t i = 0; i < p.items.size(); ++i)
        if (!match_pattern(ctx, *p.items[i], v->items[i], env)) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Module staging
// ---------------------------------------------------------------------------

namespace {

// Materializes a module's parameter types: applies the final substitution,
// then fixes annotation sizes by evaluating their staged expressions.
std::vector<TypePtr> stage_param_types(EvalContext& ctx, const Dec& d, EnvPtr env);

ValuePtr make_module_value(EvalContext& ctx, const Dec& d, EnvPtr env) {
  if (d.size_param) {
    auto v = Value::make(Value::Kind::PreParamModule);
    v->module = std::make_shared<Value::ModuleInfo>();
    v->module->name = d.name;
    v->module->dec = &d;
    v->module->env = env;
    v->module->self_name = d.name;
    return v;
  }
  auto v = Value::make(Value::Kind::Module);
  v->module = std::make_shared<Value::ModuleInfo>();
  v->module->name = d.name;
  v->module->group_kind = d.groups[0].kind;
  for (const auto& [name, ann] : d.groups[0].params)
    v->module->binders.push_back(name);
  v->module->param_types = stage_param_types(ctx, d, env);
  v->module->body = d.body.get();
  v->module->env = env;
  v->module->self_name = d.name;
  return v;
}

std::vector<TypePtr> stage_param_types(EvalContext& ctx, const Dec& d, EnvPtr env) {
  // Evaluate the size expressions recorded during decoration.
  SubstEnv local;
  for (const auto& [var, expr] : d.size_constraints) {
    ValuePtr v = evaluate(ctx, *expr, env);
    int64_t size = as_int(v, expr->span);
    if (size < 0)
      fail(Code::HwTypeError, expr->span,
           fmt::format("array size evaluated to {}", size));
    if (!ctx.subst->lookup_size(var)) {
      local.bind_size(var, SizeTerm::concrete(size));
    }
  }
  std::vector<TypePtr> out;
  for (const auto& t : d.sem_params.at(0)) {
    TypePtr staged = subst_fully(*ctx.subst, t, ctx.substitution_cap);
    staged = subst_fully(local, staged, ctx.substitution_cap);
    out.push_back(staged);
  }
  return out;
}

// Checks a staged argument value against the module's declared input type.
// Size variables still free in the declaration match any length, but the
// same variable must match consistently.
bool hw_match(const SubstEnv& subst, const TypePtr& declared, const ValuePtr& actual,
              SubstEnv& local) {
  TypePtr want = subst_fully(local, resolve(subst, declared), 10000);
  TypePtr got = hw_type_of(actual);
  Unifier u(local);
  return u.unify(want, got).ok();
}

ValuePtr bind_module_params(EvalContext& ctx, const Value::ModuleInfo& info,
                            const ValuePtr& arg, Span span, EnvPtr& env) {
  // Stage-2 check: argument hardware types must match the declared input
  // types, sizes included.
  SubstEnv local;
  auto check_one = [&](const TypePtr& declared, const ValuePtr& actual,
                       const std::string& binder) {
    if (!declared) return;
    if (!hw_match(*ctx.subst, declared, actual, local)) {
      TypeRenderer renderer;
      std::string want =
          renderer.render(subst_fully(*ctx.subst, declared, ctx.substitution_cap));
      std::string got = renderer.render(hw_type_of(actual));
      fail(Code::TypeMismatch, span,
           fmt::format("module input '{}' expects {} but was given {}", binder, want,
                       got));
    }
  };

  switch (info.group_kind) {
    case ParamGroup::Kind::Single:
      check_one(info.param_types.empty() ? nullptr : info.param_types[0], arg,
                info.binders[0]);
      env = env_bind(env, info.binders[0], arg);
      return arg;
    case ParamGroup::Kind::Tuple:
    case ParamGroup::Kind::Record: {
      for (size_t i = 0; i < info.binders.size(); ++i) {
        std::string label = info.group_kind == ParamGroup::Kind::Tuple
                                ? std::to_string(i + 1)
                                : info.binders[i];
        ValuePtr component = field_of(arg, label, span);
        check_one(i < info.param_types.size() ? info.param_types[i] : nullptr,
                  component, info.binders[i]);
        env = env_bind(env, info.binders[i], component);
      }
      return arg;
    }
  }
  return arg;
}

}  // namespace

ValuePtr apply_value(EvalContext& ctx, const ValuePtr& fn, const ValuePtr& arg,
                     Span span) {
  if (ctx.depth > 4000)
    fail(Code::EvalError, span, "evaluation recursion limit exceeded");
  ctx.depth++;
  struct Guard {
    EvalContext& ctx;
    ~Guard() { ctx.depth--; }
  } guard{ctx};

  switch (fn->kind) {
    case Value::Kind::HostFun:
      return fn->host(ctx, arg);
    case Value::Kind::Fun: {
      EnvPtr env = fn->env;
      if (!fn->self_name.empty()) env = env_bind(env, fn->self_name, fn);
      if (fn->fn_groups.empty()) {  // lambda closure
        env = env_bind(env, fn->str_value, arg);
        return evaluate(ctx, *fn->fn_body, env);
      }
      const ParamGroup& group = *fn->fn_groups.front();
      switch (group.kind) {
        case ParamGroup::Kind::Single:
          env = env_bind(env, group.params[0].first, arg);
          break;
        case ParamGroup::Kind::Tuple: {
          if (arg->kind != Value::Kind::Record ||
              arg->fields.size() != group.params.size())
            fail(Code::EvalError, span, "tuple argument has the wrong shape");
          for (size_t i = 0; i < group.params.size(); ++i)
            env = env_bind(env, group.params[i].first, arg->fields[i].second);
          break;
        }
        case ParamGroup::Kind::Record: {
          for (const auto& [name, ann] : group.params) {
            const ValuePtr* field = nullptr;
            if (arg->kind == Value::Kind::Record) {
              for (const auto& [label, value] : arg->fields)
                if (label == name) field = &value;
            }
            if (!field)
              fail(Code::EvalError, span,
                   fmt::format("record argument is missing field '{}'", name));
            env = env_bind(env, name, *field);
          }
          break;
        }
      }
      if (fn->fn_groups.size() > 1) {
        auto rest = Value::make(Value::Kind::Fun);
        rest->fn_body = fn->fn_body;
        rest->fn_groups.assign(fn->fn_groups.begin() + 1, fn->fn_groups.end());
        rest->env = env;
        return rest;
      }
      return evaluate(ctx, *fn->fn_body, env);
    }
    case Value::Kind::Module: {
      const auto& info = *fn->module;
      if (info.host) return info.host(ctx, arg);
      EnvPtr env = info.env;
      if (!info.self_name.empty()) env = env_bind(env, info.self_name, fn);
      bind_module_params(ctx, info, arg, span, env);
      return evaluate(ctx, *info.body, env);
    }
    case Value::Kind::PreParamModule:
      fail(Code::EvalError, span,
           "this module needs a size argument <:n:> before application");
    default:
      fail(Code::EvalError, span, "applied a value that is not a function or module");
  }
}

// ---------------------------------------------------------------------------
// The evaluator
// ---------------------------------------------------------------------------

ValuePtr evaluate(EvalContext& ctx, const Expr& e, EnvPtr env) {
  switch (e.kind) {
    case Expr::Kind::IntLit: return v_int(e.int_value);
    case Expr::Kind::RealLit: return v_real(e.real_value);
    case Expr::Kind::StringLit: return v_string(e.str_value);
    case Expr::Kind::BitLit: return v_bit(static_cast<int>(e.int_value));

    case Expr::Kind::Var: {
      const ValuePtr* v = env_lookup(env, e.str_value);
      if (!v) fail(Code::EvalError, e.span,
                   fmt::format("unbound identifier '{}' at evaluation", e.str_value));
      return *v;
    }

    case Expr::Kind::ListLit: {
      std::vector<ValuePtr> items;
      for (const auto& item : e.items) items.push_back(evaluate(ctx, *item, env));
      return v_list(std::move(items));
    }

    case Expr::Kind::RecordLit: {
      auto v = Value::make(e.hardware ? Value::Kind::HwRecord : Value::Kind::Record);
      for (const auto& [label, sub] : e.fields)
        v->fields.emplace_back(label, evaluate(ctx, *sub, env));
      return v;
    }

    case Expr::Kind::ArrayLit: {
      auto v = Value::make(Value::Kind::Array);
      for (const auto& item : e.items) v->items.push_back(evaluate(ctx, *item, env));
      return v;
    }

    case Expr::Kind::ArrayGen: {
      int64_t size = as_int(evaluate(ctx, *e.items[0], env), e.items[0]->span);
      if (size < 0)
        fail(Code::EvalError, e.items[0]->span,
             fmt::format("array generation size is negative ({})", size));
      auto v = Value::make(Value::Kind::Array);
      for (int64_t i = 0; i < size; ++i) {
        EnvPtr inner = env_bind(env, e.str_value, v_int(i));
        v->items.push_back(evaluate(ctx, *e.items[1], inner));
      }
      if (!v->items.empty()) {
        TypePtr first = hw_type_of(v->items[0]);
        for (const auto& item : v->items) {
          if (!equal_types(hw_type_of(item), first))
            fail(Code::HwTypeError, e.span,
                 "array generation produced elements of different types");
        }
      }
      return v;
    }

    case Expr::Kind::BitArrayBuild: {
      int64_t width = as_int(evaluate(ctx, *e.items[0], env), e.items[0]->span);
      int64_t value = as_int(evaluate(ctx, *e.items[1], env), e.items[1]->span);
      if (e.bits_mode == 'r')
        fail(Code::UnsupportedFeature, e.span,
             "the 'r: bit-array form has no defined semantics");
      if (width < 0)
        fail(Code::EvalError, e.span, "bit-array width is negative");
      bool fits;
      if (width == 0) {
        fits = value == 0;
      } else if (e.bits_mode == 'u') {
        fits = value >= 0 && (width >= 63 || value < (int64_t(1) << width));
      } else {
        fits = width >= 64 || (value >= -(int64_t(1) << (width - 1)) &&
                               value < (int64_t(1) << (width - 1)));
      }
      if (!fits)
        fail(Code::OutOfRange, e.span,
             fmt::format("{} does not fit in {} {} bits", value, width,
                         e.bits_mode == 'u' ? "unsigned" : "signed"));
      auto v = Value::make(Value::Kind::Array);
      uint64_t bits = static_cast<uint64_t>(value);
      for (int64_t i = 0; i < width; ++i) v->items.push_back(v_bit((bits >> i) & 1));
      return v;
    }

    case Expr::Kind::RefLit: {
      ValuePtr inner = evaluate(ctx, *e.items[0], env);
      auto v = Value::make(Value::Kind::Ref);
      v->int_value = ctx.alloc(std::move(inner));
      return v;
    }

    case Expr::Kind::SwWrap: {
      auto v = Value::make(Value::Kind::Sw);
      v->inner = evaluate(ctx, *e.items[0], env);
      return v;
    }

    case Expr::Kind::UnswWrap: {
      ValuePtr v = evaluate(ctx, *e.items[0], env);
      if (v->kind != Value::Kind::Sw)
        fail(Code::EvalError, e.span, "unsw applied to a non-wrapped value");
      return v->inner;
    }

    case Expr::Kind::Unary: {
      ValuePtr operand = evaluate(ctx, *e.items[0], env);
      switch (e.unop) {
        case UnOp::IntNeg:
          if (operand->kind == Value::Kind::Real) return v_real(-operand->real_value);
          return v_int(wrap32(-as_int(operand, e.span)));
        case UnOp::BitNot:
          return build_hardware_not(ctx, operand, e.span);
        case UnOp::AndReduce:
          return build_reduction(ctx, GateOp::And, operand, e.span);
        case UnOp::OrReduce:
          return build_reduction(ctx, GateOp::Or, operand, e.span);
        case UnOp::XorReduce:
          return build_reduction(ctx, GateOp::Xor, operand, e.span);
        case UnOp::Deref: {
          if (operand->kind != Value::Kind::Ref)
            fail(Code::EvalError, e.span, "dereference of a non-ref value");
          return ctx.store.at(operand->int_value);
        }
        case UnOp::LogNot:
          fail(Code::Internal, e.span, "derived term survived desugaring");
      }
      fail(Code::Internal, e.span, "unknown unary operator");
    }

    case Expr::Kind::Binary: {
      // Left-to-right evaluation order, observable through effects.
      ValuePtr lhs = evaluate(ctx, *e.items[0], env);
      ValuePtr rhs = evaluate(ctx, *e.items[1], env);
      switch (e.binop) {
        case BinOp::Add: return v_int(wrap32(as_int(lhs, e.span) + as_int(rhs, e.span)));
        case BinOp::Sub: return v_int(wrap32(as_int(lhs, e.span) - as_int(rhs, e.span)));
        case BinOp::Mul: return v_int(wrap32(as_int(lhs, e.span) * as_int(rhs, e.span)));
        case BinOp::Div: {
          int64_t b = as_int(rhs, e.span);
          if (b == 0) fail(Code::DivisionByZero, e.span, "division by zero");
          return v_int(wrap32(floor_div(as_int(lhs, e.span), b)));
        }
        case BinOp::Mod: {
          int64_t b = as_int(rhs, e.span);
          if (b == 0) fail(Code::DivisionByZero, e.span, "modulo by zero");
          return v_int(wrap32(floor_mod(as_int(lhs, e.span), b)));
        }
        case BinOp::RAdd: return v_real(lhs->real_value + rhs->real_value);
        case BinOp::RSub: return v_real(lhs->real_value - rhs->real_value);
        case BinOp::RMul: return v_real(lhs->real_value * rhs->real_value);
        case BinOp::RDiv: return v_real(lhs->real_value / rhs->real_value);
        case BinOp::And:
        case BinOp::Or:
        case BinOp::Xor:
          return build_hardware_op(ctx, e.binop, lhs, rhs, e.span);
        case BinOp::Shl:
        case BinOp::Shr:
        case BinOp::Sar:
          return build_shift(ctx, e.binop, lhs, rhs, e.span);
        case BinOp::Eq:
        case BinOp::NotEq: {
          auto eq = values_equal(lhs, rhs);
          if (!eq)
            fail(Code::EvalError, e.span,
                 "equality is not defined for these values");
          return v_int((e.binop == BinOp::Eq) == *eq ? 1 : 0);
        }
        case BinOp::Lt:
        case BinOp::Gt:
        case BinOp::Le:
        case BinOp::Ge: {
          int cmp;
          if (lhs->kind == Value::Kind::Int && rhs->kind == Value::Kind::Int)
            cmp = lhs->int_value < rhs->int_value ? -1
                  : lhs->int_value > rhs->int_value ? 1 : 0;
          else if (lhs->kind == Value::Kind::Real && rhs->kind == Value::Kind::Real)
            cmp = lhs->real_value < rhs->real_value ? -1
                  : lhs->real_value > rhs->real_value ? 1 : 0;
          else if (lhs->kind == Value::Kind::String && rhs->kind == Value::Kind::String)
            cmp = lhs->str_value < rhs->str_value ? -1
                  : lhs->str_value > rhs->str_value ? 1 : 0;
          else
            fail(Code::EvalError, e.span, "ordering is not defined for these values");
          bool r = e.binop == BinOp::Lt ? cmp < 0
                   : e.binop == BinOp::Gt ? cmp > 0
                   : e.binop == BinOp::Le ? cmp <= 0 : cmp >= 0;
          return v_int(r ? 1 : 0);
        }
        case BinOp::Cons: {
          if (rhs->kind != Value::Kind::List)
            fail(Code::EvalError, e.span, "cons onto a non-list");
          std::vector<ValuePtr> items;
          items.push_back(lhs);
          items.insert(items.end(), rhs->items.begin(), rhs->items.end());
          return v_list(std::move(items));
        }
        case BinOp::Assign: {
          if (lhs->kind != Value::Kind::Ref)
            fail(Code::EvalError, e.span, "assignment to a non-ref value");
          ctx.store.at(lhs->int_value) = rhs;
          return v_unit();
        }
        case BinOp::LogAnd:
        case BinOp::LogOr:
        case BinOp::LogXor:
        case BinOp::Andalso:
        case BinOp::Orelse:
          fail(Code::Internal, e.span, "derived term survived desugaring");
      }
      fail(Code::Internal, e.span, "unknown binary operator");
    }

    case Expr::Kind::FieldAccess: {
      ValuePtr target = evaluate(ctx, *e.items[0], env);
      return field_of(target, e.str_value, e.span);
    }

    case Expr::Kind::ArrayAccess: {
      // The array evaluates before the index, then the access resolves at
      // compile time with bounds checking.
      ValuePtr array = evaluate(ctx, *e.items[0], env);
      int64_t index = as_int(evaluate(ctx, *e.items[1], env), e.items[1]->span);
      return element_of(array, index, e.span);
    }

    case Expr::Kind::If: {
      int64_t guard = as_int(evaluate(ctx, *e.items[0], env), e.items[0]->span);
      return guard != 0 ? evaluate(ctx, *e.items[1], env)
                        : evaluate(ctx, *e.items[2], env);
    }

    case Expr::Kind::Let: {
      for (const auto& d : e.decs) {
        switch (d.kind) {
          case Dec::Kind::Val: {
            if (d.rhs->kind == Expr::Kind::ArrayGen) {
              // The partial array is visible to its own generator, so earlier
              // elements can feed later ones.
              const Expr& gen = *d.rhs;
              int64_t size =
                  as_int(evaluate(ctx, *gen.items[0], env), gen.items[0]->span);
              if (size < 0)
                fail(Code::EvalError, gen.span, "array generation size is negative");
              auto partial = Value::make(Value::Kind::Array);
              EnvPtr with_self = env_bind(env, d.name, partial);
              for (int64_t i = 0; i < size; ++i) {
                EnvPtr inner = env_bind(with_self, gen.str_value, v_int(i));
                partial->items.push_back(evaluate(ctx, *gen.items[1], inner));
              }
              env = env_bind(env, d.name, partial);
            } else {
              env = env_bind(env, d.name, evaluate(ctx, *d.rhs, env));
            }
            break;
          }
          case Dec::Kind::Fun: {
            auto fn = Value::make(Value::Kind::Fun);
            fn->fn_body = d.body.get();
            for (const auto& g : d.groups) fn->fn_groups.push_back(&g);
            fn->env = env;
            fn->self_name = d.name;
            env = env_bind(env, d.name, fn);
            break;
          }
          case Dec::Kind::Type:
            break;
          case Dec::Kind::Datatype: {
            for (size_t i = 0; i < d.ctors.size(); ++i) {
              const Ctor& c = d.ctors[i];
              uint64_t tag = d.sem_type ? d.sem_type->dt_tag : 0;
              if (d.sem_type && d.sem_type->tag == TyTag::SMu)
                tag = d.sem_type->args[0]->dt_tag;
              if (c.payload) {
                auto maker = Value::make(Value::Kind::HostFun);
                std::string name = c.name;
                maker->host = [name, tag](EvalContext&, const ValuePtr& arg) {
                  auto v = Value::make(Value::Kind::Datatype);
                  v->str_value = name;
                  v->dt_tag = tag;
                  v->inner = arg;
                  return v;
                };
                env = env_bind(env, c.name, maker);
              } else {
                auto v = Value::make(Value::Kind::Datatype);
                v->str_value = c.name;
                v->dt_tag = tag;
                env = env_bind(env, c.name, v);
              }
            }
            break;
          }
          case Dec::Kind::Module:
            env = env_bind(env, d.name, make_module_value(ctx, d, env));
            break;
        }
      }
      return evaluate(ctx, *e.items[0], env);
    }

    case Expr::Kind::Seq: {
      ValuePtr last;
      for (const auto& item : e.items) last = evaluate(ctx, *item, env);
      return last;
    }

    case Expr::Kind::App: {
      ValuePtr fn = evaluate(ctx, *e.items[0], env);
      ValuePtr arg = evaluate(ctx, *e.items[1], env);
      return apply_value(ctx, fn, arg, e.span);
    }

    case Expr::Kind::Parameterize: {
      ValuePtr fn = evaluate(ctx, *e.items[0], env);
      int64_t size = as_int(evaluate(ctx, *e.items[1], env), e.items[1]->span);
      if (fn->kind != Value::Kind::PreParamModule)
        fail(Code::EvalError, e.span, "<:n:> applied to a non-parameterized module");
      const Dec& d = *fn->module->dec;
      EnvPtr env2 = env_bind(fn->module->env, *d.size_param, v_int(size));
      auto v = Value::make(Value::Kind::Module);
      v->module = std::make_shared<Value::ModuleInfo>();
      v->module->name = d.name;
      v->module->group_kind = d.groups[0].kind;
      for (const auto& [name, ann] : d.groups[0].params)
        v->module->binders.push_back(name);
      v->module->param_types = stage_param_types(ctx, d, env2);
      v->module->body = d.body.get();
      v->module->env = env2;
      v->module->self_name = d.name;
      return v;
    }

    case Expr::Kind::Case: {
      ValuePtr scrutinee = evaluate(ctx, *e.items[0], env);
      for (const auto& [pat, body] : e.arms) {
        EnvPtr arm_env = env;
        if (match_pattern(ctx, *pat, scrutinee, arm_env))
          return evaluate(ctx, *body, arm_env);
      }
      fail(Code::MatchFailure, e.span, "no pattern matched the value");
    }

    case Expr::Kind::Lambda: {
      // A lambda closure has no parameter groups; its single binder lives in
      // str_value.
      auto fn = Value::make(Value::Kind::Fun);
      fn->fn_body = e.items[0].get();
      fn->str_value = e.str_value;
      fn->env = env;
      return fn;
    }

    case Expr::Kind::TupleLit:
    case Expr::Kind::HwTupleLit:
    case Expr::Kind::UnitLit:
      fail(Code::Internal, e.span, "derived term survived desugaring");

    case Expr::Kind::Location:
    case Expr::Kind::WrapHandle:
      fail(Code::Internal, e.span, "store term outside the small-step engine");
  }
  fail(Code::Internal, e.span, "unhandled expression kind");
}

ExpandedModule expand_top_module(EvalContext& ctx, const ValuePtr& module, Span span) {
  if (module->kind == Value::Kind::PreParamModule)
    fail(Code::NonModuleProgram, span,
         "the program returns a module that still expects a size parameter");
  if (module->kind != Value::Kind::Module)
    fail(Code::NonModuleProgram, span, "the program does not return a module");

  const auto& info = *module->module;
  ExpandedModule out;
  EnvPtr env = info.env;
  if (!info.self_name.empty()) env = env_bind(env, info.self_name, module);

  std::vector<ValuePtr> pins;
  for (size_t i = 0; i < info.binders.size(); ++i) {
    TypePtr t = i < info.param_types.size() ? info.param_types[i] : nullptr;
    if (!t) fail(Code::NonConcreteModule, span, "module input type is unknown");
    std::vector<int> metas, sizes;
    SubstEnv empty;
    free_metas(empty, t, metas, sizes);
    if (!metas.empty() || !sizes.empty()) {
      fail(Code::NonConcreteModule, span,
           fmt::format("module input '{}' is not fully concrete: {}", info.binders[i],
                       render_type(t)));
    }
    auto pin = Value::make(Value::Kind::Pin);
    pin->str_value = info.binders[i];
    pin->hw_type = t;
    pins.push_back(pin);
    out.ports.emplace_back(info.binders[i], t);
    env = env_bind(env, info.binders[i], pin);
  }

  if (info.host) {
    // Built-in modules take the single pin directly.
    out.output = info.host(ctx, pins.at(0));
    return out;
  }
  out.output = evaluate(ctx, *info.body, env);
  return out;
}

}  // namespace gemini
