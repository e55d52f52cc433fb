#include "gemini/stdlib.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gemini {

namespace {

[[noreturn]] void lib_fail(Code code, std::string message) {
  throw EvalError{code, Span{}, std::move(message)};
}

ValuePtr host_fn(std::function<ValuePtr(EvalContext&, const ValuePtr&)> fn) {
  auto v = Value::make(Value::Kind::HostFun);
  v->host = std::move(fn);
  return v;
}

// Curried two-argument builtin.
ValuePtr host_fn2(std::function<ValuePtr(EvalContext&, const ValuePtr&, const ValuePtr&)> fn) {
  return host_fn([fn = std::move(fn)](EvalContext&, const ValuePtr& a) {
    return host_fn([fn, a](EvalContext& ctx, const ValuePtr& b) { return fn(ctx, a, b); });
  });
}

ValuePtr host_fn3(
    std::function<ValuePtr(EvalContext&, const ValuePtr&, const ValuePtr&, const ValuePtr&)>
        fn) {
  return host_fn([fn = std::move(fn)](EvalContext&, const ValuePtr& a) {
    return host_fn([fn, a](EvalContext&, const ValuePtr& b) {
      return host_fn(
          [fn, a, b](EvalContext& ctx, const ValuePtr& c) { return fn(ctx, a, b, c); });
    });
  });
}

const std::vector<ValuePtr>& list_items(const ValuePtr& v, const char* who) {
  if (v->kind != Value::Kind::List)
    lib_fail(Code::EvalError, fmt::format("{} expects a list", who));
  return v->items;
}

int64_t int_arg(const ValuePtr& v, const char* who) {
  if (v->kind != Value::Kind::Int)
    lib_fail(Code::EvalError, fmt::format("{} expects an integer", who));
  return v->int_value;
}

ValuePtr tuple_field(const ValuePtr& v, size_t i, const char* who) {
  if (v->kind != Value::Kind::Record || v->fields.size() <= i)
    lib_fail(Code::EvalError, fmt::format("{} expects a tuple argument", who));
  return v->fields[i].second;
}

ValuePtr host_module(std::string name,
                     std::function<ValuePtr(EvalContext&, const ValuePtr&)> host,
                     TypePtr param_type) {
  auto v = Value::make(Value::Kind::Module);
  v->module = std::make_shared<Value::ModuleInfo>();
  v->module->name = std::move(name);
  v->module->binders = {"x"};
  v->module->param_types = {std::move(param_type)};
  v->module->host = std::move(host);
  return v;
}

}  // namespace

ValuePtr twos_complement_circuit(const ValuePtr& input, Span span) {
  if (input->kind != Value::Kind::Array) {
    // Opaque array-typed sources (pins) still work: elements become slices.
    TypePtr t = hw_type_of(input);
    if (t->tag != TyTag::Array)
      lib_fail(Code::EvalError, "BitArray.twosComp expects a bit array");
  }
  TypePtr t = hw_type_of(input);
  int64_t n = t->size.offset;
  auto slice_at = [&](int64_t i) -> ValuePtr {
    if (input->kind == Value::Kind::Array) return input->items[i];
    auto s = Value::make(Value::Kind::Slice);
    s->inner = input;
    s->int_value = i;
    return s;
  };
  auto not_of = [&](const ValuePtr& b) -> ValuePtr {
    if (b->kind == Value::Kind::Bit) return v_bit(!b->int_value);
    auto nn = Value::make(Value::Kind::Not);
    nn->inner = b;
    return nn;
  };
  // ~x + 1 through a half-adder chain with carry-in 1.
  auto out = Value::make(Value::Kind::Array);
  ValuePtr carry = v_bit(1);
  for (int64_t i = 0; i < n; ++i) {
    ValuePtr inverted = not_of(slice_at(i));
    out->items.push_back(hw_gate(GateOp::Xor, {inverted, carry}));
    carry = hw_gate(GateOp::And, {inverted, carry});
  }
  (void)span;
  return out;
}

EnvPtr install_stdlib_values(EnvPtr env) {
  auto bind = [&](const char* name, ValuePtr v) {
    env = env_bind(env, name, std::move(v));
  };

  // Core
  bind("Core.print", host_fn([](EvalContext& ctx, const ValuePtr& v) {
         if (v->kind != Value::Kind::String)
           lib_fail(Code::EvalError, "Core.print expects a string");
         if (ctx.print_sink) *ctx.print_sink += v->str_value;
         else std::fputs(v->str_value.c_str(), stdout);
         return v_unit();
       }));
  bind("Core.read", host_fn([](EvalContext& ctx, const ValuePtr& v) {
         if (v->kind != Value::Kind::String)
           lib_fail(Code::EvalError, "Core.read expects a file name");
         std::string path = v->str_value;
         if (!path.empty() && path[0] != '/') path = ctx.source_dir + "/" + path;
         std::ifstream in(path, std::ios::binary);
         if (!in)
           lib_fail(Code::EvalError, fmt::format("Core.read: cannot open '{}'", path));
         std::ostringstream ss;
         ss << in.rdbuf();
         return v_string(ss.str());
       }));

  // List
  bind("List.nth", host_fn([](EvalContext&, const ValuePtr& v) {
         const auto& xs = list_items(tuple_field(v, 0, "List.nth"), "List.nth");
         int64_t i = int_arg(tuple_field(v, 1, "List.nth"), "List.nth");
         if (i < 0 || i >= static_cast<int64_t>(xs.size()))
           lib_fail(Code::OutOfRange,
                    fmt::format("List.nth: index {} out of bounds for length {}", i,
                                xs.size()));
         return xs[i];
       }));
  bind("List.length", host_fn([](EvalContext&, const ValuePtr& v) {
         return v_int(static_cast<int64_t>(list_items(v, "List.length").size()));
       }));
  bind("List.rev", host_fn([](EvalContext&, const ValuePtr& v) {
         auto items = list_items(v, "List.rev");
         std::reverse(items.begin(), items.end());
         return v_list(std::move(items));
       }));
  bind("List.map", host_fn2([](EvalContext& ctx, const ValuePtr& f, const ValuePtr& xs) {
         std::vector<ValuePtr> out;
         for (const auto& x : list_items(xs, "List.map"))
           out.push_back(apply_value(ctx, f, x, Span{}));
         return v_list(std::move(out));
       }));
  bind("List.filter",
       host_fn2([](EvalContext& ctx, const ValuePtr& f, const ValuePtr& xs) {
         std::vector<ValuePtr> out;
         for (const auto& x : list_items(xs, "List.filter")) {
           if (int_arg(apply_value(ctx, f, x, Span{}), "List.filter predicate") != 0)
             out.push_back(x);
         }
         return v_list(std::move(out));
       }));
  bind("List.foldl",
       host_fn3([](EvalContext& ctx, const ValuePtr& f, const ValuePtr& acc0,
                   const ValuePtr& xs) {
         ValuePtr acc = acc0;
         for (const auto& x : list_items(xs, "List.foldl"))
           acc = apply_value(ctx, f, v_record({{"1", x}, {"2", acc}}), Span{});
         return acc;
       }));
  bind("List.foldr",
       host_fn3([](EvalContext& ctx, const ValuePtr& f, const ValuePtr& acc0,
                   const ValuePtr& xs) {
         ValuePtr acc = acc0;
         const auto& items = list_items(xs, "List.foldr");
         for (auto it = items.rbegin(); it != items.rend(); ++it)
           acc = apply_value(ctx, f, v_record({{"1", *it}, {"2", acc}}), Span{});
         return acc;
       }));

  // Int
  bind("Int.toString", host_fn([](EvalContext&, const ValuePtr& v) {
         int64_t i = int_arg(v, "Int.toString");
         return v_string(i < 0 ? "~" + std::to_string(-i) : std::to_string(i));
       }));

  // String
  bind("String.size", host_fn([](EvalContext&, const ValuePtr& v) {
         if (v->kind != Value::Kind::String)
           lib_fail(Code::EvalError, "String.size expects a string");
         return v_int(static_cast<int64_t>(v->str_value.size()));
       }));
  bind("String.substring", host_fn([](EvalContext&, const ValuePtr& v) {
         ValuePtr s = tuple_field(v, 0, "String.substring");
         int64_t from = int_arg(tuple_field(v, 1, "String.substring"), "String.substring");
         int64_t to = int_arg(tuple_field(v, 2, "String.substring"), "String.substring");
         const std::string& str = s->str_value;
         if (from < 0 || to < from || to > static_cast<int64_t>(str.size()))
           lib_fail(Code::OutOfRange,
                    fmt::format("String.substring: [{}, {}) out of bounds for length {}",
                                from, to, str.size()));
         return v_string(str.substr(from, to - from));
       }));
  bind("String.concat", host_fn([](EvalContext&, const ValuePtr& v) {
         std::string out;
         for (const auto& s : list_items(v, "String.concat")) {
           if (s->kind != Value::Kind::String)
             lib_fail(Code::EvalError, "String.concat expects strings");
           out += s->str_value;
         }
         return v_string(std::move(out));
       }));
  bind("String.split",
       host_fn2([](EvalContext&, const ValuePtr& s, const ValuePtr& delim) {
         if (s->kind != Value::Kind::String || delim->kind != Value::Kind::String)
           lib_fail(Code::EvalError, "String.split expects strings");
         std::vector<ValuePtr> out;
         const std::string& str = s->str_value;
         const std::string& d = delim->str_value;
         if (d.empty()) {
           out.push_back(v_string(str));
           return v_list(std::move(out));
         }
         // The delimiter is removed; empty segments are preserved.
         size_t start = 0;
         for (;;) {
           size_t at = str.find(d, start);
           if (at == std::string::npos) {
             out.push_back(v_string(str.substr(start)));
             break;
           }
           out.push_back(v_string(str.substr(start, at - start)));
           start = at + d.size();
         }
         return v_list(std::move(out));
       }));

  // Real
  bind("Real.floor", host_fn([](EvalContext&, const ValuePtr& v) {
         return v_int(static_cast<int64_t>(std::floor(v->real_value)));
       }));
  bind("Real.ceil", host_fn([](EvalContext&, const ValuePtr& v) {
         return v_int(static_cast<int64_t>(std::ceil(v->real_value)));
       }));
  bind("Real.round", host_fn([](EvalContext&, const ValuePtr& v) {
         // Half-way cases round away from zero.
         return v_int(static_cast<int64_t>(std::llround(v->real_value)));
       }));
  bind("Real.fromInt", host_fn([](EvalContext&, const ValuePtr& v) {
         return v_real(static_cast<double>(int_arg(v, "Real.fromInt")));
       }));
  bind("Real.toString", host_fn([](EvalContext&, const ValuePtr& v) {
         return v_string(fmt::format("{}", v->real_value));
       }));

  // Array
  bind("Array.toList", host_fn([](EvalContext&, const ValuePtr& v) {
         if (v->kind != Value::Kind::Sw)
           lib_fail(Code::EvalError, "Array.toList expects a wrapped array");
         const ValuePtr& arr = v->inner;
         TypePtr t = hw_type_of(arr);
         if (t->tag != TyTag::Array)
           lib_fail(Code::EvalError, "Array.toList expects a wrapped array");
         std::vector<ValuePtr> out;
         for (int64_t i = 0; i < t->size.offset; ++i) {
           ValuePtr elem;
           if (arr->kind == Value::Kind::Array) {
             elem = arr->items[i];
           } else {
             auto s = Value::make(Value::Kind::Slice);
             s->inner = arr;
             s->int_value = i;
             elem = s;
           }
           auto wrapped = Value::make(Value::Kind::Sw);
           wrapped->inner = elem;
           out.push_back(wrapped);
         }
         return v_list(std::move(out));
       }));
  bind("Array.fromList", host_fn([](EvalContext&, const ValuePtr& v) {
         auto arr = Value::make(Value::Kind::Array);
         for (const auto& x : list_items(v, "Array.fromList")) {
           if (x->kind != Value::Kind::Sw)
             lib_fail(Code::EvalError, "Array.fromList expects wrapped hardware values");
           arr->items.push_back(x->inner);
         }
         auto wrapped = Value::make(Value::Kind::Sw);
         wrapped->inner = arr;
         return wrapped;
       }));

  // BitArray
  bind("BitArray.twosComp",
       host_module("twosComp",
                   [](EvalContext&, const ValuePtr& arg) {
                     return twos_complement_circuit(arg, Span{});
                   },
                   nullptr));

  // HW
  bind("HW.dff", host_module("dff",
                             [](EvalContext&, const ValuePtr& arg) {
                               auto d = Value::make(Value::Kind::Delay);
                               d->inner = arg;
                               return d;
                             },
                             nullptr));
  return env;
}

void install_stdlib_types(Analyzer& analyzer, MetaSource& fresh) {
  auto poly1 = [&](const std::function<TypePtr(TypePtr)>& build) {
    TypePtr a = fresh.fresh(TyKind::Software);
    return t_spoly({a->meta_id}, {}, build(a));
  };
  auto poly2 = [&](const std::function<TypePtr(TypePtr, TypePtr)>& build) {
    TypePtr a = fresh.fresh(TyKind::Software);
    TypePtr b = fresh.fresh(TyKind::Software);
    return t_spoly({a->meta_id, b->meta_id}, {}, build(a, b));
  };

  analyzer.bind_value("Core.print", t_arrow(t_string(), t_unit()));
  analyzer.bind_value("Core.read", t_arrow(t_string(), t_string()));

  analyzer.bind_value("List.nth", poly1([](TypePtr a) {
    return t_arrow(t_tuple({t_list(a), t_int()}), a);
  }));
  analyzer.bind_value("List.length",
                      poly1([](TypePtr a) { return t_arrow(t_list(a), t_int()); }));
  analyzer.bind_value("List.rev",
                      poly1([](TypePtr a) { return t_arrow(t_list(a), t_list(a)); }));
  analyzer.bind_value("List.map", poly2([](TypePtr a, TypePtr b) {
    return t_arrow(t_arrow(a, b), t_arrow(t_list(a), t_list(b)));
  }));
  analyzer.bind_value("List.filter", poly1([](TypePtr a) {
    return t_arrow(t_arrow(a, t_int()), t_arrow(t_list(a), t_list(a)));
  }));
  auto fold_ty = [&](void) {
    return poly2([](TypePtr a, TypePtr b) {
      return t_arrow(t_arrow(t_tuple({a, b}), b), t_arrow(b, t_arrow(t_list(a), b)));
    });
  };
  analyzer.bind_value("List.foldl", fold_ty());
  analyzer.bind_value("List.foldr", fold_ty());

  analyzer.bind_value("Int.toString", t_arrow(t_int(), t_string()));

  analyzer.bind_value("String.size", t_arrow(t_string(), t_int()));
  analyzer.bind_value("String.substring",
                      t_arrow(t_tuple({t_string(), t_int(), t_int()}), t_string()));
  analyzer.bind_value("String.concat", t_arrow(t_list(t_string()), t_string()));
  analyzer.bind_value("String.split",
                      t_arrow(t_string(), t_arrow(t_string(), t_list(t_string()))));

  analyzer.bind_value("Real.floor", t_arrow(t_real(), t_int()));
  analyzer.bind_value("Real.ceil", t_arrow(t_real(), t_int()));
  analyzer.bind_value("Real.round", t_arrow(t_real(), t_int()));
  analyzer.bind_value("Real.fromInt", t_arrow(t_int(), t_real()));
  analyzer.bind_value("Real.toString", t_arrow(t_real(), t_string()));

  {
    TypePtr h = fresh.fresh(TyKind::Hardware);
    int n = fresh.fresh_size_var();
    analyzer.bind_value(
        "Array.toList",
        t_spoly({h->meta_id}, {n},
                t_arrow(t_sw(t_array(h, SizeTerm::variable(n))), t_list(t_sw(h)))));
  }
  {
    TypePtr h = fresh.fresh(TyKind::Hardware);
    int n = fresh.fresh_size_var();
    analyzer.bind_value(
        "Array.fromList",
        t_spoly({h->meta_id}, {n},
                t_arrow(t_list(t_sw(h)), t_sw(t_array(h, SizeTerm::variable(n))))));
  }
  {
    int n = fresh.fresh_size_var();
    analyzer.bind_value(
        "BitArray.twosComp",
        t_mpoly({}, {n},
                t_module(t_array(t_bit(), SizeTerm::variable(n)),
                         t_array(t_bit(), SizeTerm::variable(n)))));
  }
  {
    TypePtr h = fresh.fresh(TyKind::Hardware);
    int n = fresh.fresh_size_var();
    analyzer.bind_value(
        "HW.dff",
        t_mpoly({h->meta_id}, {n},
                t_module(t_temporal(h, SizeTerm::variable(n)),
                         t_temporal(h, SizeTerm::variable(n, 1)))));
  }
}

}  // namespace gemini
