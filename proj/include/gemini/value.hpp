#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gemini/ast.hpp"
#include "gemini/types.hpp"

namespace gemini {

struct Value;
using ValuePtr = std::shared_ptr<Value>;

struct EvalContext;

// Persistent environment: each binding is a new node so closures see exactly
// the bindings visible at capture time.
struct EnvNode {
  std::shared_ptr<const EnvNode> parent;
  std::string name;
  ValuePtr value;
};
using EnvPtr = std::shared_ptr<const EnvNode>;

EnvPtr env_bind(EnvPtr env, std::string name, ValuePtr value);
const ValuePtr* env_lookup(const EnvPtr& env, const std::string& name);

enum class GateOp { And, Or, Xor };

// Staged runtime value: software values live on the left of the enum,
// hardware IR values on the right. Hardware values form the circuit graph
// that survives staging.
struct Value {
  enum class Kind {
    // software
    Int, Real, String, List, Ref, Sw, Record, Fun, HostFun, Datatype,
    // hardware IR
    Bit, Array, HwRecord, Gate, Not, Delay, Pin, Slice, FieldSel,
    // modules
    Module, PreParamModule,
  };

  Kind kind;
  int64_t int_value = 0;      // Int (32-bit semantics), Bit 0/1, Ref location,
                              // Slice index
  double real_value = 0;
  std::string str_value;      // String, Pin name, FieldSel label, Datatype ctor
  std::vector<ValuePtr> items;  // List/Array elements, Gate inputs
  std::vector<std::pair<std::string, ValuePtr>> fields;  // Record/HwRecord
  ValuePtr inner;             // Sw payload, Datatype payload, Not/Delay/Slice/
                              // FieldSel source
  uint64_t dt_tag = 0;
  GateOp gate_op = GateOp::And;
  TypePtr hw_type;            // Pin declared type

  // Fun: a source-level closure (remaining curried groups + body + captured
  // environment). HostFun: a built-in.
  const Expr* fn_body = nullptr;
  std::vector<const ParamGroup*> fn_groups;
  EnvPtr env;
  std::string self_name;
  std::function<ValuePtr(EvalContext&, const ValuePtr&)> host;

  // Module closure. param_types are materialized (sizes staged) when the
  // module value is created; binders name the input pins.
  struct ModuleInfo {
    std::string name;
    ParamGroup::Kind group_kind = ParamGroup::Kind::Single;
    std::vector<std::string> binders;
    std::vector<TypePtr> param_types;
    const Expr* body = nullptr;
    EnvPtr env;
    std::string self_name;
    // Built-in modules construct their circuit directly.
    std::function<ValuePtr(EvalContext&, const ValuePtr&)> host;
    // Pre-parameterized modules re-stage their parameter types once the
    // size argument is known.
    const Dec* dec = nullptr;
  };
  std::shared_ptr<ModuleInfo> module;

  static ValuePtr make(Kind kind) {
    auto v = std::make_shared<Value>();
    v->kind = kind;
    return v;
  }
};

ValuePtr v_int(int64_t v);
ValuePtr v_real(double v);
ValuePtr v_string(std::string s);
ValuePtr v_bit(int b);
ValuePtr v_unit();
ValuePtr v_list(std::vector<ValuePtr> items);
ValuePtr v_record(std::vector<std::pair<std::string, ValuePtr>> fields);

bool is_hardware_value(const Value& v);

// Structural equality for software values (the = operator's semantics).
// Unsupported shapes (closures, hardware graphs) return nullopt.
std::optional<bool> values_equal(const ValuePtr& a, const ValuePtr& b);

// The hardware type of a hardware IR value (sizes concrete by construction).
TypePtr hw_type_of(const ValuePtr& v);

// Human-readable rendering (used by Core.print-ish debugging and tests).
std::string render_value(const ValuePtr& v);

}  // namespace gemini
