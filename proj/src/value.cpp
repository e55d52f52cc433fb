#include "gemini/value.hpp"

#include <fmt/format.h>

namespace gemini {

EnvPtr env_bind(EnvPtr env, std::string name, ValuePtr value) {
  auto node = std::make_shared<EnvNode>();
  node->parent = std::move(env);
  node->name = std::move(name);
  node->value = std::move(value);
  return node;
}

const ValuePtr* env_lookup(const EnvPtr& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->parent.get()) {
    if (n->name == name) return &n->value;
  }
  return nullptr;
}

ValuePtr v_int(int64_t v) {
  auto out = Value::make(Value::Kind::Int);
  out->int_value = static_cast<int32_t>(v);
  return out;
}

ValuePtr v_real(double v) {
  auto out = Value::make(Value::Kind::Real);
  out->real_value = v;
  return out;
}

ValuePtr v_string(std::string s) {
  auto out = Value::make(Value::Kind::String);
  out->str_value = std::move(s);
  return out;
}

ValuePtr v_bit(int b) {
  auto out = Value::make(Value::Kind::Bit);
  out->int_value = b ? 1 : 0;
  return out;
}

ValuePtr v_unit() { return Value::make(Value::Kind::Record); }

ValuePtr v_list(std::vector<ValuePtr> items) {
  auto out = Value::make(Value::Kind::List);
  out->items = std::move(items);
  return out;
}

ValuePtr v_record(std::vector<std::pair<std::string, ValuePtr>> fields) {
  auto out = Value::make(Value::Kind::Record);
  out->fields = std::move(fields);
  return out;
}

bool is_hardware_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Bit:
    case Value::Kind::Array:
    case Value::Kind::HwRecord:
    case Value::Kind::Gate:
    case Value::Kind::Not:
    case Value::Kind::Delay:
    case Value::Kind::Pin:
    case Value::Kind::Slice:
    case Value::Kind::FieldSel:
      return true;
    default:
      return false;
  }
}

std::optional<bool> values_equal(const ValuePtr& a, const ValuePtr& b) {
  if (a->kind != b->kind) return std::nullopt;
  switch (a->kind) {
    case Value::Kind::Int: return a->int_value == b->int_value;
    case Value::Kind::Real: return a->real_value == b->real_value;
    case Value::Kind::String: return a->str_value == b->str_value;
    case Value::Kind::List: {
      if (a->items.size() != b->items.size()) return false;
      for (size_t i = 0; i < a->items.size(); ++i) {
        auto eq = values_equal(a->items[i], b->items[i]);
        if (!eq) return std::nullopt;
        if (!*eq) return false;
      }
      return true;
    }
    case Value::Kind::Record: {
      if (a->fields.size() != b->fields.size()) return false;
      for (size_t i = 0; i < a->fields.size(); ++i) {
        if (a->fields[i].first != b->fields[i].first) return false;
        auto eq = values_equal(a->fields[i].second, b->fields[i].second);
        if (!eq) return std::nullopt;
        if (!*eq) return false;
      }
      return true;
    }
    case Value::Kind::Datatype: {
      if (a->dt_tag != b->dt_tag || a->str_value != b->str_value) return false;
      if (!a->inner != !b->inner) return false;
      if (!a->inner) return true;
      return values_equal(a->inner, b->inner);
    }
    default:
      return std::nullopt;  // refs, closures, hardware: no equality semantics
  }
}

TypePtr hw_type_of(const ValuePtr& v) {
  switch (v->kind) {
    case Value::Kind::Bit: return t_bit();
    case Value::Kind::Gate:
    case Value::Kind::Not:
      return t_bit();
    case Value::Kind::Pin: return v->hw_type;
    case Value::Kind::Array: {
      TypePtr elem = v->items.empty() ? t_htop() : hw_type_of(v->items[0]);
      return t_array(elem, SizeTerm::concrete(static_cast<int64_t>(v->items.size())));
    }
    case Value::Kind::HwRecord: {
      std::vector<std::string> labels;
      std::vector<TypePtr> types;
      for (const auto& [label, field] : v->fields) {
        labels.push_back(label);
        types.push_back(hw_type_of(field));
      }
      return t_hrecord(std::move(labels), std::move(types));
    }
    case Value::Kind::Delay: {
      TypePtr inner = hw_type_of(v->inner);
      if (inner->tag == TyTag::Temporal) {
        return t_temporal(inner->args[0],
                          SizeTerm::concrete(inner->size.offset + 1));
      }
      return t_temporal(inner, SizeTerm::concrete(1));
    }
    case Value::Kind::Slice: {
      TypePtr src = hw_type_of(v->inner);
      if (src->tag == TyTag::Array) return src->args[0];
      return t_hbottom();
    }
    case Value::Kind::FieldSel: {
      TypePtr src = hw_type_of(v->inner);
      if (src->tag == TyTag::HRecord) {
        for (size_t i = 0; i < src->labels.size(); ++i)
          if (src->labels[i] == v->str_value) return src->args[i];
      }
      return t_hbottom();
    }
    default:
      return t_hbottom();
  }
}

std::string render_value(const ValuePtr& v) {
  switch (v->kind) {
    case Value::Kind::Int: return std::to_string(v->int_value);
    case Value::Kind::Real: return fmt::format("{}", v->real_value);
    case Value::Kind::String: return fmt::format("\"{}\"", v->str_value);
    case Value::Kind::Bit: return v->int_value ? "'b:1" : "'b:0";
    case Value::Kind::List: {
      std::string out = "[";
      for (size_t i = 0; i < v->items.size(); ++i) {
        if (i) out += ", ";
        out += render_value(v->items[i]);
      }
      return out + "]";
    }
    case Value::Kind::Record:
    case Value::Kind::HwRecord: {
      std::string out = v->kind == Value::Kind::HwRecord ? "#{" : "{";
      for (size_t i = 0; i < v->fields.size(); ++i) {
        if (i) out += ", ";
        out += v->fields[i].first + " = " + render_value(v->fields[i].second);
      }
      return out + "}";
    }
    case Value::Kind::Array: {
      std::string out = "#[";
      for (size_t i = 0; i < v->items.size(); ++i) {
        if (i) out += ", ";
        out += render_value(v->items[i]);
      }
      return out + "]";
    }
    case Value::Kind::Ref: return fmt::format("ref@{}", v->int_value);
    case Value::Kind::Sw: return "sw " + render_value(v->inner);
    case Value::Kind::Fun:
    case Value::Kind::HostFun:
      return "<fn>";
    case Value::Kind::Datatype:
      return v->inner ? v->str_value + "(" + render_value(v->inner) + ")" : v->str_value;
    case Value::Kind::Gate: {
      const char* name = v->gate_op == GateOp::And ? "AND"
                         : v->gate_op == GateOp::Or ? "OR" : "XOR";
      std::string out = fmt::format("{}(", name);
      for (size_t i = 0; i < v->items.size(); ++i) {
        if (i) out += ", ";
        out += render_value(v->items[i]);
      }
      return out + ")";
    }
    case Value::Kind::Not: return "NOT(" + render_value(v->inner) + ")";
    case Value::Kind::Delay: return "DFF(" + render_value(v->inner) + ")";
    case Value::Kind::Pin: return v->str_value;
    case Value::Kind::Slice:
      return render_value(v->inner) + fmt::format("[:{}:]", v->int_value);
    case Value::Kind::FieldSel:
      return "#" + v->str_value + " " + render_value(v->inner);
    case Value::Kind::Module: return "<module>";
    case Value::Kind::PreParamModule: return "<module <:_:>>";
  }
  return "?";
}

}  // namespace gemini
