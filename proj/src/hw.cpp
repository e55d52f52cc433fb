#include "gemini/hw.hpp"

#include <fmt/format.h>

#include <unordered_map>

namespace gemini {

namespace {

// Temporal wrappers are transparent for structure; delay time is tracked
// separately so it stays additive through Delay nodes.
TypePtr strip_time(const TypePtr& t, int64_t* time) {
  if (t->tag == TyTag::Temporal) {
    if (time) *time += t->size.offset;
    return strip_time(t->args[0], time);
  }
  return t;
}

TypePtr with_time(TypePtr t, int64_t time) {
  return time == 0 ? t : t_temporal(std::move(t), SizeTerm::concrete(time));
}

void check_no_combinational_cycle(const Netlist& n) {
  std::vector<char> state(n.nodes.size(), 0);
  struct Frame { int idx; size_t child; };
  for (size_t root = 0; root < n.nodes.size(); ++root) {
    if (state[root] != 0) continue;
    std::vector<Frame> stack{{static_cast<int>(root), 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& frame = stack.back();
      const auto& node = n.nodes[frame.idx];
      // Delay output depends on the previous cycle, so its input edge does
      // not participate in combinational cycles.
      bool cut = node.kind == Netlist::Node::Kind::Delay;
      if (cut || frame.child >= node.inputs.size()) {
        state[frame.idx] = 2;
        stack.pop_back();
        continue;
      }
      int next = node.inputs[frame.child++];
      if (state[next] == 1) {
        throw HwError{Code::CombinationalCycle,
                      "combinational cycle: a loop must pass through a delay"};
      }
      if (state[next] == 0) {
        state[next] = 1;
        stack.push_back({next, 0});
      }
    }
  }
}

}  // namespace

HwTypeReport hw_typecheck(const Netlist& n) {
  check_no_combinational_cycle(n);
  HwTypeReport report(n.nodes.size());

  // Delay nodes receive a placeholder on the first pass (their input may sit
  // behind a feedback edge), then a settling pass fixes delay times.
  std::vector<int> order = topo_order(n);
  auto type_of = [&](int idx) -> TypePtr {
    return report[idx] ? report[idx] : t_bit();
  };

  for (int pass = 0; pass < 2; ++pass) {
    for (int idx : order) {
      const auto& node = n.nodes[idx];
      switch (node.kind) {
        case Netlist::Node::Kind::Const:
          report[idx] = t_bit();
          break;
        case Netlist::Node::Kind::Pin: {
          if (!node.pin_type || width_of(node.pin_type) < 0)
            throw HwError{Code::HwTypeError,
                          fmt::format("pin '{}' has no concrete type", node.name)};
          report[idx] = node.pin_type;
          break;
        }
        case Netlist::Node::Kind::Gate: {
          if (node.inputs.size() < 2)
            throw HwError{Code::HwTypeError, "gate with fewer than two inputs"};
          int64_t time = 0;
          for (int in : node.inputs) {
            int64_t t = 0;
            TypePtr base = strip_time(type_of(in), &t);
            if (base->tag != TyTag::Bit)
              throw HwError{Code::HwTypeError,
                            fmt::format("gate input n{} is {}, not a bit", in,
                                        render_type(type_of(in)))};
            time = std::max(time, t);
          }
          report[idx] = with_time(t_bit(), time);
          break;
        }
        case Netlist::Node::Kind::Not: {
          int64_t time = 0;
          TypePtr base = strip_time(type_of(node.inputs[0]), &time);
          if (base->tag != TyTag::Bit)
            throw HwError{Code::HwTypeError, "negation input is not a bit"};
          report[idx] = with_time(t_bit(), time);
          break;
        }
        case Netlist::Node::Kind::Array: {
          if (node.inputs.empty()) {
            report[idx] = t_array(t_bit(), SizeTerm::concrete(0));
            break;
          }
          TypePtr first = type_of(node.inputs[0]);
          for (int in : node.inputs) {
            if (!equal_types(type_of(in), first))
              throw HwError{Code::HwTypeError,
                            "array elements do not share one hardware type"};
          }
          report[idx] =
              t_array(first, SizeTerm::concrete(static_cast<int64_t>(node.inputs.size())));
          break;
        }
        case Netlist::Node::Kind::Slice: {
          int64_t time = 0;
          TypePtr base = strip_time(type_of(node.inputs[0]), &time);
          if (base->tag != TyTag::Array)
            throw HwError{Code::HwTypeError, "slice of a non-array"};
          if (node.index < 0 || node.index >= base->size.offset)
            throw HwError{Code::HwTypeError,
                          fmt::format("slice index {} out of range for length {}",
                                      node.index, base->size.offset)};
          report[idx] = with_time(base->args[0], time);
          break;
        }
        case Netlist::Node::Kind::Field: {
          int64_t time = 0;
          TypePtr base = strip_time(type_of(node.inputs[0]), &time);
          if (base->tag != TyTag::HRecord)
            throw HwError{Code::HwTypeError, "field access on a non-record"};
          TypePtr field;
          for (size_t i = 0; i < base->labels.size(); ++i)
            if (base->labels[i] == node.name) field = base->args[i];
          if (!field)
            throw HwError{Code::HwTypeError,
                          fmt::format("record has no field '{}'", node.name)};
          report[idx] = with_time(field, time);
          break;
        }
        case Netlist::Node::Kind::Record: {
          std::vector<TypePtr> fields;
          for (int in : node.inputs) fields.push_back(type_of(in));
          report[idx] = t_hrecord(node.labels, std::move(fields));
          break;
        }
        case Netlist::Node::Kind::Delay: {
          int64_t time = 0;
          TypePtr base = strip_time(type_of(node.inputs[0]), &time);
          report[idx] = with_time(base, time + 1);
          break;
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Record lowering
// ---------------------------------------------------------------------------

namespace {

TypePtr lower_ty(const TypePtr& t) {
  switch (t->tag) {
    case TyTag::Bit: return t_bit();
    case TyTag::Array: return t_array(lower_ty(t->args[0]), t->size);
    case TyTag::Temporal: return t_temporal(lower_ty(t->args[0]), t->size);
    case TyTag::HRecord:
      return t_array(t_bit(), SizeTerm::concrete(width_of(t)));
    default:
      return t;
  }
}

struct Lowerer {
  const Netlist& src;
  const HwTypeReport& types;
  Netlist out;
  std::unordered_map<int, int> memo;

  // Produces the lowered node for a source node.
  int lower(int idx) {
    auto it = memo.find(idx);
    if (it != memo.end()) return it->second;
    const auto& node = src.nodes[idx];
    int result;
    switch (node.kind) {
      case Netlist::Node::Kind::Const:
      case Netlist::Node::Kind::Pin: {
        Netlist::Node copy = node;
        if (copy.kind == Netlist::Node::Kind::Pin) copy.pin_type = lower_ty(copy.pin_type);
        result = out.add(std::move(copy));
        break;
      }
      case Netlist::Node::Kind::Gate:
      case Netlist::Node::Kind::Not:
      case Netlist::Node::Kind::Delay:
      case Netlist::Node::Kind::Array:
      case Netlist::Node::Kind::Slice: {
        Netlist::Node copy = node;
        copy.inputs.clear();
        for (int in : node.inputs) copy.inputs.push_back(lower(in));
        result = out.add(std::move(copy));
        break;
      }
      case Netlist::Node::Kind::Record: {
        // Fields concatenate into one flat bit array, field 1 highest.
        std::vector<int> bits;
        for (size_t i = node.inputs.size(); i-- > 0;) {
          int child = lower(node.inputs[i]);
          explode_bits(child, lower_ty(strip(types[node.inputs[i]])), bits);
        }
        Netlist::Node arr{Netlist::Node::Kind::Array};
        arr.inputs = std::move(bits);
        result = out.add(std::move(arr));
        break;
      }
      case Netlist::Node::Kind::Field: {
        // An index-range selection computed from the widths of the fields
        // that follow this one (they sit below it).
        TypePtr rec = strip(types[node.inputs[0]]);
        int64_t offset = 0;
        TypePtr field_ty;
        for (size_t i = rec->labels.size(); i-- > 0;) {
          if (rec->labels[i] == node.name) {
            field_ty = rec->args[i];
            break;
          }
          offset += width_of(rec->args[i]);
        }
        int source = lower(node.inputs[0]);
        int64_t width = width_of(field_ty);
        result = slice_range(source, offset, width, lower_ty(field_ty));
        break;
      }
    }
    memo.emplace(idx, result);
    return result;
  }

  static TypePtr strip(const TypePtr& t) {
    return t->tag == TyTag::Temporal ? strip(t->args[0]) : t;
  }

  // Appends the bit-level nodes of `node` (whose lowered type is `t`) in
  // least-significant-first order.
  void explode_bits(int node, const TypePtr& t, std::vector<int>& bits) {
    TypePtr base = strip(t);
    if (base->tag == TyTag::Bit) {
      bits.push_back(node);
      return;
    }
    if (base->tag != TyTag::Array)
      throw HwError{Code::Internal, "lowering left a non-array aggregate"};
    int64_t count = base->size.offset;
    const auto& n = out.nodes[node];
    if (n.kind == Netlist::Node::Kind::Array) {
      std::vector<int> elems = n.inputs;  // copy: out.nodes may reallocate
      for (int64_t i = 0; i < count; ++i)
        explode_bits(elems[i], base->args[0], bits);
      return;
    }
    for (int64_t i = 0; i < count; ++i) {
      Netlist::Node s{Netlist::Node::Kind::Slice};
      s.index = i;
      s.inputs = {node};
      int elem = out.add(std::move(s));
      explode_bits(elem, base->args[0], bits);
    }
  }

  // Selects bits [offset, offset+width) of a flat array source as a node of
  // the field's lowered type (a single bit or a bit array).
  int slice_range(int source, int64_t offset, int64_t width, const TypePtr& field_ty) {
    auto bit_at = [&](int64_t i) {
      const auto& n = out.nodes[source];
      if (n.kind == Netlist::Node::Kind::Array) return n.inputs[i];
      Netlist::Node s{Netlist::Node::Kind::Slice};
      s.index = i;
      s.inputs = {source};
      return out.add(std::move(s));
    };
    TypePtr base = strip(field_ty);
    if (base->tag == TyTag::Bit && width == 1) return bit_at(offset);
    Netlist::Node arr{Netlist::Node::Kind::Array};
    for (int64_t i = 0; i < width; ++i) arr.inputs.push_back(bit_at(offset + i));
    return out.add(std::move(arr));
  }
};

}  // namespace

Netlist lower_records(const Netlist& n) {
  HwTypeReport types = hw_typecheck(n);
  Lowerer lowerer{n, types, {}, {}};
  for (const auto& [name, ty] : n.ports)
    lowerer.out.ports.emplace_back(name, lower_ty(ty));
  lowerer.out.output = lowerer.lower(n.output);
  return lowerer.out;
}

void check_program_module(const ValuePtr& program_value) {
  if (program_value->kind == Value::Kind::PreParamModule)
    throw HwError{Code::NonModuleProgram,
                  "the program module is still polymorphic in its size parameter"};
  if (program_value->kind != Value::Kind::Module)
    throw HwError{Code::NonModuleProgram,
                  fmt::format("the program must return a module, found {}",
                              render_value(program_value))};
}

}  // namespace gemini
