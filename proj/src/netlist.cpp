#include "gemini/netlist.hpp"

#include <fmt/format.h>

#include <unordered_map>

namespace gemini {

int64_t width_of(const TypePtr& t) {
  switch (t->tag) {
    case TyTag::Bit: return 1;
    case TyTag::Array: return t->size.offset * width_of(t->args[0]);
    case TyTag::Temporal: return width_of(t->args[0]);
    case TyTag::HRecord: {
      int64_t total = 0;
      for (const auto& f : t->args) total += width_of(f);
      return total;
    }
    default:
      return 0;
  }
}

namespace {

struct Builder {
  Netlist out;
  std::unordered_map<const Value*, int> memo;

  int build(const ValuePtr& v) {
    auto it = memo.find(v.get());
    if (it != memo.end()) return it->second;
    Netlist::Node node{Netlist::Node::Kind::Const};
    switch (v->kind) {
      case Value::Kind::Bit:
        node.kind = Netlist::Node::Kind::Const;
        node.bit = static_cast<int>(v->int_value);
        break;
      case Value::Kind::Pin:
        node.kind = Netlist::Node::Kind::Pin;
        node.name = v->str_value;
        node.pin_type = v->hw_type;
        break;
      case Value::Kind::Gate:
        node.kind = Netlist::Node::Kind::Gate;
        node.op = v->gate_op;
        for (const auto& in : v->items) node.inputs.push_back(build(in));
        break;
      case Value::Kind::Not:
        node.kind = Netlist::Node::Kind::Not;
        node.inputs.push_back(build(v->inner));
        break;
      case Value::Kind::Delay:
        node.kind = Netlist::Node::Kind::Delay;
        node.inputs.push_back(build(v->inner));
        break;
      case Value::Kind::Array:
        node.kind = Netlist::Node::Kind::Array;
        for (const auto& item : v->items) node.inputs.push_back(build(item));
        break;
      case Value::Kind::HwRecord:
        node.kind = Netlist::Node::Kind::Record;
        for (const auto& [label, field] : v->fields) {
          node.labels.push_back(label);
          node.inputs.push_back(build(field));
        }
        break;
      case Value::Kind::Slice:
        node.kind = Netlist::Node::Kind::Slice;
        node.index = v->int_value;
        node.inputs.push_back(build(v->inner));
        break;
      case Value::Kind::FieldSel:
        node.kind = Netlist::Node::Kind::Field;
        node.name = v->str_value;
        node.inputs.push_back(build(v->inner));
        break;
      case Value::Kind::Datatype:
        throw HwError{Code::UnsupportedFeature,
                      "hardware datatype values have no bit-level encoding"};
      default:
        throw HwError{Code::Internal,
                      fmt::format("software value '{}' survived staging",
                                  render_value(v))};
    }
    int idx = out.add(std::move(node));
    memo.emplace(v.get(), idx);
    return idx;
  }
};

}  // namespace

Netlist netlist_from_value(const ExpandedModule& expanded) {
  Builder b;
  b.out.ports = expanded.ports;
  b.out.output = b.build(expanded.output);
  return b.out;
}

std::vector<int> topo_order(const Netlist& n) {
  std::vector<int> order;
  std::vector<char> state(n.nodes.size(), 0);  // 0 new, 1 visiting, 2 done
  // Iterative DFS; Delay inputs are cut edges so feedback loops terminate.
  std::vector<std::pair<int, size_t>> stack;
  auto visit = [&](int root) {
    if (state[root] == 2) return;
    stack.emplace_back(root, 0);
    state[root] = 1;
    while (!stack.empty()) {
      auto& [idx, child] = stack.back();
      const auto& node = n.nodes[idx];
      bool cut = node.kind == Netlist::Node::Kind::Delay;
      if (cut || child >= node.inputs.size()) {
        state[idx] = 2;
        order.push_back(idx);
        stack.pop_back();
        continue;
      }
      int next = node.inputs[child++];
      if (state[next] == 0) {
        state[next] = 1;
        stack.emplace_back(next, 0);
      }
    }
  };
  for (size_t i = 0; i < n.nodes.size(); ++i)
    if (n.nodes[i].kind == Netlist::Node::Kind::Delay) visit(n.nodes[i].inputs[0]);
  if (n.output >= 0) visit(n.output);
  for (size_t i = 0; i < n.nodes.size(); ++i) visit(static_cast<int>(i));
  return order;
}

std::string render_netlist(const Netlist& n) {
  std::string out;
  for (int idx : topo_order(n)) {
    const auto& node = n.nodes[idx];
    std::string rhs;
    auto input_list = [&](size_t from = 0) {
      std::string s;
      for (size_t i = from; i < node.inputs.size(); ++i) {
        if (i > from) s += ", ";
        s += fmt::format("n{}", node.inputs[i]);
      }
      return s;
    };
    switch (node.kind) {
      case Netlist::Node::Kind::Const: rhs = fmt::format("CONST {}", node.bit); break;
      case Netlist::Node::Kind::Pin:
        rhs = fmt::format("PIN {} : {}", node.name, render_type(node.pin_type));
        break;
      case Netlist::Node::Kind::Gate:
        rhs = fmt::format("{}({})",
                          node.op == GateOp::And ? "AND"
                          : node.op == GateOp::Or ? "OR" : "XOR",
                          input_list());
        break;
      case Netlist::Node::Kind::Not: rhs = fmt::format("NOT({})", input_list()); break;
      case Netlist::Node::Kind::Array: rhs = fmt::format("ARRAY({})", input_list()); break;
      case Netlist::Node::Kind::Slice:
        rhs = fmt::format("SLICE(n{}, {})", node.inputs[0], node.index);
        break;
      case Netlist::Node::Kind::Field:
        rhs = fmt::format("FIELD(n{}, {})", node.inputs[0], node.name);
        break;
      case Netlist::Node::Kind::Record: {
        std::string fields;
        for (size_t i = 0; i < node.inputs.size(); ++i) {
          if (i) fields += ", ";
          fields += fmt::format("{}=n{}", node.labels[i], node.inputs[i]);
        }
        rhs = fmt::format("RECORD({})", fields);
        break;
      }
      case Netlist::Node::Kind::Delay:
        rhs = fmt::format("DELAY(n{})", node.inputs[0]);
        break;
    }
    out += fmt::format("n{} = {}\n", idx, rhs);
  }
  out += fmt::format("output = n{}\n", n.output);
  return out;
}

}  // namespace gemini
