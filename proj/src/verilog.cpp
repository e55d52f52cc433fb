#include "gemini/verilog.hpp"

#include <fmt/format.h>

#include <map>

#include "gemini/hw.hpp"

namespace gemini {

std::string render_width(const TypePtr& t) {
  int64_t w = width_of(t);
  return w <= 1 ? "" : fmt::format("[{}:0] ", w - 1);
}

namespace {

TypePtr strip_time(const TypePtr& t) {
  return t->tag == TyTag::Temporal ? strip_time(t->args[0]) : t;
}

struct Emitter {
  const Netlist& n;
  HwTypeReport types;
  std::map<int, std::string> wire;   // node -> wire text (rN or pin name)
  std::map<int, int64_t> reg_width;  // declared rN widths in allocation order
  std::vector<int> reg_order;
  std::vector<std::string> comb;     // combinational statements, post-order
  std::vector<std::string> clocked;
  int next_name = 1;

  explicit Emitter(const Netlist& netlist) : n(netlist), types(hw_typecheck(netlist)) {}

  // Names are allocated on first visit (pre-order), statements appended
  // after the children (post-order); array elements visit the highest index
  // first, mirroring field declaration order.
  std::string visit(int idx) {
    auto it = wire.find(idx);
    if (it != wire.end()) return it->second;
    const auto& node = n.nodes[idx];

    if (node.kind == Netlist::Node::Kind::Pin) {
      wire[idx] = node.name;
      return node.name;
    }

    std::string name = fmt::format("r{}", next_name++);
    wire[idx] = name;
    reg_width[idx] = width_of(strip_time(types[idx]));
    reg_order.push_back(idx);

    switch (node.kind) {
      case Netlist::Node::Kind::Const:
        comb.push_back(fmt::format("{} <= 1'b{};", name, node.bit));
        break;
      case Netlist::Node::Kind::Gate: {
        std::string rhs;
        const char* op = node.op == GateOp::And ? " & "
                         : node.op == GateOp::Or ? " | " : " ^ ";
        for (size_t i = 0; i < node.inputs.size(); ++i) {
          if (i) rhs += op;
          rhs += visit(node.inputs[i]);
        }
        comb.push_back(fmt::format("{} <= {};", name, rhs));
        break;
      }
      case Netlist::Node::Kind::Not:
        comb.push_back(fmt::format("{} <= !{};", name, visit(node.inputs[0])));
        break;
      case Netlist::Node::Kind::Array: {
        int64_t elem_w =
            node.inputs.empty() ? 1 : width_of(strip_time(types[node.inputs[0]]));
        for (size_t i = node.inputs.size(); i-- > 0;) {
          std::string elem = visit(node.inputs[static_cast<int>(i)]);
          if (elem_w == 1) {
            comb.push_back(fmt::format("{}[{}] <= {};", name, i, elem));
          } else {
            comb.push_back(fmt::format("{}[{}:{}] <= {};", name,
                                       (i + 1) * elem_w - 1, i * elem_w, elem));
          }
        }
        break;
      }
      case Netlist::Node::Kind::Slice: {
        std::string src = visit(node.inputs[0]);
        TypePtr src_ty = strip_time(types[node.inputs[0]]);
        int64_t elem_w = width_of(src_ty->args[0]);
        if (elem_w == 1) {
          comb.push_back(fmt::format("{} <= {}[{}];", name, src, node.index));
        } else {
          comb.push_back(fmt::format("{} <= {}[{}:{}];", name, src,
                                     (node.index + 1) * elem_w - 1,
                                     node.index * elem_w));
        }
        break;
      }
      case Netlist::Node::Kind::Delay:
        clocked.push_back(fmt::format("{} <= {};", name, visit(node.inputs[0])));
        break;
      case Netlist::Node::Kind::Record:
      case Netlist::Node::Kind::Field:
        throw HwError{Code::Internal, "record node survived lowering"};
      case Netlist::Node::Kind::Pin:
        break;  // handled above
    }
    return name;
  }

  std::string run(const std::string& module_name) {
    std::string root = visit(n.output);

    std::string header = fmt::format("module {}(", module_name);
    bool first = true;
    if (n.has_delay()) {
      header += "input clk";
      first = false;
    }
    for (const auto& [pname, ty] : n.ports) {
      if (!first) header += ", ";
      first = false;
      header += fmt::format("input {}{}", render_width(ty), pname);
    }
    if (!first) header += ", ";
    header += fmt::format("output reg {}out);", render_width(strip_time(types[n.output])));

    std::string decls;
    std::string scalars;
    for (int idx : reg_order) {
      if (reg_width[idx] <= 1) {
        if (!scalars.empty()) scalars += ", ";
        scalars += wire[idx];
      }
    }
    if (!scalars.empty()) decls += fmt::format("    reg {};\n", scalars);
    for (int idx : reg_order) {
      if (reg_width[idx] > 1)
        decls += fmt::format("    reg [{}:0] {};\n", reg_width[idx] - 1, wire[idx]);
    }

    std::string text = header + "\n";
    text += decls;
    text += "\n";
    text += "    always @(*) begin\n";
    for (const auto& stmt : comb) text += "        " + stmt + "\n";
    text += fmt::format("        out <= {};\n", root);
    text += "    end\n";
    if (!clocked.empty()) {
      text += "\n    always @(posedge clk) begin\n";
      for (const auto& stmt : clocked) text += "        " + stmt + "\n";
      text += "    end\n";
    }
    text += "endmodule\n";
    return text;
  }
};

}  // namespace

std::string emit_verilog(const Netlist& n, const std::string& module_name) {
  Emitter emitter(n);
  return emitter.run(module_name);
}

}  // namespace gemini
