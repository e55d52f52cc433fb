#pragma once

#include <string>
#include <vector>

#include "gemini/eval.hpp"
#include "gemini/types.hpp"
#include "gemini/value.hpp"

namespace gemini {

// Gate-level IR: the record-free (after lowering) hardware graph that feeds
// simulation and Verilog emission. Nodes reference children by index; the
// graph is acyclic except through Delay nodes.
struct Netlist {
  struct Node {
    enum class Kind { Const, Pin, Gate, Not, Array, Slice, Field, Record, Delay };
    Kind kind;
    int bit = 0;                      // Const
    std::string name;                 // Pin name, Field label, Record labels join
    std::vector<std::string> labels;  // Record field labels
    TypePtr pin_type;                 // Pin
    GateOp op = GateOp::And;          // Gate
    std::vector<int> inputs;
    int64_t index = 0;                // Slice element index
  };

  std::vector<Node> nodes;
  std::vector<std::pair<std::string, TypePtr>> ports;  // inputs, declaration order
  int output = -1;

  int add(Node node) {
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }
  bool has_delay() const {
    for (const auto& n : nodes)
      if (n.kind == Node::Kind::Delay) return true;
    return false;
  }
};

struct HwError {
  Code code;
  std::string message;
};

// Converts the staged hardware value graph into a netlist, preserving
// sharing. Rejects values with no hardware lowering (hardware datatypes,
// leftover software values).
Netlist netlist_from_value(const ExpandedModule& expanded);

// Total bit width of a hardware type (temporal wrappers are transparent).
int64_t width_of(const TypePtr& t);

// Topological order with Delay inputs cut (drivers before users).
std::vector<int> topo_order(const Netlist& n);

// Stable `--emit ir` rendering: one node per line, topologically ordered.
std::string render_netlist(const Netlist& n);

}  // namespace gemini
