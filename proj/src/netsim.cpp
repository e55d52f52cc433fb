#include "gemini/netsim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>

#include "gemini/hw.hpp"

namespace gemini {

namespace {

TypePtr strip_time(const TypePtr& t) {
  return t->tag == TyTag::Temporal ? strip_time(t->args[0]) : t;
}

}  // namespace

// Precomputes the type report and topological order once so exhaustive
// sweeps only pay for the per-assignment evaluation.
class Simulator {
 public:
  explicit Simulator(const Netlist& n)
      : n_(n), types_(hw_typecheck(n)), order_(topo_order(n)) {}

  SimResult run(const Stimulus& s) const;

 private:
  const Netlist& n_;
  HwTypeReport types_;
  std::vector<int> order_;
};

SimResult Simulator::run(const Stimulus& s) const {
  const Netlist& n = n_;
  const HwTypeReport& types = types_;
  const std::vector<int>& order = order_;

  // Validate stimulus against the ports.
  std::map<std::string, std::vector<int>> pins;
  for (const auto& [name, ty] : n.ports) {
    auto it = s.inputs.find(name);
    if (it == s.inputs.end())
      throw HwError{Code::HwTypeError, fmt::format("missing input '{}'", name)};
    int64_t width = width_of(ty);
    if (static_cast<int64_t>(it->second.size()) != width)
      throw HwError{Code::HwTypeError,
                    fmt::format("input '{}' needs {} bits, got {}", name, width,
                                it->second.size())};
    pins[name] = it->second;
  }
  for (const auto& [name, bits] : s.inputs) {
    bool known = false;
    for (const auto& [pname, ty] : n.ports) known = known || pname == name;
    if (!known) throw HwError{Code::HwTypeError, fmt::format("unknown pin '{}'", name)};
  }

  // Per-node flattened bit values; delays hold the previous cycle, zero at
  // the start.
  std::vector<std::vector<int>> value(n.nodes.size());
  std::vector<std::vector<int>> delay_state(n.nodes.size());
  for (size_t i = 0; i < n.nodes.size(); ++i) {
    if (n.nodes[i].kind == Netlist::Node::Kind::Delay)
      delay_state[i].assign(width_of(strip_time(types[i])), 0);
  }

  SimResult result;
  for (int cycle = 0; cycle < std::max(1, s.cycles); ++cycle) {
    for (int idx : order) {
      const auto& node = n.nodes[idx];
      switch (node.kind) {
        case Netlist::Node::Kind::Const:
          value[idx] = {node.bit};
          break;
        case Netlist::Node::Kind::Pin:
          value[idx] = pins[node.name];
          break;
        case Netlist::Node::Kind::Gate: {
          int acc = node.op == GateOp::And ? 1 : 0;
          for (int in : node.inputs) {
            int b = value[in].at(0);
            acc = node.op == GateOp::And ? (acc & b)
                  : node.op == GateOp::Or ? (acc | b) : (acc ^ b);
          }
          value[idx] = {acc};
          break;
        }
        case Netlist::Node::Kind::Not:
          value[idx] = {1 - value[node.inputs[0]].at(0)};
          break;
        case Netlist::Node::Kind::Array: {
          std::vector<int> bits;
          for (int in : node.inputs)
            bits.insert(bits.end(), value[in].begin(), value[in].end());
          value[idx] = std::move(bits);
          break;
        }
        case Netlist::Node::Kind::Record: {
          // Field 1 occupies the highest indices.
          std::vector<int> bits;
          for (size_t i = node.inputs.size(); i-- > 0;) {
            const auto& v = value[node.inputs[i]];
            bits.insert(bits.end(), v.begin(), v.end());
          }
          value[idx] = std::move(bits);
          break;
        }
        case Netlist::Node::Kind::Slice: {
          TypePtr src = strip_time(types[node.inputs[0]]);
          int64_t w = width_of(src->args[0]);
          const auto& v = value[node.inputs[0]];
          value[idx].assign(v.begin() + node.index * w,
                            v.begin() + (node.index + 1) * w);
          break;
        }
        case Netlist::Node::Kind::Field: {
          TypePtr src = strip_time(types[node.inputs[0]]);
          int64_t offset = 0;
          int64_t w = 0;
          for (size_t i = src->labels.size(); i-- > 0;) {
            if (src->labels[i] == node.name) {
              w = width_of(src->args[i]);
              break;
            }
            offset += width_of(src->args[i]);
          }
          const auto& v = value[node.inputs[0]];
          value[idx].assign(v.begin() + offset, v.begin() + offset + w);
          break;
        }
        case Netlist::Node::Kind::Delay:
          value[idx] = delay_state[idx];
          break;
      }
    }
    // Clock edge: delays capture their inputs for the next cycle.
    for (size_t i = 0; i < n.nodes.size(); ++i) {
      if (n.nodes[i].kind == Netlist::Node::Kind::Delay)
        delay_state[i] = value[n.nodes[i].inputs[0]];
    }
    result.push_back(value[n.output]);
  }
  return result;
}

SimResult simulate(const Netlist& n, const Stimulus& s) {
  return Simulator(n).run(s);
}

bool exhaustive_equiv(const Netlist& a, const Netlist& b) {
  if (a.ports.size() != b.ports.size())
    throw HwError{Code::HwTypeError, "designs have different port lists"};
  int64_t total = 0;
  for (size_t i = 0; i < a.ports.size(); ++i) {
    if (a.ports[i].first != b.ports[i].first ||
        width_of(a.ports[i].second) != width_of(b.ports[i].second))
      throw HwError{Code::HwTypeError, "designs have different port signatures"};
    total += width_of(a.ports[i].second);
  }
  if (total > 20)
    throw HwError{Code::HwTypeError,
                  fmt::format("input space of {} bits exceeds the 20-bit cap", total)};

  Simulator sim_a(a), sim_b(b);
  for (uint64_t assignment = 0; assignment < (uint64_t(1) << total); ++assignment) {
    Stimulus s;
    uint64_t rest = assignment;
    for (const auto& [name, ty] : a.ports) {
      int64_t w = width_of(ty);
      std::vector<int> bits;
      for (int64_t i = 0; i < w; ++i) {
        bits.push_back(static_cast<int>(rest & 1));
        rest >>= 1;
      }
      s.inputs[name] = std::move(bits);
    }
    if (sim_a.run(s) != sim_b.run(s)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Reader for the emitted Verilog subset
// ---------------------------------------------------------------------------

namespace {

struct VTok {
  std::string text;
};

struct VLexer {
  std::vector<std::string> toks;
  size_t pos = 0;

  explicit VLexer(const std::string& text) {
    size_t i = 0;
    auto issym = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    };
    while (i < text.size()) {
      char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
      if (text.compare(i, 2, "//") == 0) {
        while (i < text.size() && text[i] != '\n') ++i;
        continue;
      }
      if (text.compare(i, 2, "<=") == 0) { toks.push_back("<="); i += 2; continue; }
      if (text.compare(i, 4, "@(*)") == 0) { toks.push_back("@(*)"); i += 4; continue; }
      if (issym(c)) {
        size_t j = i;
        while (j < text.size() && issym(text[j])) ++j;
        toks.push_back(text.substr(i, j - i));
        i = j;
        continue;
      }
      toks.push_back(std::string(1, c));
      ++i;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw HwError{Code::HwTypeError,
                  fmt::format("outside the emitted Verilog subset: {}", msg)};
  }
  const std::string& peek(size_t ahead = 0) const {
    static const std::string eof = "<eof>";
    return pos + ahead < toks.size() ? toks[pos + ahead] : eof;
  }
  std::string next() {
    if (pos >= toks.size()) fail("unexpected end of text");
    return toks[pos++];
  }
  void expect(const std::string& t) {
    std::string got = next();
    if (got != t) fail(fmt::format("expected '{}', found '{}'", t, got));
  }
  bool accept(const std::string& t) {
    if (peek() == t) { ++pos; return true; }
    return false;
  }
};

struct Reader {
  VLexer lex;
  Netlist out;
  // Every declared reg owns one placeholder node; statements fill them in.
  std::map<std::string, int> reg_node;
  std::map<std::string, int64_t> reg_width;
  std::map<std::string, int> pin_node;
  std::map<std::string, bool> driven;
  std::string output_name = "out";
  int output_ref = -1;

  explicit Reader(const std::string& text) : lex(text) {}

  int64_t parse_range() {
    // [hi:lo] with lo == 0
    lex.expect("[");
    int64_t hi = std::stoll(lex.next());
    lex.expect(":");
    int64_t lo = std::stoll(lex.next());
    lex.expect("]");
    if (lo != 0) lex.fail("declaration ranges must end at 0");
    return hi + 1;
  }

  // name | name[i] | name[h:l] | 1'b0 | 1'b1
  int parse_operand() {
    std::string t = lex.next();
    if (t == "1'b0" || t == "1'b1") {
      Netlist::Node c{Netlist::Node::Kind::Const};
      c.bit = t == "1'b1" ? 1 : 0;
      return out.add(std::move(c));
    }
    int base;
    if (pin_node.count(t)) base = pin_node[t];
    else if (reg_node.count(t)) base = reg_node[t];
    else lex.fail(fmt::format("unknown wire '{}'", t));
    if (lex.accept("[")) {
      int64_t hi = std::stoll(lex.next());
      int64_t lo = hi;
      if (lex.accept(":")) lo = std::stoll(lex.next());
      lex.expect("]");
      if (hi == lo) {
        Netlist::Node s{Netlist::Node::Kind::Slice};
        s.index = hi;
        s.inputs = {base};
        return out.add(std::move(s));
      }
      Netlist::Node arr{Netlist::Node::Kind::Array};
      for (int64_t i = lo; i <= hi; ++i) {
        Netlist::Node s{Netlist::Node::Kind::Slice};
        s.index = i;
        s.inputs = {base};
        arr.inputs.push_back(out.add(std::move(s)));
      }
      return out.add(std::move(arr));
    }
    return base;
  }

  // expr := '!' operand | operand (op operand)*   with one operator kind
  int parse_expr() {
    if (lex.accept("!")) {
      Netlist::Node n{Netlist::Node::Kind::Not};
      n.inputs = {parse_operand()};
      return out.add(std::move(n));
    }
    int first = parse_operand();
    std::string op = lex.peek();
    if (op != "&" && op != "|" && op != "^") return first;
    GateOp gate = op == "&" ? GateOp::And : op == "|" ? GateOp::Or : GateOp::Xor;
    std::vector<int> inputs{first};
    while (lex.accept(op)) inputs.push_back(parse_operand());
    if (lex.peek() == "&" || lex.peek() == "|" || lex.peek() == "^")
      lex.fail("mixed operators in one statement");
    Netlist::Node g{Netlist::Node::Kind::Gate};
    g.op = gate;
    g.inputs = std::move(inputs);
    return out.add(std::move(g));
  }

  void parse_statement(bool clocked) {
    std::string target = lex.next();
    // Indexed targets accumulate into the reg's array node.
    int64_t hi = -1, lo = -1;
    if (lex.accept("[")) {
      hi = std::stoll(lex.next());
      lo = hi;
      if (lex.accept(":")) lo = std::stoll(lex.next());
      lex.expect("]");
    }
    lex.expect("<=");
    int rhs = parse_expr();
    lex.expect(";");

    if (target == output_name && hi < 0 && !clocked) {
      output_ref = rhs;
      driven[target] = true;
      return;
    }
    auto it = reg_node.find(target);
    if (it == reg_node.end()) lex.fail(fmt::format("assignment to undeclared '{}'", target));
    int node = it->second;
    if (clocked) {
      if (hi >= 0) lex.fail("indexed clocked assignments are not emitted");
      out.nodes[node].kind = Netlist::Node::Kind::Delay;
      out.nodes[node].inputs = {rhs};
      driven[target] = true;
      return;
    }
    if (hi < 0) {
      if (driven.count(target)) lex.fail(fmt::format("'{}' driven twice", target));
      // The reg's node adopts the expression node's content.
      out.nodes[node] = out.nodes[rhs];
      driven[target] = true;
      return;
    }
    // Element assignment into an array reg.
    auto& n = out.nodes[node];
    if (n.kind != Netlist::Node::Kind::Array) {
      n = Netlist::Node{Netlist::Node::Kind::Array};
      n.inputs.assign(reg_width[target], -1);
    }
    if (hi == lo) {
      out.nodes[node].inputs.at(hi) = rhs;
    } else {
      for (int64_t i = lo; i <= hi; ++i) {
        Netlist::Node s{Netlist::Node::Kind::Slice};
        s.index = i - lo;
        s.inputs = {rhs};
        out.nodes[node].inputs.at(i) = out.add(std::move(s));
      }
    }
    driven[target] = true;
  }

  Netlist run() {
    lex.expect("module");
    lex.next();  // module name
    lex.expect("(");
    bool saw_output = false;
    do {
      std::string dir = lex.next();
      if (dir == "input") {
        int64_t width = 0;
        if (lex.peek() == "[") width = parse_range();
        std::string name = lex.next();
        if (name == "clk") continue;  // the clock is implicit in Delay nodes
        Netlist::Node pin{Netlist::Node::Kind::Pin};
        pin.name = name;
        pin.pin_type = width == 0 ? t_bit() : t_array(t_bit(), SizeTerm::concrete(width));
        int idx = out.add(std::move(pin));
        pin_node[name] = idx;
        out.ports.emplace_back(name, out.nodes[idx].pin_type);
      } else if (dir == "output") {
        lex.expect("reg");
        if (lex.peek() == "[") parse_range();
        output_name = lex.next();
        saw_output = true;
      } else {
        lex.fail(fmt::format("unknown port direction '{}'", dir));
      }
    } while (lex.accept(","));
    lex.expect(")");
    lex.expect(";");
    if (!saw_output) lex.fail("no output port");

    for (;;) {
      if (lex.accept("reg")) {
        int64_t width = 0;
        if (lex.peek() == "[") width = parse_range();
        do {
          std::string name = lex.next();
          Netlist::Node stub{Netlist::Node::Kind::Const};
          int idx = out.add(std::move(stub));
          reg_node[name] = idx;
          reg_width[name] = width == 0 ? 1 : width;
        } while (lex.accept(","));
        lex.expect(";");
        continue;
      }
      if (lex.accept("always")) {
        bool clocked = false;
        if (lex.accept("@(*)")) {
          clocked = false;
        } else {
          lex.expect("@");
          lex.expect("(");
          lex.expect("posedge");
          lex.expect("clk");
          lex.expect(")");
          clocked = true;
        }
        lex.expect("begin");
        while (!lex.accept("end")) parse_statement(clocked);
        continue;
      }
      lex.expect("endmodule");
      break;
    }

    if (output_ref < 0) lex.fail("the output is never assigned");
    for (const auto& [name, idx] : reg_node) {
      if (!driven.count(name))
        lex.fail(fmt::format("declared reg '{}' is never driven", name));
      for (int in : out.nodes[idx].inputs)
        if (in < 0) lex.fail(fmt::format("reg '{}' has undriven bits", name));
    }
    out.output = output_ref;
    return std::move(out);
  }
};

}  // namespace

Netlist read_emitted_verilog(const std::string& text) {
  Reader reader(text);
  return reader.run();
}

}  // namespace gemini
