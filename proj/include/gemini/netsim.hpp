#pragma once

#include <map>
#include <string>
#include <vector>

#include "gemini/netlist.hpp"

namespace gemini {

// Input assignment: bits are least-significant-first. Sequential designs run
// `cycles` steps with the inputs held constant; delays start at zero.
struct Stimulus {
  std::map<std::string, std::vector<int>> inputs;
  int cycles = 1;
};

// Per-cycle output bits (least-significant-first).
using SimResult = std::vector<std::vector<int>>;

// Deterministic two-valued simulation in topological order. Works on both
// pre-lowering (records, field reads) and lowered netlists.
SimResult simulate(const Netlist& n, const Stimulus& s);

// Parses text produced by the Verilog emitter (the documented subset) back
// into a netlist whose simulation matches the source design.
Netlist read_emitted_verilog(const std::string& text);

// True iff both designs agree on every assignment of their (identical)
// input ports. Total input width is capped at 20 bits.
bool exhaustive_equiv(const Netlist& a, const Netlist& b);

}  // namespace gemini
