#pragma once

#include <string>

#include "gemini/netlist.hpp"

namespace gemini {

// Emits a lowered netlist as one synthesizable Verilog module: a header with
// the input ports and `output reg out`, register declarations, a single
// always @(*) block of nonblocking assignments in topological order, and an
// always @(posedge clk) block when the design holds state. Identical
// netlists produce byte-identical text.
std::string emit_verilog(const Netlist& n, const std::string& module_name);

// Port/reg width fragment: scalars render empty, arrays as [w-1:0]
// (nested arrays flatten to their total bit width).
std::string render_width(const TypePtr& t);

}  // namespace gemini
