#pragma once

#include <vector>

#include "gemini/netlist.hpp"

namespace gemini {

// Node index -> fully concrete hardware type.
using HwTypeReport = std::vector<TypePtr>;

// Stage-2 hardware type checking over the netlist: array sizes from element
// counts, delay times additive through Delay nodes, gates fed only bits, and
// no combinational cycles. Throws HwError on violation.
HwTypeReport hw_typecheck(const Netlist& n);

// Rewrites records into flat bit arrays. Fields are concatenated in
// declaration order with field 1 occupying the highest indices; field access
// becomes an index-range selection computed from the following fields'
// widths. Ports of record type flatten likewise.
Netlist lower_records(const Netlist& n);

// The staged program value must be an instantiated module.
void check_program_module(const ValuePtr& program_value);

}  // namespace gemini
