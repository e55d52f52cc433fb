#pragma once

#include "gemini/eval.hpp"
#include "gemini/infer.hpp"
#include "gemini/value.hpp"

namespace gemini {

// Installs the built-in structures (Core, List, Int, String, Real, Array,
// BitArray, HW) into the type environment.
void install_stdlib_types(Analyzer& analyzer, MetaSource& fresh);

// Installs the matching host implementations into a value environment.
EnvPtr install_stdlib_values(EnvPtr env);

// The two's-complement circuit: bitwise NOT plus one, built from gates as a
// half-adder incrementer chain. Exposed for direct testing.
ValuePtr twos_complement_circuit(const ValuePtr& input_array, Span span);

}  // namespace gemini
