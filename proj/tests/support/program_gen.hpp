// Random well-formed MiniLang programs for property tests. Programs are
// mostly type-correct; runtime errors (division by zero, bounds) and
// non-termination are possible and intended.
#pragma once

#include <cstdint>
#include <string>

#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"

namespace tracefix::testing {

struct GeneratedProgram {
  std::string source;
  lang::Program program;
  interp::EntryCall entry;
};

GeneratedProgram generate_program(std::uint64_t seed);

}  // namespace tracefix::testing
