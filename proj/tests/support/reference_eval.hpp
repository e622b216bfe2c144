// Straightforward evaluator used as a test oracle for the tracing
// interpreter. It shares only the Value type; control flow, scoping and
// error checks are implemented separately.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"

namespace tracefix::testing {

struct ReferenceResult {
  interp::OutcomeKind kind = interp::OutcomeKind::Completed;
  interp::Value value;
  std::string raise_kind;
  std::string raise_function;
  int raise_line = 0;
  std::string output;
  long long steps = 0;
  // Live frame states at the start of each step.
  std::vector<interp::FrameStates> states;
  // (function, line, frame) per step.
  struct Step {
    int stmt_id;
    std::string function;
    int line;
    int frame;
  };
  std::vector<Step> step_info;
};

ReferenceResult reference_run(const lang::Program& program, const interp::EntryCall& entry,
                              long long step_budget, bool record_states = true);

}  // namespace tracefix::testing
