#include "tracefix/snapshot/problem.hpp"

namespace tracefix::snapshot {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::UnexpectedException: return "UnexpectedException";
    case ProblemKind::LineShouldNotExecute: return "LineShouldNotExecute";
    case ProblemKind::VariableWrongValue: return "VariableWrongValue";
  }
  return "?";
}

ProblemSpec ProblemSpec::unexpected_exception(std::string function, int line, std::string kind) {
  ProblemSpec p;
  p.kind = ProblemKind::UnexpectedException;
  p.function = std::move(function);
  p.line = line;
  p.exception = std::move(kind);
  return p;
}

ProblemSpec ProblemSpec::line_should_not_execute(std::string function, int line) {
  ProblemSpec p;
  p.kind = ProblemKind::LineShouldNotExecute;
  p.function = std::move(function);
  p.line = line;
  return p;
}

ProblemSpec ProblemSpec::variable_wrong_value(std::string function, std::string name,
                                              interp::Value bad,
                                              std::optional<interp::Value> expected) {
  ProblemSpec p;
  p.kind = ProblemKind::VariableWrongValue;
  p.function = std::move(function);
  p.name = std::move(name);
  p.bad_value = std::move(bad);
  p.expected_value = std::move(expected);
  return p;
}

std::string describe(const ProblemSpec& p) {
  switch (p.kind) {
    case ProblemKind::UnexpectedException:
      return p.exception + " raised at " + p.function + ":" + std::to_string(p.line);
    case ProblemKind::LineShouldNotExecute:
      return "line " + p.function + ":" + std::to_string(p.line) + " should not execute";
    case ProblemKind::VariableWrongValue: {
      std::string out = "variable " + p.name + " in " + p.function + " has wrong value " +
                        p.bad_value.literal();
      if (p.expected_value) out += " (expected " + p.expected_value->literal() + ")";
      return out;
    }
  }
  return "";
}

}  // namespace tracefix::snapshot
