// Developer-declared symptoms.
#pragma once

#include <optional>
#include <string>

#include "tracefix/interp/value.hpp"

namespace tracefix::snapshot {

enum class ProblemKind { UnexpectedException, LineShouldNotExecute, VariableWrongValue };

const char* to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::UnexpectedException;
  std::string function;
  // UnexpectedException, LineShouldNotExecute.
  int line = 0;
  // UnexpectedException: raise kind.
  std::string exception;
  // VariableWrongValue.
  std::string name;
  interp::Value bad_value;
  std::optional<interp::Value> expected_value;

  static ProblemSpec unexpected_exception(std::string function, int line, std::string kind);
  static ProblemSpec line_should_not_execute(std::string function, int line);
  static ProblemSpec variable_wrong_value(std::string function, std::string name,
                                          interp::Value bad,
                                          std::optional<interp::Value> expected = std::nullopt);

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

// One-line human description, e.g. `DivisionByZero raised at gcd:4`.
std::string describe(const ProblemSpec& problem);

}  // namespace tracefix::snapshot
