// Debug snapshots: a failing run frozen at the point where the problem is
// observed, plus the problem itself.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"
#include "tracefix/snapshot/problem.hpp"

namespace tracefix::snapshot {

inline constexpr int kSnapshotVersion = 1;

struct StackFrameInfo {
  int frame = 0;
  std::string function;
  int line = 0;
  interp::Bindings bindings;

  friend bool operator==(const StackFrameInfo&, const StackFrameInfo&) = default;
};

struct DebugSnapshot {
  std::string program_source;
  interp::EntryCall entry;
  int stop_idx = 0;
  // Innermost first.
  std::vector<StackFrameInfo> stack;
  std::optional<ProblemSpec> problem;
  interp::RuntimeLimits limits;

  friend bool operator==(const DebugSnapshot&, const DebugSnapshot&) = default;
};

class StopNotReached : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StopRule {
  enum class Kind { AtRaise, AtEvent, AtLineOccurrence };
  Kind kind = Kind::AtRaise;
  int event = 0;
  std::string function;
  int line = 0;
  // 1-based occurrence count.
  int occurrence = 1;

  static StopRule at_raise() { return {}; }
  static StopRule at_event(int idx) { return {Kind::AtEvent, idx, {}, 0, 1}; }
  static StopRule at_line_occurrence(std::string function, int line, int k) {
    return {Kind::AtLineOccurrence, 0, std::move(function), line, k};
  }
};

// Index of the event selected by `rule`. Throws StopNotReached.
int find_stop(const interp::ExecutionTrace& trace, const StopRule& rule);

// Live stack at `stop_idx`, innermost first.
std::vector<StackFrameInfo> stack_at(const interp::ExecutionTrace& trace, int stop_idx);

// Executes once and freezes the run at the stop event. The problem is left
// unset.
DebugSnapshot capture(const std::string& program_source, const interp::EntryCall& entry,
                      const interp::RuntimeLimits& limits, const StopRule& rule);

// The symptom of a failed run: its final raise. Throws NoFailure.
ProblemSpec derive_symptom(const interp::ExecutionTrace& trace);

// Empty when `trace` reproduces the stored stop point and stack; otherwise a
// description of the first mismatch.
std::optional<std::string> consistency_error(const DebugSnapshot& snapshot,
                                             const interp::ExecutionTrace& trace);

// Checks that a problem refers to locations present in `program`. Throws
// SchemaError.
void check_problem(const ProblemSpec& problem, const lang::Program& program);

nlohmann::json value_to_json(const interp::Value& value);
interp::Value value_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const ProblemSpec& problem);
ProblemSpec problem_from_json(const nlohmann::json& j);

nlohmann::json limits_to_json(const interp::RuntimeLimits& limits);
interp::RuntimeLimits limits_from_json(const nlohmann::json& j);

nlohmann::json entry_to_json(const interp::EntryCall& entry);
interp::EntryCall entry_from_json(const nlohmann::json& j);

nlohmann::json snapshot_to_json(const DebugSnapshot& snapshot);
// Validates the schema version, the program and the problem's locations.
// Throws SchemaError.
DebugSnapshot snapshot_from_json(const nlohmann::json& j);

void save_snapshot(const DebugSnapshot& snapshot, const std::string& path);
DebugSnapshot load_snapshot(const std::string& path);

}  // namespace tracefix::snapshot
