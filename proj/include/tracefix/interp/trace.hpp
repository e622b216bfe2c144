// Execution traces: the event log of one simulated run.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/interp/value.hpp"

namespace tracefix::interp {

// Raise kinds produced by the interpreter.
namespace raise_kind {
inline constexpr const char* kDivisionByZero = "DivisionByZero";
inline constexpr const char* kIndexOutOfBounds = "IndexOutOfBounds";
inline constexpr const char* kAssertionFailure = "AssertionFailure";
inline constexpr const char* kIntegerOverflow = "IntegerOverflow";
inline constexpr const char* kTypeError = "TypeError";
inline constexpr const char* kStackOverflow = "StackOverflow";
// `throw` statements.
inline constexpr const char* kException = "Exception";
}  // namespace raise_kind

enum class EventKind { StmtEnter, VarWrite, CallEnter, Ret, Raise, Out };

const char* to_string(EventKind kind);

// One trace record. Field use by kind:
//   StmtEnter: stmt_id, function, line, frame
//   VarWrite:  frame, name, value
//   CallEnter: function (callee), args, frame (the new frame's id)
//   Ret:       frame, value
//   Raise:     name (raise kind), text (message), function, line, frame
//   Out:       text
struct TraceEvent {
  int idx = 0;
  EventKind kind = EventKind::StmtEnter;
  int stmt_id = -1;
  std::string function;
  int line = 0;
  int frame = 0;
  std::string name;
  Value value;
  std::vector<Value> args;
  std::string text;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class OutcomeKind { Completed, Raised, BudgetExceeded };

const char* to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Completed;
  // Completed: return value of the entry function.
  Value value;
  // Raised: kind, message and source position of the failing statement.
  std::string raise_kind;
  std::string message;
  std::string function;
  int line = 0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct RuntimeLimits {
  long long step_budget = 100000;
  long long max_trace_events = 500000;

  friend bool operator==(const RuntimeLimits&, const RuntimeLimits&) = default;
};

struct EntryCall {
  std::string function;
  std::vector<Value> args;

  friend bool operator==(const EntryCall&, const EntryCall&) = default;
};

std::string to_string(const EntryCall& entry);

struct ExecutionTrace {
  std::string entry_function;
  std::vector<TraceEvent> events;
  Outcome outcome;
  long long step_count = 0;

  std::size_t size() const { return events.size(); }
  const TraceEvent& operator[](std::size_t i) const { return events[i]; }

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

using Bindings = std::map<std::string, Value>;
using FrameStates = std::map<int, Bindings>;

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// For every frame live at `idx`, the latest value written to each name at
// or before `idx`. Throws IndexOutOfRange.
FrameStates state_at(const ExecutionTrace& trace, std::size_t idx);

// Frames live at `idx`, innermost first.
std::vector<int> live_frames(const ExecutionTrace& trace, std::size_t idx);

// Function executing in each frame of the trace.
std::map<int, std::string> frame_functions(const ExecutionTrace& trace);

// Concatenated print output (one line per Out event).
std::string output_text(const ExecutionTrace& trace);

// Index of the last Raise event, or -1.
int raise_index(const ExecutionTrace& trace);

}  // namespace tracefix::interp
