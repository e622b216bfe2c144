// Deterministic tracing interpreter for MiniLang.
//
// Every statement execution emits a StmtEnter event and counts as one
// step. Variable writes (including parameter binding, which precedes the
// callee's first statement) emit VarWrite. Runtime errors end the run with
// a Raise event; they are data in the trace, not C++ exceptions.
#pragma once

#include <string>

#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"

namespace tracefix::interp {

// Maximum nesting of active calls before a StackOverflow raise.
inline constexpr int kMaxCallDepth = 400;

// Optional hooks receiving the interpreter's own view of dataflow. Each
// callback names the StmtEnter event of the statement performing the
// operation (-1 when no statement is responsible, e.g. entry arguments).
class ExecutionObserver {
 public:
  virtual ~ExecutionObserver() = default;
  virtual void on_read(int /*frame*/, const std::string& /*name*/, int /*stmt_event*/) {}
  virtual void on_write(int /*frame*/, const std::string& /*name*/, int /*stmt_event*/) {}
  // A call's result, produced by a `return` statement, was consumed.
  virtual void on_return_value(int /*caller_stmt_event*/, int /*return_stmt_event*/) {}
  // A statement executed inside the block admitted by `governing_event`
  // (for top-level statements of a callee, the call site).
  virtual void on_control(int /*stmt_event*/, int /*governing_event*/) {}
};

// Runs `entry` and returns its trace. Throws lang::UnknownFunction when the
// entry function is missing and lang::ArityError on an argument count
// mismatch; everything else is reported through the trace outcome.
ExecutionTrace execute(const lang::Program& program, const EntryCall& entry,
                       const RuntimeLimits& limits = {}, ExecutionObserver* observer = nullptr);

}  // namespace tracefix::interp
