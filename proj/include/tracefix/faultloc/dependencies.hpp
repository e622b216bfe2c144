// Dynamic dependence over a captured trace.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"

namespace tracefix::faultloc {

class TraceMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataEdge {
  std::string name;
  int writer = -1;

  friend bool operator==(const DataEdge&, const DataEdge&) = default;
  friend auto operator<=>(const DataEdge&, const DataEdge&) = default;
};

// Nodes are StmtEnter event indices. Per-event vectors are indexed by trace
// event index and are empty (or -1) for non-node events.
struct DependencyGraph {
  std::vector<int> nodes;
  // StmtEnter of the statement responsible for each event: the executing
  // statement of the event's frame. Parameter writes belong to the call
  // site; entry arguments have no owner (-1).
  std::vector<int> owner;
  // One edge per variable read with a prior write: the statement that
  // performed the last write to that name in the reader's frame.
  std::vector<std::vector<DataEdge>> data;
  // Innermost governing if/while/for occurrence in the same frame, or the
  // call site for top-level statements of a callee.
  std::vector<int> control;
  // Call result consumed by this statement: the callee's `return`
  // statement. These point forward in event order.
  std::vector<std::vector<int>> returns;

  // Per event: 1 for StmtEnter.
  std::vector<char> node_flag;
  // Per event: 1 for VarWrite.
  std::vector<char> write_flag;

  bool is_node(int idx) const {
    return idx >= 0 && idx < static_cast<int>(node_flag.size()) &&
           node_flag[static_cast<std::size_t>(idx)];
  }
};

// Throws TraceMismatch when the trace's statements are not in `program`.
DependencyGraph build_dependencies(const interp::ExecutionTrace& trace,
                                   const lang::Program& program);

}  // namespace tracefix::faultloc
