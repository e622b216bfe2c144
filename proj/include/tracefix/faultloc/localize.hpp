// Slicing criteria, backward slices and ranked repair locations.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/faultloc/dependencies.hpp"
#include "tracefix/snapshot/snapshot.hpp"

namespace tracefix::faultloc {

inline constexpr int kMaxSliceEvents = 5000;
inline constexpr int kTopLocations = 10;

class SymptomNotInTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SliceCriterion {
  int anchor_idx = 0;
  std::set<std::string> tracked_vars;
  bool include_control = true;
};

struct Slice {
  // StmtEnter node that the anchor event belongs to.
  int anchor_node = -1;
  // Node -> minimum dependence distance from the anchor.
  std::map<int, int> hops;
  bool truncated = false;

  bool contains(int node) const { return hops.count(node) > 0; }
};

struct RepairLocation {
  std::string function;
  int line = 0;
  // Dynamic occurrence (1-based) of the statement at `event_idx`.
  int occurrence = 1;
  int stmt_id = -1;
  double suspiciousness = 0;
  int hops = 0;
  double recency = 0;
  bool frame_match = false;
  // Latest slice occurrence.
  int event_idx = -1;
};

SliceCriterion criterion_from_problem(const snapshot::DebugSnapshot& snapshot,
                                      const interp::ExecutionTrace& trace,
                                      const lang::Program& program);

Slice backward_slice(const DependencyGraph& graph, const SliceCriterion& criterion,
                     int max_events = kMaxSliceEvents);

// Every location in the slice, most suspicious first.
std::vector<RepairLocation> rank_locations(const Slice& slice, const interp::ExecutionTrace& trace,
                                           const snapshot::DebugSnapshot& snapshot);

// criterion -> dependencies -> slice -> ranking, truncated to `top`.
std::vector<RepairLocation> localize(const snapshot::DebugSnapshot& snapshot,
                                     const interp::ExecutionTrace& trace,
                                     const lang::Program& program, int top = kTopLocations);

}  // namespace tracefix::faultloc
