#include "tracefix/faultloc/localize.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "tracefix/lang/program_index.hpp"

namespace tracefix::faultloc {

using interp::EventKind;
using snapshot::ProblemKind;

SliceCriterion criterion_from_problem(const snapshot::DebugSnapshot& snap,
                                      const interp::ExecutionTrace& trace,
                                      const lang::Program& program) {
  if (!snap.problem) throw SymptomNotInTrace("snapshot has no problem specification");
  const snapshot::ProblemSpec& p = *snap.problem;
  const int last = std::min(snap.stop_idx, static_cast<int>(trace.events.size()) - 1);
  SliceCriterion c;
  c.include_control = true;
  switch (p.kind) {
    case ProblemKind::UnexpectedException: {
      for (int i = last; i >= 0; --i) {
        const auto& e = trace.events[static_cast<std::size_t>(i)];
        if (e.kind != EventKind::Raise || e.name != p.exception || e.function != p.function ||
            e.line != p.line)
          continue;
        c.anchor_idx = i;
        // Reads of the raising statement: the latest statement entered in
        // the raising frame.
        lang::ProgramIndex index(program);
        for (int j = i; j >= 0; --j) {
          const auto& s = trace.events[static_cast<std::size_t>(j)];
          if (s.kind == EventKind::StmtEnter && s.frame == e.frame) {
            c.tracked_vars = lang::header_reads(index.stmt(s.stmt_id));
            break;
          }
        }
        return c;
      }
      throw SymptomNotInTrace(p.exception + " at " + p.function + ":" + std::to_string(p.line) +
                              " does not occur in the run");
    }
    case ProblemKind::LineShouldNotExecute:
      for (int i = 0; i <= last; ++i) {
        const auto& e = trace.events[static_cast<std::size_t>(i)];
        if (e.kind == EventKind::StmtEnter && e.function == p.function && e.line == p.line) {
          c.anchor_idx = i;
          return c;
        }
      }
      throw SymptomNotInTrace(p.function + ":" + std::to_string(p.line) + " never executes");
    case ProblemKind::VariableWrongValue: {
      auto functions = interp::frame_functions(trace);
      for (int i = last; i >= 0; --i) {
        const auto& e = trace.events[static_cast<std::size_t>(i)];
        if (e.kind == EventKind::VarWrite && e.name == p.name && functions[e.frame] == p.function) {
          c.anchor_idx = i;
          c.tracked_vars = {p.name};
          return c;
        }
      }
      throw SymptomNotInTrace("variable " + p.name + " is never written in " + p.function);
    }
  }
  throw SymptomNotInTrace("unknown problem kind");
}

Slice backward_slice(const DependencyGraph& g, const SliceCriterion& c, int max_events) {
  Slice out;
  if (c.anchor_idx < 0 || c.anchor_idx >= static_cast<int>(g.owner.size()))
    throw std::out_of_range("slice anchor outside the trace");
  const int anchor = g.owner[static_cast<std::size_t>(c.anchor_idx)];
  if (anchor < 0) throw SymptomNotInTrace("anchor event has no responsible statement");
  out.anchor_node = anchor;
  out.hops[anchor] = 0;

  std::deque<int> queue;
  auto visit = [&](int node, int hops) {
    if (node < 0) return;
    if (out.hops.emplace(node, hops).second) queue.push_back(node);
  };

  // Seeds.
  const auto a = static_cast<std::size_t>(anchor);
  const bool any_tracked = !c.tracked_vars.empty();
  // A write anchor: the whole value computation of the writing statement
  // matters, not only its reads of tracked names.
  const bool anchor_writes_tracked = g.write_flag[static_cast<std::size_t>(c.anchor_idx)];
  if (c.include_control || !any_tracked) visit(g.control[a], 1);
  if (any_tracked) {
    for (const DataEdge& d : g.data[a])
      if (anchor_writes_tracked || c.tracked_vars.count(d.name)) visit(d.writer, 1);
    for (int r : g.returns[a]) visit(r, 1);
  }

  // Closure.
  while (!queue.empty()) {
    int node = queue.front();
    queue.pop_front();
    const int h = out.hops[node] + 1;
    const auto n = static_cast<std::size_t>(node);
    for (const DataEdge& d : g.data[n]) visit(d.writer, h);
    for (int r : g.returns[n]) visit(r, h);
    if (c.include_control) visit(g.control[n], h);
  }

  if (static_cast<int>(out.hops.size()) > max_events) {
    // Keep the anchor and the most recent events.
    std::vector<int> order;
    order.reserve(out.hops.size());
    for (const auto& [node, h] : out.hops)
      if (node != anchor) order.push_back(node);
    std::sort(order.begin(), order.end(), std::greater<int>());
    for (std::size_t i = static_cast<std::size_t>(std::max(0, max_events - 1)); i < order.size(); ++i)
      out.hops.erase(order[i]);
    out.truncated = true;
  }
  return out;
}

std::vector<RepairLocation> rank_locations(const Slice& slice, const interp::ExecutionTrace& trace,
                                           const snapshot::DebugSnapshot& snap) {
  if (slice.hops.empty()) return {};
  const int stop = std::min(snap.stop_idx, static_cast<int>(trace.events.size()) - 1);
  const int inner_frame = snap.stack.empty() ? 0 : snap.stack.front().frame;
  int stop_node = stop;
  for (int i = stop; i >= 0; --i) {
    const auto& e = trace.events[static_cast<std::size_t>(i)];
    if (e.kind == EventKind::StmtEnter && e.frame == inner_frame) {
      stop_node = i;
      break;
    }
  }

  struct StmtScore {
    int hops = 1 << 30;
    int latest = -1;
    bool frame_match = false;
  };
  std::map<int, StmtScore> per_stmt;
  for (const auto& [node, h] : slice.hops) {
    const auto& e = trace.events[static_cast<std::size_t>(node)];
    StmtScore& s = per_stmt[e.stmt_id];
    s.hops = std::min(s.hops, h);
    s.latest = std::max(s.latest, node);
    if (e.frame == inner_frame) s.frame_match = true;
  }

  // Dynamic occurrence numbers of each chosen event.
  std::unordered_map<int, int> occurrence;
  {
    std::unordered_map<int, int> count;
    std::set<int> wanted;
    for (const auto& [id, s] : per_stmt) wanted.insert(s.latest);
    for (const auto& e : trace.events) {
      if (e.kind != EventKind::StmtEnter) continue;
      int k = ++count[e.stmt_id];
      if (wanted.count(e.idx)) occurrence[e.idx] = k;
    }
  }

  std::map<std::pair<std::string, int>, RepairLocation> by_line;
  for (const auto& [id, s] : per_stmt) {
    const auto& e = trace.events[static_cast<std::size_t>(s.latest)];
    RepairLocation loc;
    loc.function = e.function;
    loc.line = e.line;
    loc.stmt_id = id;
    loc.hops = s.hops;
    loc.recency = stop_node > 0 ? std::min(1.0, static_cast<double>(s.latest) / stop_node) : 1.0;
    loc.frame_match = s.frame_match;
    loc.event_idx = s.latest;
    loc.occurrence = occurrence[s.latest];
    loc.suspiciousness =
        0.5 / (1.0 + s.hops) + 0.3 * loc.recency + 0.2 * (s.frame_match ? 1.0 : 0.0);
    auto key = std::make_pair(loc.function, loc.line);
    auto it = by_line.find(key);
    if (it == by_line.end() || loc.suspiciousness > it->second.suspiciousness ||
        (loc.suspiciousness == it->second.suspiciousness && loc.stmt_id < it->second.stmt_id))
      by_line[key] = loc;
  }

  std::vector<RepairLocation> out;
  out.reserve(by_line.size());
  for (auto& [key, loc] : by_line) out.push_back(std::move(loc));
  std::sort(out.begin(), out.end(), [](const RepairLocation& a, const RepairLocation& b) {
    if (a.suspiciousness != b.suspiciousness) return a.suspiciousness > b.suspiciousness;
    if (a.line != b.line) return a.line > b.line;
    if (a.stmt_id != b.stmt_id) return a.stmt_id < b.stmt_id;
    return a.function < b.function;
  });
  return out;
}

std::vector<RepairLocation> localize(const snapshot::DebugSnapshot& snap,
                                     const interp::ExecutionTrace& trace,
                                     const lang::Program& program, int top) {
  SliceCriterion c = criterion_from_problem(snap, trace, program);
  DependencyGraph g = build_dependencies(trace, program);
  Slice s = backward_slice(g, c);
  auto ranked = rank_locations(s, trace, snap);
  if (top >= 0 && static_cast<int>(ranked.size()) > top) ranked.resize(static_cast<std::size_t>(top));
  return ranked;
}

}  // namespace tracefix::faultloc
