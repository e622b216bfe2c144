#include "tracefix/interp/trace.hpp"

namespace tracefix::interp {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::StmtEnter: return "STMT";
    case EventKind::VarWrite: return "WRITE";
    case EventKind::CallEnter: return "CALL";
    case EventKind::Ret: return "RET";
    case EventKind::Raise: return "RAISE";
    case EventKind::Out: return "OUT";
  }
  return "?";
}

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Completed: return "Completed";
    case OutcomeKind::Raised: return "Raised";
    case OutcomeKind::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

std::string to_string(const EntryCall& entry) {
  std::string out = entry.function + "(";
  for (std::size_t i = 0; i < entry.args.size(); ++i) {
    if (i) out += ", ";
    out += entry.args[i].literal();
  }
  return out + ")";
}

std::vector<int> live_frames(const ExecutionTrace& trace, std::size_t idx) {
  if (idx >= trace.events.size()) throw IndexOutOfRange("trace index " + std::to_string(idx));
  std::vector<int> stack{0};
  for (std::size_t i = 0; i <= idx; ++i) {
    const TraceEvent& e = trace.events[i];
    if (e.kind == EventKind::CallEnter) {
      stack.push_back(e.frame);
    } else if (e.kind == EventKind::Ret && !stack.empty() && stack.back() == e.frame) {
      stack.pop_back();
    }
  }
  return {stack.rbegin(), stack.rend()};
}

FrameStates state_at(const ExecutionTrace& trace, std::size_t idx) {
  std::vector<int> live = live_frames(trace, idx);
  FrameStates out;
  for (int f : live) out[f];
  for (std::size_t i = 0; i <= idx; ++i) {
    const TraceEvent& e = trace.events[i];
    if (e.kind != EventKind::VarWrite) continue;
    auto it = out.find(e.frame);
    if (it != out.end()) it->second[e.name] = e.value;
  }
  return out;
}

std::map<int, std::string> frame_functions(const ExecutionTrace& trace) {
  std::map<int, std::string> out{{0, trace.entry_function}};
  for (const auto& e : trace.events)
    if (e.kind == EventKind::CallEnter) out[e.frame] = e.function;
  return out;
}

std::string output_text(const ExecutionTrace& trace) {
  std::string out;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::Out) out += e.text + "\n";
  return out;
}

int raise_index(const ExecutionTrace& trace) {
  for (std::size_t i = trace.events.size(); i-- > 0;)
    if (trace.events[i].kind == EventKind::Raise) return static_cast<int>(i);
  return -1;
}

}  // namespace tracefix::interp
