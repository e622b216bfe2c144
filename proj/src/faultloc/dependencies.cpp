#include "tracefix/faultloc/dependencies.hpp"

#include <unordered_map>

#include "tracefix/lang/program_index.hpp"

namespace tracefix::faultloc {

using interp::EventKind;

namespace {

struct FrameState {
  int current = -1;
  int call_site = -1;
  std::unordered_map<std::string, int> last_writer;
  // stmt_id -> latest StmtEnter in this frame.
  std::unordered_map<int, int> latest;
};

}  // namespace

DependencyGraph build_dependencies(const interp::ExecutionTrace& trace,
                                   const lang::Program& program) {
  lang::ProgramIndex index(program);
  const std::size_t n = trace.events.size();
  DependencyGraph g;
  g.owner.assign(n, -1);
  g.data.resize(n);
  g.control.assign(n, -1);
  g.returns.resize(n);
  g.node_flag.assign(n, 0);
  g.write_flag.assign(n, 0);

  std::unordered_map<int, FrameState> frames;
  frames[0];
  std::vector<int> stack{0};

  for (std::size_t i = 0; i < n; ++i) {
    const interp::TraceEvent& e = trace.events[i];
    const int idx = static_cast<int>(i);
    switch (e.kind) {
      case EventKind::StmtEnter: {
        if (!index.contains(e.stmt_id))
          throw TraceMismatch("trace statement " + std::to_string(e.stmt_id) + " not in program");
        const lang::StmtInfo& info = index.info(e.stmt_id);
        if (info.function != e.function || info.stmt->line != e.line)
          throw TraceMismatch("trace statement " + std::to_string(e.stmt_id) + " at " +
                              e.function + ":" + std::to_string(e.line) +
                              " does not match the program");
        FrameState& f = frames[e.frame];
        const lang::Stmt& s = *info.stmt;
        g.nodes.push_back(idx);
        g.node_flag[i] = 1;
        g.owner[i] = idx;

        bool reentry = false;
        if (s.kind == lang::StmtKind::ForRange && f.current >= 0) {
          int prev = trace.events[static_cast<std::size_t>(f.current)].stmt_id;
          reentry = prev == s.id || index.is_descendant(prev, s.id);
        }
        std::set<std::string> reads =
            reentry ? std::set<std::string>{s.name} : lang::header_reads(s);
        for (const std::string& name : reads) {
          auto it = f.last_writer.find(name);
          if (it != f.last_writer.end() && it->second >= 0)
            g.data[i].push_back(DataEdge{name, it->second});
        }

        if (info.parent >= 0) {
          auto it = f.latest.find(info.parent);
          if (it != f.latest.end()) g.control[i] = it->second;
        } else {
          g.control[i] = f.call_site;
        }
        f.current = idx;
        f.latest[s.id] = idx;
        break;
      }
      case EventKind::VarWrite: {
        FrameState& f = frames[e.frame];
        // Parameter writes precede the callee's first statement; they
        // belong to the caller's statement.
        int owner = f.current >= 0 ? f.current : f.call_site;
        g.owner[i] = owner;
        g.write_flag[i] = 1;
        f.last_writer[e.name] = owner;
        break;
      }
      case EventKind::CallEnter: {
        FrameState& callee = frames[e.frame];
        callee.call_site = frames[stack.back()].current;
        g.owner[i] = callee.call_site;
        stack.push_back(e.frame);
        break;
      }
      case EventKind::Ret: {
        FrameState& callee = frames[e.frame];
        g.owner[i] = callee.current;
        if (e.frame != 0 && stack.size() > 1) {
          stack.pop_back();
          int site = frames[stack.back()].current;
          int ret = callee.current;
          if (site >= 0 && ret >= 0 &&
              index.stmt(trace.events[static_cast<std::size_t>(ret)].stmt_id).kind ==
                  lang::StmtKind::Return)
            g.returns[static_cast<std::size_t>(site)].push_back(ret);
          frames.erase(e.frame);
        }
        break;
      }
      case EventKind::Raise:
      case EventKind::Out: g.owner[i] = frames[stack.back()].current; break;
    }
  }
  return g;
}

}  // namespace tracefix::faultloc
