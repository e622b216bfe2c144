#include <random>

#include "doctest.h"
#include "dependency_oracle.hpp"
#include "program_gen.hpp"
#include "tracefix/faultloc/localize.hpp"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"

using namespace tracefix;
using faultloc::DataEdge;
using interp::EventKind;
using interp::Value;
using snapshot::ProblemSpec;

namespace {

struct Run {
  lang::Program program;
  interp::ExecutionTrace trace;
};

Run run(const std::string& src, interp::EntryCall entry = {"main", {}}) {
  Run r{lang::parse(src), {}};
  r.trace = interp::execute(r.program, entry);
  return r;
}

std::vector<int> stmt_events(const interp::ExecutionTrace& t) {
  std::vector<int> out;
  for (const auto& e : t.events)
    if (e.kind == EventKind::StmtEnter) out.push_back(e.idx);
  return out;
}

std::set<int> slice_lines(const faultloc::Slice& s, const interp::ExecutionTrace& t) {
  std::set<int> out;
  for (const auto& [node, h] : s.hops) out.insert(t.events[static_cast<std::size_t>(node)].line);
  return out;
}

}  // namespace

TEST_CASE("straight-line data edge") {
  auto r = run("fn main() {\n    let a = 1;\n    let c = a + 1;\n}\n");
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto ev = stmt_events(r.trace);
  REQUIRE(ev.size() == 2);
  CHECK(g.data[static_cast<std::size_t>(ev[1])] == std::vector<DataEdge>{{"a", ev[0]}});
  CHECK(g.data[static_cast<std::size_t>(ev[0])].empty());
  CHECK(g.control[static_cast<std::size_t>(ev[1])] == -1);
}

TEST_CASE("control edge to the governing if") {
  auto r = run("fn main() {\n    let a = 1;\n    if (a > 0) {\n        print(a);\n    }\n}\n");
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto ev = stmt_events(r.trace);
  REQUIRE(ev.size() == 3);
  CHECK(g.control[static_cast<std::size_t>(ev[2])] == ev[1]);
}

TEST_CASE("mismatched trace is rejected") {
  auto r = run("fn main() {\n    let a = 1;\n    let c = a + 1;\n}\n");
  auto other = lang::parse("fn main() {\n    print(1);\n}\n");
  CHECK_THROWS_AS(faultloc::build_dependencies(r.trace, other), faultloc::TraceMismatch);
}

TEST_CASE("slice excludes independent statements") {
  auto r = run(
      "fn main() {\n    let a = 1;\n    let b = 2;\n    let c = a + 1;\n    assert(c == 3);\n}\n");
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto ev = stmt_events(r.trace);
  faultloc::SliceCriterion c{ev[3], {"c"}, true};
  auto s = faultloc::backward_slice(g, c);
  CHECK(slice_lines(s, r.trace) == std::set<int>{2, 4, 5});
  CHECK(s.hops.at(ev[3]) == 0);
  CHECK(s.hops.at(ev[2]) == 1);
  CHECK(s.hops.at(ev[0]) == 2);
}

TEST_CASE("literal write slices to the anchor") {
  auto r = run("fn main() {\n    let a = 1;\n    let b = 2;\n}\n");
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto ev = stmt_events(r.trace);
  auto s = faultloc::backward_slice(g, {ev[1], {"b"}, true});
  CHECK(s.hops.size() == 1);
  CHECK(s.contains(ev[1]));
}

TEST_CASE("slice follows parameters and return values across calls") {
  auto r = run(
      "fn dec(x) {\n    let y = x - 1;\n    return y;\n}\n"
      "fn main() {\n    let n = 1;\n    let d = dec(n);\n    print(10 / d);\n}\n");
  auto snap = snapshot::capture(lang::pretty_print(r.program), {"main", {}}, {},
                                snapshot::StopRule::at_raise());
  snap.problem = ProblemSpec::unexpected_exception("main", 8, "DivisionByZero");
  auto c = faultloc::criterion_from_problem(snap, r.trace, r.program);
  CHECK(c.tracked_vars == std::set<std::string>{"d"});
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto s = faultloc::backward_slice(g, c);
  CHECK(slice_lines(s, r.trace) == std::set<int>{2, 3, 6, 7, 8});
}

TEST_CASE("criteria from problems") {
  const char* src =
      "fn mod(a, b) {\n    return a % b;\n}\n"
      "fn main() {\n    let total = 0;\n    for i in 0..3 {\n        total = total + i;\n    }\n"
      "    if (total > 100) {\n        print(total);\n    }\n    print(mod(total, 0));\n}\n";
  auto r = run(src);
  auto snap = snapshot::capture(src, {"main", {}}, {}, snapshot::StopRule::at_raise());

  snap.problem = ProblemSpec::unexpected_exception("mod", 2, "DivisionByZero");
  auto c = faultloc::criterion_from_problem(snap, r.trace, r.program);
  CHECK(c.tracked_vars == std::set<std::string>{"a", "b"});
  CHECK(c.anchor_idx == snap.stop_idx);

  snap.problem = ProblemSpec::line_should_not_execute("main", 10);
  CHECK_THROWS_AS(faultloc::criterion_from_problem(snap, r.trace, r.program),
                  faultloc::SymptomNotInTrace);

  snap.problem = ProblemSpec::line_should_not_execute("main", 7);
  c = faultloc::criterion_from_problem(snap, r.trace, r.program);
  CHECK(c.tracked_vars.empty());
  CHECK(r.trace.events[static_cast<std::size_t>(c.anchor_idx)].line == 7);

  snap.problem = ProblemSpec::variable_wrong_value("main", "total", Value::integer(3));
  c = faultloc::criterion_from_problem(snap, r.trace, r.program);
  const auto& w = r.trace.events[static_cast<std::size_t>(c.anchor_idx)];
  CHECK(w.kind == EventKind::VarWrite);
  CHECK(w.name == "total");
  CHECK(w.value == Value::integer(3));
  // No later write of total exists before the stop.
  for (int i = c.anchor_idx + 1; i <= snap.stop_idx; ++i) {
    const auto& e = r.trace.events[static_cast<std::size_t>(i)];
    CHECK_FALSE((e.kind == EventKind::VarWrite && e.name == "total" && e.frame == 0));
  }

  snap.problem = ProblemSpec::variable_wrong_value("main", "nothing", Value::integer(3));
  CHECK_THROWS_AS(faultloc::criterion_from_problem(snap, r.trace, r.program),
                  faultloc::SymptomNotInTrace);
}

TEST_CASE("raising statement scores one") {
  const char* src =
      "fn main() {\n    let a = 4;\n    let b = a - 4;\n    let c = 0;\n    print(a / b);\n}\n";
  auto r = run(src);
  auto snap = snapshot::capture(src, {"main", {}}, {}, snapshot::StopRule::at_raise());
  snap.problem = ProblemSpec::unexpected_exception("main", 5, "DivisionByZero");
  auto locs = faultloc::localize(snap, r.trace, r.program);
  // Line 4 is independent; lines 2 and 3 are both read by the division.
  REQUIRE(locs.size() == 3);
  CHECK(locs[0].line == 5);
  CHECK(locs[0].suspiciousness == doctest::Approx(1.0));
  CHECK(locs[0].hops == 0);
  CHECK(locs[1].line == 3);
  CHECK(locs[2].line == 2);
  auto ev = stmt_events(r.trace);
  // Oracle: hops 1, recency = own event / event of line 5, same frame.
  CHECK(locs[1].hops == 1);
  CHECK(locs[1].suspiciousness ==
        doctest::Approx(0.5 / 2 + 0.3 * static_cast<double>(ev[1]) / ev[3] + 0.2));
  CHECK(locs[2].suspiciousness ==
        doctest::Approx(0.5 / 2 + 0.3 * static_cast<double>(ev[0]) / ev[3] + 0.2));
}

TEST_CASE("outer-frame dependency two hops back") {
  const char* src =
      "fn check(v) {\n    assert(v < 10);\n    return v;\n}\n"
      "fn main() {\n    let base = 7;\n    let x = base + 5;\n    let unused = 1;\n"
      "    print(unused);\n    check(x);\n}\n";
  auto r = run(src);
  auto snap = snapshot::capture(src, {"main", {}}, {}, snapshot::StopRule::at_raise());
  snap.problem = ProblemSpec::unexpected_exception("check", 2, "AssertionFailure");
  auto c = faultloc::criterion_from_problem(snap, r.trace, r.program);
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto s = faultloc::backward_slice(g, c);
  auto locs = faultloc::rank_locations(s, r.trace, snap);
  // assert(v) <- check(x) call site <- let x <- let base
  const faultloc::RepairLocation* base = nullptr;
  for (const auto& l : locs)
    if (l.line == 6) base = &l;
  REQUIRE(base != nullptr);
  CHECK(base->hops == 3);
  CHECK_FALSE(base->frame_match);
  auto ev = stmt_events(r.trace);
  int stop_node = ev.back() == snap.stop_idx ? ev.back() : ev[ev.size() - 1];
  double rr = static_cast<double>(ev[0]) / stop_node;
  CHECK(base->suspiciousness == doctest::Approx(0.5 / 4 + 0.3 * rr));
  for (const auto& l : locs) CHECK(l.line != 8);
}

TEST_CASE("dependencies match the interpreter's own dataflow on random programs") {
  int checked = 0;
  std::mt19937 rng(7);
  for (std::uint64_t seed = 1000; checked < 100; ++seed) {
    auto gp = testing::generate_program(seed);
    testing::DependencyOracle oracle;
    auto t = interp::execute(gp.program, gp.entry, {2000, 200}, &oracle);
    if (t.events.size() > 200 || t.outcome.kind == interp::OutcomeKind::BudgetExceeded) continue;
    ++checked;
    INFO("seed " << seed << "\n" << gp.source);
    auto g = faultloc::build_dependencies(t, gp.program);

    std::set<std::tuple<int, std::string, int>> graph_data;
    std::set<std::pair<int, int>> graph_returns, graph_control;
    for (int node : g.nodes) {
      auto n = static_cast<std::size_t>(node);
      for (const auto& d : g.data[n]) graph_data.insert({node, d.name, d.writer});
      for (int x : g.returns[n]) graph_returns.insert({node, x});
      if (g.control[n] >= 0) graph_control.insert({node, g.control[n]});
      std::set<std::string> names;
      for (const auto& d : g.data[n]) CHECK(names.insert(d.name).second);
    }
    // Every observed read is covered by the same writer; static reads the
    // run skipped (short-circuit) may add edges but never contradict.
    for (const auto& edge : oracle.data) CHECK(graph_data.count(edge) == 1);
    for (const auto& [r, name, w] : graph_data)
      if (oracle.reads.count({r, name})) CHECK(oracle.data.count({r, name, w}) == 1);
    CHECK(graph_returns == oracle.returns);
    CHECK(graph_control == oracle.control);
    for (const auto& [r, name, w] : graph_data) CHECK(w < r);
    for (const auto& [s, gv] : graph_control) CHECK(gv < s);

    // Slice soundness from a few anchors.
    for (int k = 0; k < 5 && !g.nodes.empty(); ++k) {
      int anchor = g.nodes[rng() % g.nodes.size()];
      // Track every name the anchor statement actually read.
      faultloc::SliceCriterion c{anchor, {"<none>"}, true};
      for (const auto& [stmt, name] : oracle.reads)
        if (stmt == anchor) c.tracked_vars.insert(name);
      auto s = faultloc::backward_slice(g, c, 1 << 30);
      for (int node : oracle.closure(anchor)) CHECK(s.contains(node));
    }
  }
}

TEST_CASE("ranking invariants on random programs") {
  std::mt19937 rng(11);
  int checked = 0;
  for (std::uint64_t seed = 5000; checked < 60; ++seed) {
    auto gp = testing::generate_program(seed);
    auto t = interp::execute(gp.program, gp.entry, {2000, 5000});
    if (t.outcome.kind != interp::OutcomeKind::Raised) continue;
    ++checked;
    INFO("seed " << seed);
    snapshot::DebugSnapshot snap;
    snap.program_source = gp.source;
    snap.entry = gp.entry;
    snap.stop_idx = interp::raise_index(t);
    snap.stack = snapshot::stack_at(t, snap.stop_idx);
    snap.problem = snapshot::derive_symptom(t);
    auto c = faultloc::criterion_from_problem(snap, t, gp.program);
    auto g = faultloc::build_dependencies(t, gp.program);
    auto s = faultloc::backward_slice(g, c);
    auto locs = faultloc::rank_locations(s, t, snap);
    REQUIRE_FALSE(locs.empty());
    // The raising statement is first with score 1.
    CHECK(locs[0].line == t.outcome.line);
    CHECK(locs[0].function == t.outcome.function);
    CHECK(locs[0].suspiciousness == doctest::Approx(1.0));
    std::set<std::pair<std::string, int>> keys;
    for (const auto& l : locs) {
      CHECK(l.suspiciousness > 0.0);
      CHECK(l.suspiciousness <= 1.0 + 1e-12);
      CHECK(keys.insert({l.function, l.line}).second);
    }
    CHECK(faultloc::rank_locations(s, t, snap).size() == locs.size());

    // Removing a non-anchor node never raises another location's score.
    std::map<std::pair<std::string, int>, double> before;
    for (const auto& l : locs) before[{l.function, l.line}] = l.suspiciousness;
    std::vector<int> others;
    for (const auto& [node, h] : s.hops)
      if (node != s.anchor_node) others.push_back(node);
    if (others.empty()) continue;
    faultloc::Slice smaller = s;
    smaller.hops.erase(others[rng() % others.size()]);
    for (const auto& l : faultloc::rank_locations(smaller, t, snap))
      CHECK(l.suspiciousness <= before.at({l.function, l.line}) + 1e-12);
  }
}

TEST_CASE("slice cap keeps the anchor and the newest events") {
  std::string src = "fn main() {\n    let s = 0;\n    for i in 0..3000 {\n        s = s + i;\n    }\n"
                    "    assert(s == 0);\n}\n";
  auto r = run(src);
  auto g = faultloc::build_dependencies(r.trace, r.program);
  auto ev = stmt_events(r.trace);
  auto s = faultloc::backward_slice(g, {ev.back(), {"s"}, true}, 100);
  CHECK(s.truncated);
  CHECK(s.hops.size() == 100);
  CHECK(s.contains(ev.back()));
  CHECK(s.hops.begin()->first > ev[ev.size() / 2]);
}
