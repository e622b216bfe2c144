// Property checks over randomly generated programs.
#include "doctest.h"
#include "program_gen.hpp"
#include "reference_eval.hpp"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/interp/trace_io.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"

using namespace tracefix;
using interp::EventKind;
using interp::OutcomeKind;

namespace {
constexpr int kPrograms = 300;
const interp::RuntimeLimits kLimits{3000, 500000};
}  // namespace

TEST_CASE("generated programs print and re-parse to the same tree") {
  for (int seed = 0; seed < kPrograms; ++seed) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    lang::Program again = lang::parse(lang::pretty_print(g.program));
    INFO("seed " << seed);
    CHECK(lang::same_structure(g.program, again));
  }
}

TEST_CASE("interpreter agrees with the reference evaluator") {
  int completed = 0, raised = 0, exceeded = 0;
  for (int seed = 0; seed < kPrograms; ++seed) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    INFO("seed " << seed << "\n" << g.source);
    auto t = interp::execute(g.program, g.entry, kLimits);
    auto ref = testing::reference_run(g.program, g.entry, kLimits.step_budget);
    REQUIRE(t.outcome.kind == ref.kind);
    CHECK(t.step_count == ref.steps);
    switch (t.outcome.kind) {
      case OutcomeKind::Completed:
        ++completed;
        CHECK(t.outcome.value == ref.value);
        CHECK(interp::output_text(t) == ref.output);
        break;
      case OutcomeKind::Raised:
        ++raised;
        CHECK(t.outcome.raise_kind == ref.raise_kind);
        CHECK(t.outcome.function == ref.raise_function);
        CHECK(t.outcome.line == ref.raise_line);
        CHECK(interp::output_text(t) == ref.output);
        break;
      case OutcomeKind::BudgetExceeded: ++exceeded; break;
    }
    // Live state at every statement entry matches the reference environment.
    std::size_t k = 0;
    for (const auto& e : t.events) {
      if (e.kind != EventKind::StmtEnter) continue;
      REQUIRE(k < ref.states.size());
      CHECK(e.stmt_id == ref.step_info[k].stmt_id);
      CHECK(e.frame == ref.step_info[k].frame);
      CHECK(interp::state_at(t, static_cast<std::size_t>(e.idx)) == ref.states[k]);
      ++k;
    }
    CHECK(k == ref.states.size());
  }
  // The generator should exercise every outcome.
  CHECK(completed > 20);
  CHECK(raised > 20);
  CHECK(exceeded > 0);
}

TEST_CASE("execution is deterministic") {
  for (int seed = 0; seed < kPrograms; seed += 3) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    auto a = interp::execute(g.program, g.entry, kLimits);
    auto b = interp::execute(lang::parse(g.source), g.entry, kLimits);
    CHECK(interp::serialize_trace(a) == interp::serialize_trace(b));
  }
}

TEST_CASE("serialized traces round trip") {
  for (int seed = 0; seed < kPrograms; seed += 3) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    auto t = interp::execute(g.program, g.entry, kLimits);
    CHECK(interp::parse_trace(interp::serialize_trace(t)) == t);
  }
}

TEST_CASE("raising the budget preserves the earlier prefix") {
  for (int seed = 0; seed < kPrograms; seed += 2) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    auto full = interp::execute(g.program, g.entry, kLimits);
    for (long long budget : {1LL, 7LL, 40LL, 300LL}) {
      auto small = interp::execute(g.program, g.entry, {budget, 500000});
      INFO("seed " << seed << " budget " << budget);
      CHECK(small.step_count <= budget);
      REQUIRE(small.events.size() <= full.events.size());
      std::size_t n = small.events.size();
      if (small.outcome.kind != OutcomeKind::BudgetExceeded) {
        CHECK(small == full);
        continue;
      }
      CHECK(std::equal(small.events.begin(), small.events.end(), full.events.begin()));
      (void)n;
    }
  }
}

TEST_CASE("trace structure invariants") {
  for (int seed = 0; seed < kPrograms; ++seed) {
    auto g = testing::generate_program(static_cast<std::uint64_t>(seed));
    auto t = interp::execute(g.program, g.entry, kLimits);
    INFO("seed " << seed);
    int open = 0;
    int last_frame = 0;
    const interp::TraceEvent* last_non_out = nullptr;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      const auto& e = t.events[i];
      CHECK(e.idx == static_cast<int>(i));
      if (e.kind == EventKind::CallEnter) {
        CHECK(e.frame > last_frame);
        last_frame = e.frame;
        ++open;
      }
      if (e.kind == EventKind::Ret && e.frame != 0) --open;
      if (e.kind != EventKind::Out) last_non_out = &e;
    }
    bool ends_in_raise = last_non_out && last_non_out->kind == EventKind::Raise;
    CHECK(ends_in_raise == (t.outcome.kind == OutcomeKind::Raised));
    if (t.outcome.kind == OutcomeKind::Completed) CHECK(open == 0);
  }
}
