#include "doctest.h"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/interp/trace_io.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/program_index.hpp"

using namespace tracefix;
using interp::EntryCall;
using interp::EventKind;
using interp::OutcomeKind;
using interp::Value;

namespace {

interp::ExecutionTrace run(const std::string& src, EntryCall entry = {"main", {}},
                           interp::RuntimeLimits limits = {}) {
  lang::Program p = lang::parse(src);
  return interp::execute(p, entry, limits);
}

const char* kGcd =
    "fn gcd(a, b) {\n"
    "    while (b != 0) {\n"
    "        let t = b;\n"
    "        b = a % b;\n"
    "        a = t;\n"
    "    }\n"
    "    return a;\n"
    "}\n";

}  // namespace

TEST_CASE("gcd completes") {
  auto t = run(kGcd, {"gcd", {Value::integer(12), Value::integer(8)}});
  CHECK(t.outcome.kind == OutcomeKind::Completed);
  CHECK(t.outcome.value == Value::integer(4));
  // Params are written before the first statement.
  REQUIRE(t.events.size() > 3);
  CHECK(t.events[0].kind == EventKind::VarWrite);
  CHECK(t.events[1].kind == EventKind::VarWrite);
  CHECK(t.events[2].kind == EventKind::StmtEnter);
  CHECK(t.events.back().kind == EventKind::Ret);
}

TEST_CASE("failed assert") {
  auto t = run("fn main(){ assert(1==2); }");
  CHECK(t.outcome.kind == OutcomeKind::Raised);
  CHECK(t.outcome.raise_kind == "AssertionFailure");
  CHECK(t.outcome.line == 1);
  CHECK(t.events.back().kind == EventKind::Raise);
}

TEST_CASE("budget exhaustion") {
  auto t = run("fn main(){ while(true){} }", {"main", {}}, {1000, 500000});
  CHECK(t.outcome.kind == OutcomeKind::BudgetExceeded);
  CHECK(t.step_count == 1000);
}

TEST_CASE("event cap also ends the run") {
  auto t = run("fn main(){ let i = 0; while(true){ i = i + 1; } }", {"main", {}}, {100000, 50});
  CHECK(t.outcome.kind == OutcomeKind::BudgetExceeded);
  CHECK(t.events.size() == 50);
}

TEST_CASE("entry errors are exceptions") {
  lang::Program p = lang::parse(kGcd);
  CHECK_THROWS_AS(interp::execute(p, {"nope", {}}), lang::UnknownFunction);
  CHECK_THROWS_AS(interp::execute(p, {"gcd", {Value::integer(1)}}), lang::ArityError);
}

TEST_CASE("runtime errors") {
  auto kind = [](const std::string& body) {
    auto t = run("fn main(){ " + body + " }");
    return t.outcome.kind == OutcomeKind::Raised ? t.outcome.raise_kind : std::string("none");
  };
  CHECK(kind("print(1 / 0);") == "DivisionByZero");
  CHECK(kind("print(1 % 0);") == "DivisionByZero");
  CHECK(kind("let a = [1]; print(a[1]);") == "IndexOutOfBounds");
  CHECK(kind("let a = [1]; a[-1] = 2;") == "IndexOutOfBounds");
  CHECK(kind("print(9223372036854775807 + 1);") == "IntegerOverflow");
  CHECK(kind("print(-9223372036854775808 / -1);") == "IntegerOverflow");
  CHECK(kind("print(-9223372036854775808 % -1);") == "none");
  CHECK(kind("print(1 + true);") == "TypeError");
  CHECK(kind("if (1) { }") == "TypeError");
  CHECK(kind("throw \"boom\";") == "Exception");
  CHECK(kind("main();") == "StackOverflow");
}

TEST_CASE("raise records the innermost frame") {
  auto t = run(
      "fn div(a, b) {\n"
      "    return a / b;\n"
      "}\n"
      "fn main() {\n"
      "    print(div(4, 0));\n"
      "}\n");
  REQUIRE(t.outcome.kind == OutcomeKind::Raised);
  CHECK(t.outcome.function == "div");
  CHECK(t.outcome.line == 2);
  const auto& r = t.events.back();
  CHECK(r.kind == EventKind::Raise);
  CHECK(r.frame == 1);
  CHECK(r.text == "division by zero");
}

TEST_CASE("print output and values") {
  auto t = run(
      "fn main() {\n"
      "    let s = \"a\" + \"b\";\n"
      "    print(s);\n"
      "    print([1, 2] + [3]);\n"
      "    print(len(s));\n"
      "    print(s[1]);\n"
      "    print(\"x\" < \"y\");\n"
      "}\n");
  CHECK(interp::output_text(t) == "ab\n[1, 2, 3]\n2\nb\ntrue\n");
  CHECK(t.outcome.value == Value::unit());
}

TEST_CASE("for loop writes and steps") {
  auto t = run("fn main() {\n    for i in 0..2 {\n        print(i);\n    }\n}\n");
  int stmt_for = 0;
  int writes = 0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::StmtEnter && e.stmt_id == 0) ++stmt_for;
    if (e.kind == EventKind::VarWrite && e.name == "i") ++writes;
  }
  // First entry plus one re-entry per iteration.
  CHECK(stmt_for == 3);
  CHECK(writes == 3);
  CHECK(t.step_count == 5);
}

TEST_CASE("arrays are values") {
  auto t = run(
      "fn main() {\n"
      "    let a = [1, 2];\n"
      "    let b = a;\n"
      "    b[0] = 9;\n"
      "    print(a);\n"
      "    print(b);\n"
      "}\n");
  CHECK(interp::output_text(t) == "[1, 2]\n[9, 2]\n");
}

TEST_CASE("state_at") {
  auto t = run(kGcd, {"gcd", {Value::integer(12), Value::integer(8)}});
  auto st = interp::state_at(t, 1);
  CHECK(st.at(0).at("a") == Value::integer(12));
  CHECK(st.at(0).at("b") == Value::integer(8));
  auto end = interp::state_at(t, t.events.size() - 2);
  CHECK(end.at(0).at("a") == Value::integer(4));
  CHECK_THROWS_AS(interp::state_at(t, t.events.size()), interp::IndexOutOfRange);

  auto u = run("fn main() { let a = 1; a = 2; }");
  CHECK(u.events[0].kind == EventKind::StmtEnter);
  auto first = interp::state_at(u, 0);
  REQUIRE(first.count(0) == 1);
  CHECK(first.at(0).empty());
  CHECK(interp::state_at(u, u.events.size() - 2).at(0).at("a") == Value::integer(2));
}

TEST_CASE("callee frames disappear after return") {
  auto t = run("fn f(x) { return x + 1; }\nfn main() { let y = f(1); print(y); }\n");
  int call_idx = -1;
  for (const auto& e : t.events)
    if (e.kind == EventKind::CallEnter) call_idx = e.idx;
  REQUIRE(call_idx > 0);
  auto inside = interp::state_at(t, static_cast<std::size_t>(call_idx + 2));
  CHECK(inside.count(1) == 1);
  CHECK(inside.at(1).at("x") == Value::integer(1));
  auto after = interp::state_at(t, t.events.size() - 2);
  CHECK(after.count(1) == 0);
  CHECK(after.at(0).at("y") == Value::integer(2));
}

TEST_CASE("trace text round trip") {
  auto t = run(
      "fn main() {\n"
      "    let s = \"tab\\there \\\"q\\\"\";\n"
      "    print(s);\n"
      "    print([[1], [2, -3]]);\n"
      "    let z = f(s, [true]);\n"
      "    assert(z == 0);\n"
      "}\n"
      "fn f(a, b) { return 1; }\n");
  std::string text = interp::serialize_trace(t);
  auto back = interp::parse_trace(text);
  CHECK(back == t);
  CHECK(interp::serialize_trace(back) == text);
  CHECK_THROWS_AS(interp::parse_trace("0\tSTMT\t0\tmain\n"), interp::TraceFormatError);
  CHECK_THROWS_AS(interp::parse_trace("ENTRY\tmain\n"), interp::TraceFormatError);
}

TEST_CASE("the entry frame closes with the final return") {
  auto t = run("fn main() { let a = 1; return a; }");
  CHECK(interp::live_frames(t, t.events.size() - 2) == std::vector<int>{0});
  CHECK(interp::live_frames(t, t.events.size() - 1).empty());
}
