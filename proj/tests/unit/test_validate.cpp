#include <random>

#include "doctest.h"
#include "program_gen.hpp"
#include "tracefix/faultloc/localize.hpp"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/patch/local.hpp"
#include "tracefix/validate/validate.hpp"

using namespace tracefix;
using interp::Value;
using patch::Edit;
using patch::Patch;
using snapshot::ProblemSpec;
using validate::RankedEntry;
using validate::ValidationResult;

namespace {

// Textbook quadratic table.
std::size_t lcs_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

double similarity_oracle(const interp::ExecutionTrace& x, const interp::ExecutionTrace& y) {
  auto px = validate::statement_projection(x), py = validate::statement_projection(y);
  if (px.empty() && py.empty()) return 1.0;
  if (px.empty() || py.empty()) return 0.0;
  std::map<std::pair<std::string, int>, int> ids;
  std::vector<int> a, b;
  for (const auto& k : px) a.push_back(ids.emplace(k, static_cast<int>(ids.size())).first->second);
  for (const auto& k : py) b.push_back(ids.emplace(k, static_cast<int>(ids.size())).first->second);
  return static_cast<double>(lcs_oracle(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

Patch single(Edit e, std::string strategy = "test") {
  Patch p;
  p.edits.push_back(std::move(e));
  p.strategy = std::move(strategy);
  return p;
}

lang::StmtRef ref(const std::string& f, int line) { return {f, line, 0}; }

const char* kBuggyGcd =
    "fn gcd(a, b) {\n"
    "    while (true) {\n"
    "        let t = b;\n"
    "        b = a % b;\n"
    "        a = t;\n"
    "    }\n"
    "    return a;\n"
    "}\n";

snapshot::DebugSnapshot gcd_snapshot() {
  auto snap = snapshot::capture(kBuggyGcd, {"gcd", {Value::integer(12), Value::integer(8)}}, {},
                                snapshot::StopRule::at_raise());
  snap.problem = ProblemSpec::unexpected_exception("gcd", 4, "DivisionByZero");
  return snap;
}

const char* kSkippedFirst =
    "fn main() {\n"
    "    let xs = [3, 1, 2];\n"
    "    let total = 0;\n"
    "    for i in 1..3 {\n"
    "        total = total + xs[i];\n"
    "    }\n"
    "    assert(total == 6);\n"
    "    return total;\n"
    "}\n";

snapshot::DebugSnapshot skipped_snapshot() {
  auto snap = snapshot::capture(kSkippedFirst, {"main", {}}, {}, snapshot::StopRule::at_raise());
  snap.problem = ProblemSpec::variable_wrong_value("main", "total", Value::integer(3), Value::integer(6));
  return snap;
}

ValidationResult with_score(bool resolved, bool clean, bool out, double sim, int penalty) {
  ValidationResult r;
  r.resolved = resolved;
  r.clean_completion = clean;
  r.output_match = out;
  r.similarity = sim;
  r.size_penalty = penalty;
  r.score = validate::compute_score(resolved, clean, out, sim, penalty);
  return r;
}

}  // namespace

TEST_CASE("bit-parallel lcs agrees with the quadratic table") {
  std::mt19937 rng(7);
  for (int round = 0; round < 400; ++round) {
    std::size_t n = rng() % 200, m = rng() % 200;
    int alphabet = 1 + static_cast<int>(rng() % 6);
    std::vector<int> a(n), b(m);
    for (auto& x : a) x = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
    for (auto& x : b) x = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
    REQUIRE(validate::lcs_length(a, b) == lcs_oracle(a, b));
    CHECK(validate::lcs_length(b, a) == lcs_oracle(a, b));
  }
}

TEST_CASE("similarity basics") {
  auto p = lang::parse(kBuggyGcd);
  auto t = interp::execute(p, {"gcd", {Value::integer(12), Value::integer(8)}});
  CHECK(validate::trace_similarity(t, t) == 1.0);
  interp::ExecutionTrace empty;
  CHECK(validate::trace_similarity(t, empty) == 0.0);
  CHECK(validate::trace_similarity(empty, t) == 0.0);
}

TEST_CASE("flipped branch on a seven statement run") {
  const char* src =
      "fn main(x) {\n"
      "    let y = 0;\n"
      "    if (x > 0) {\n"
      "        y = 1;\n"
      "    } else {\n"
      "        y = 2;\n"
      "    }\n"
      "    y = y + 1;\n"
      "    print(y);\n"
      "    y = y * 2;\n"
      "    return y;\n"
      "}\n";
  auto p = lang::parse(src);
  auto a = interp::execute(p, {"main", {Value::integer(1)}});
  auto b = interp::execute(p, {"main", {Value::integer(-1)}});
  REQUIRE(validate::statement_projection(a).size() == 7);
  // Oracle by hand: the runs differ only at line 4 versus line 6.
  CHECK(validate::trace_similarity(a, b) == doctest::Approx(6.0 / 7.0));
  CHECK(validate::trace_similarity(a, b) == doctest::Approx(similarity_oracle(a, b)));
}

TEST_CASE("similarity is symmetric and matches the oracle on random runs") {
  for (unsigned seed = 1; seed <= 60; ++seed) {
    auto g = testing::generate_program(seed);
    interp::RuntimeLimits limits;
    limits.step_budget = 1500;
    auto t = interp::execute(g.program, g.entry, limits);
    faultloc::RepairLocation loc;
    loc.function = "main";
    loc.line = g.program.find_function("main")->line + 1;
    auto candidates = patch::generate_local(g.program, loc, nullptr, 10);
    for (const auto& c : candidates) {
      auto u = interp::execute(patch::apply_patch(g.program, c), g.entry, limits);
      double s = validate::trace_similarity(t, u);
      CHECK(s == validate::trace_similarity(u, t));
      CHECK(s == doctest::Approx(similarity_oracle(t, u)));
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("long runs are compared on a window around the first divergence") {
  const char* src =
      "fn main(n, k) {\n"
      "    let s = 0;\n"
      "    for i in 0..n {\n"
      "        if (i == k) {\n"
      "            s = s - 1;\n"
      "        }\n"
      "        s = s + 1;\n"
      "    }\n"
      "    return s;\n"
      "}\n";
  auto p = lang::parse(src);
  interp::RuntimeLimits limits;
  limits.step_budget = 1000000;
  auto a = interp::execute(p, {"main", {Value::integer(6000), Value::integer(-1)}}, limits);
  auto b = interp::execute(p, {"main", {Value::integer(6000), Value::integer(3000)}}, limits);
  auto pa = validate::statement_projection(a);
  auto pb = validate::statement_projection(b);
  REQUIRE(pa.size() > validate::kSimilarityWindowThreshold);
  std::size_t d = 0;
  while (pa[d] == pb[d]) ++d;
  // Oracle: the quadratic table over the same windows.
  std::map<std::pair<std::string, int>, int> ids;
  auto window = [&](const auto& v) {
    std::vector<int> out;
    for (std::size_t i = d - validate::kWindowBefore; i < std::min(v.size(), d + validate::kWindowAfter); ++i)
      out.push_back(ids.emplace(v[i], static_cast<int>(ids.size())).first->second);
    return out;
  };
  auto wa = window(pa), wb = window(pb);
  double expect = static_cast<double>(lcs_oracle(wa, wb)) / static_cast<double>(std::max(wa.size(), wb.size()));
  CHECK(validate::trace_similarity(a, b) == doctest::Approx(expect));
  CHECK(expect < 1.0);
}

TEST_CASE("score formula and gate dominance") {
  CHECK(with_score(true, true, true, 1.0, 12).score == 1000 + 100 + 50 + 100 - 12);
  CHECK(with_score(false, false, false, 0.444, 0).score == 44);
  std::mt19937 rng(3);
  for (int i = 0; i < 20000; ++i) {
    auto r = with_score(true, rng() % 2, rng() % 2, (rng() % 1001) / 1000.0,
                        static_cast<int>(rng() % (validate::kMaxSizePenalty + 1)));
    auto u = with_score(false, rng() % 2, rng() % 2, (rng() % 1001) / 1000.0,
                        static_cast<int>(rng() % (validate::kMaxSizePenalty + 1)));
    REQUIRE(r.score > u.score);
  }
}

TEST_CASE("size penalty counts edits and changed tokens") {
  auto p = lang::parse(kBuggyGcd);
  auto flip = single(Edit::replace_expr(ref("gcd", 2), {0}, lang::parse_expression("b != 0")));
  // `true` out, `b != 0` in: four tokens.
  CHECK(validate::size_penalty(p, patch::apply_patch(p, flip), flip) == 10 + 4);
  std::string big = "0";
  for (int i = 0; i < 400; ++i) big += " + b";
  auto huge = single(Edit::replace_expr(ref("gcd", 2), {0}, lang::parse_expression("b != " + big)));
  CHECK(validate::size_penalty(p, patch::apply_patch(p, huge), huge) == validate::kMaxSizePenalty);
}

TEST_CASE("the original run does not resolve its own symptom") {
  validate::Validator v(gcd_snapshot());
  CHECK_FALSE(validate::symptom_resolved(v.problem(), v.original_trace()));
  validate::Validator w(skipped_snapshot());
  CHECK_FALSE(validate::symptom_resolved(w.problem(), w.original_trace()));
}

TEST_CASE("symptom checks per kind") {
  auto p = lang::parse(kSkippedFirst);
  auto t = interp::execute(p, {"main", {}});
  CHECK(validate::symptom_resolved(ProblemSpec::unexpected_exception("main", 7, "IndexOutOfBounds"), t));
  CHECK_FALSE(validate::symptom_resolved(ProblemSpec::unexpected_exception("main", 7, "AssertionFailure"), t));
  CHECK_FALSE(validate::symptom_resolved(ProblemSpec::line_should_not_execute("main", 5), t));
  CHECK(validate::symptom_resolved(ProblemSpec::line_should_not_execute("main", 8), t));
  CHECK(validate::symptom_resolved(ProblemSpec::variable_wrong_value("main", "total", Value::integer(4)), t));
  CHECK_FALSE(validate::symptom_resolved(ProblemSpec::variable_wrong_value("main", "nope", Value::integer(4)), t));

  // A statement a patch adds on a forbidden line does not count.
  Patch ins = single(Edit::insert_before(ref("main", 8), lang::parse_statement("print(1);")));
  Patch del = single(Edit::remove(ref("main", 7)));
  del.edits.push_back(ins.edits[0]);
  auto q = patch::apply_patch(p, del);
  auto tq = interp::execute(q, {"main", {}});
  CHECK(validate::symptom_resolved(ProblemSpec::line_should_not_execute("main", 7), tq, &q));

  interp::ExecutionTrace budget = t;
  budget.outcome.kind = interp::OutcomeKind::BudgetExceeded;
  CHECK_FALSE(validate::symptom_resolved(ProblemSpec::line_should_not_execute("main", 99), budget));
}

TEST_CASE("masking the assert does not fix a wrong value") {
  validate::Validator v(skipped_snapshot());
  auto masked = v.validate(single(Edit::remove(ref("main", 7))));
  CHECK(masked.clean_completion);
  CHECK_FALSE(masked.resolved);
  auto fixed = v.validate(single(Edit::replace_expr(ref("main", 4), {0}, lang::parse_expression("0"))));
  CHECK(fixed.resolved);
  CHECK(fixed.clean_completion);
  CHECK(fixed.score > masked.score);
}

TEST_CASE("validate the gcd fix and a no-op rewrite") {
  validate::Validator v(gcd_snapshot());
  auto fix = single(Edit::replace_expr(ref("gcd", 2), {0}, lang::parse_expression("b != 0")));
  auto r = v.validate(fix);
  CHECK(r.resolved);
  CHECK(r.clean_completion);
  CHECK(r.output_match);
  CHECK(r.outcome.value == Value::integer(4));
  CHECK(r.score == validate::compute_score(true, true, true, r.similarity, r.size_penalty));
  auto noop = v.validate(single(Edit::replace_expr(ref("gcd", 4), {0}, lang::parse_expression("a % b"))));
  CHECK_FALSE(noop.resolved);
  CHECK(noop.similarity == 1.0);
  CHECK(v.validate(fix) == r);
  CHECK_THROWS_AS(v.validate(single(Edit::remove(ref("gcd", 30)))), patch::ApplyError);
  CHECK_FALSE(v.validate_or_error(single(Edit::remove(ref("gcd", 30)))).error.empty());
}

TEST_CASE("patched runs get a budget scaled to the original run") {
  validate::Validator v(gcd_snapshot());
  REQUIRE(v.original_trace().step_count * validate::kCandidateStepFactor < validate::kMinCandidateSteps);
  CHECK(v.candidate_limits().step_budget == validate::kMinCandidateSteps);
  // Without the update of b the loop never ends.
  auto r = v.validate(single(Edit::remove(ref("gcd", 4))));
  CHECK(r.outcome.kind == interp::OutcomeKind::BudgetExceeded);
  CHECK(r.steps == validate::kMinCandidateSteps);
  CHECK_FALSE(r.resolved);

  auto snap = gcd_snapshot();
  snap.limits.step_budget = 500;
  validate::Validator tight(snap);
  CHECK(tight.candidate_limits().step_budget == 500);
  CHECK(tight.validate(single(Edit::remove(ref("gcd", 4)))).steps == 500);
}

TEST_CASE("parallel validation matches sequential order") {
  validate::Validator v(gcd_snapshot());
  std::vector<Patch> all;
  for (int line : {2, 3, 4, 5, 7}) {
    faultloc::RepairLocation loc;
    loc.function = "gcd";
    loc.line = line;
    for (auto& c : patch::generate_local(v.program(), loc, &v.original_trace())) all.push_back(c);
  }
  all.push_back(single(Edit::remove(ref("gcd", 30))));
  auto seq = v.validate_all(all, 1);
  auto par = v.validate_all(all, 4);
  REQUIRE(seq.size() == all.size());
  CHECK(seq == par);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) CHECK(seq[i] == v.validate(all[i]));
  CHECK_FALSE(seq.back().error.empty());

  std::vector<RankedEntry> entries;
  for (std::size_t i = 0; i < all.size(); ++i) entries.push_back({all[i], seq[i]});
  auto ranked = validate::rank(entries);
  REQUIRE_FALSE(ranked.entries.empty());
  CHECK(ranked.entries.size() <= 5);
  for (const auto& e : ranked.entries) {
    auto q = patch::apply_patch(v.program(), e.patch);
    CHECK(validate::symptom_resolved(v.problem(), interp::execute(q, v.snapshot().entry), &q));
  }
  for (std::size_t i = 0; i + 1 < ranked.entries.size(); ++i)
    CHECK_FALSE(validate::ranks_before(ranked.entries[i + 1], ranked.entries[i]));
}

TEST_CASE("rank filtering and tie-breaks") {
  Patch a = single(Edit::remove(ref("m", 1)), "b-strategy");
  Patch b = single(Edit::remove(ref("m", 2)), "a-strategy");
  CHECK(validate::rank({{a, with_score(false, true, true, 1, 0)}}).entries.empty());
  auto big = with_score(true, true, true, 1, 20);
  auto small = with_score(true, true, true, 1, 10);
  big.score = small.score;
  auto r = validate::rank({{a, big}, {b, small}});
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].result.size_penalty == 10);
  auto same = validate::rank({{a, small}, {b, small}});
  CHECK(same.entries[0].patch.strategy == "a-strategy");
  std::vector<RankedEntry> many(9, {a, small});
  CHECK(validate::rank(many, 3).entries.size() == 3);
  CHECK_THROWS(validate::rank(many, 0));
}

TEST_CASE("result json round trip and report record") {
  validate::Validator v(gcd_snapshot());
  auto fix = single(Edit::replace_expr(ref("gcd", 2), {0}, lang::parse_expression("b != 0")));
  auto r = v.validate(fix);
  CHECK(validate::result_from_json(nlohmann::json::parse(validate::result_to_json(r).dump())) == r);
  auto raised = v.validate(single(Edit::replace_expr(ref("gcd", 4), {0}, lang::parse_expression("a / b"))));
  CHECK(validate::result_from_json(validate::result_to_json(raised)) == raised);
  auto rec = validate::validation_record(v.program(), fix, r);
  CHECK(rec["strategy"] == "test");
  CHECK(rec["relationship"].is_null());
  CHECK(rec["diff"].get<std::string>().find("-    while (true) {\n+    while (b != 0) {\n") != std::string::npos);
}
