#include "tracefix/validate/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>

#include "tracefix/interp/interpreter.hpp"
#include "tracefix/lang/lexer.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"
#include "tracefix/patch/diff.hpp"

namespace tracefix::validate {

using interp::EventKind;
using snapshot::ProblemKind;

int compute_score(bool resolved, bool clean, bool output_match, double similarity, int size_penalty) {
  return 1000 * resolved + 100 * clean + 50 * output_match +
         static_cast<int>(std::lround(100 * similarity)) - size_penalty;
}

bool symptom_resolved(const snapshot::ProblemSpec& problem, const interp::ExecutionTrace& t,
                      const lang::Program* patched_program) {
  if (t.outcome.kind == interp::OutcomeKind::BudgetExceeded) return false;
  switch (problem.kind) {
    case ProblemKind::UnexpectedException:
      for (const auto& e : t.events)
        if (e.kind == EventKind::Raise && e.name == problem.exception && e.function == problem.function &&
            e.line == problem.line)
          return false;
      return true;
    case ProblemKind::LineShouldNotExecute: {
      std::optional<lang::ProgramIndex> index;
      if (patched_program) index.emplace(*patched_program);
      for (const auto& e : t.events) {
        if (e.kind != EventKind::StmtEnter || e.function != problem.function || e.line != problem.line) continue;
        if (index && index->contains(e.stmt_id) && index->stmt(e.stmt_id).synthetic) continue;
        return false;
      }
      return true;
    }
    case ProblemKind::VariableWrongValue: {
      auto functions = interp::frame_functions(t);
      const interp::Value* last = nullptr;
      for (const auto& e : t.events)
        if (e.kind == EventKind::VarWrite && e.name == problem.name && functions[e.frame] == problem.function)
          last = &e.value;
      if (!last || *last == problem.bad_value) return false;
      return !problem.expected_value || *last == *problem.expected_value;
    }
  }
  return false;
}

std::size_t lcs_length(const std::vector<int>& a, const std::vector<int>& b) {
  // Bit-parallel row update over the positions of `a`.
  if (a.empty() || b.empty()) return 0;
  const std::size_t words = (a.size() + 63) / 64;
  std::map<int, std::vector<std::uint64_t>> match;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& m = match[a[i]];
    if (m.empty()) m.assign(words, 0);
    m[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  std::vector<std::uint64_t> s(words, ~std::uint64_t{0});
  std::vector<std::uint64_t> u(words);
  for (int c : b) {
    auto it = match.find(c);
    if (it == match.end()) continue;
    const auto& m = it->second;
    unsigned carry = 0, borrow = 0;
    for (std::size_t w = 0; w < words; ++w) {
      u[w] = s[w] & m[w];
      std::uint64_t sum = s[w] + u[w];
      unsigned c1 = sum < s[w];
      std::uint64_t sum2 = sum + carry;
      unsigned c2 = sum2 < sum;
      std::uint64_t diff = s[w] - u[w];
      unsigned b1 = s[w] < u[w];
      std::uint64_t diff2 = diff - borrow;
      unsigned b2 = diff < borrow;
      carry = c1 | c2;
      borrow = b1 | b2;
      s[w] = sum2 | diff2;
    }
  }
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(s[i / 64] >> (i % 64) & 1)) ++zeros;
  return zeros;
}

std::vector<std::pair<std::string, int>> statement_projection(const interp::ExecutionTrace& trace) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::StmtEnter) out.emplace_back(e.function, e.line);
  return out;
}

double trace_similarity(const interp::ExecutionTrace& ta, const interp::ExecutionTrace& tb) {
  auto pa = statement_projection(ta);
  auto pb = statement_projection(tb);
  if (pa == pb) return 1.0;
  if (pa.empty() || pb.empty()) return 0.0;
  std::map<std::pair<std::string, int>, int> ids;
  auto intern = [&](const auto& p) {
    std::vector<int> out;
    out.reserve(p.size());
    for (const auto& key : p) out.push_back(ids.emplace(key, static_cast<int>(ids.size())).first->second);
    return out;
  };
  std::vector<int> a = intern(pa), b = intern(pb);
  if (std::max(a.size(), b.size()) > kSimilarityWindowThreshold) {
    std::size_t d = 0;
    while (d < a.size() && d < b.size() && a[d] == b[d]) ++d;
    std::size_t lo = d > kWindowBefore ? d - kWindowBefore : 0;
    auto window = [&](const std::vector<int>& v) {
      std::size_t from = std::min(lo, v.size());
      std::size_t to = std::min(d + kWindowAfter, v.size());
      return std::vector<int>(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(to));
    };
    a = window(a);
    b = window(b);
    if (a == b) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
  }
  // Symmetric by construction: the longer sequence is the bit vector.
  const auto& longer = a.size() >= b.size() ? a : b;
  const auto& shorter = a.size() >= b.size() ? b : a;
  return static_cast<double>(lcs_length(longer, shorter)) / static_cast<double>(longer.size());
}

int size_penalty(const lang::Program& before, const lang::Program& after, const patch::Patch& patch) {
  std::map<std::string, int> ids;
  auto tokens = [&](const lang::Program& p) {
    std::vector<int> out;
    for (const auto& t : lang::tokenize(lang::pretty_print(p)))
      if (t.kind != lang::TokenKind::End)
        out.push_back(ids.emplace(std::to_string(static_cast<int>(t.kind)) + t.text, static_cast<int>(ids.size()))
                          .first->second);
    return out;
  };
  auto a = tokens(before), b = tokens(after);
  std::size_t common = lcs_length(a, b);
  long long changed = static_cast<long long>(a.size() + b.size() - 2 * common);
  long long penalty = 10LL * static_cast<long long>(patch.edits.size()) + changed;
  return static_cast<int>(std::min<long long>(penalty, kMaxSizePenalty));
}

namespace {

std::vector<std::string> outputs_until(const interp::ExecutionTrace& t, int stop) {
  std::vector<std::string> out;
  for (const auto& e : t.events) {
    if (e.idx > stop) break;
    if (e.kind == EventKind::Out) out.push_back(e.text);
  }
  return out;
}

}  // namespace

Validator::Validator(snapshot::DebugSnapshot snap, std::optional<interp::RuntimeLimits> limits)
    : snapshot_(std::move(snap)),
      limits_(limits.value_or(snapshot_.limits)),
      program_(lang::parse(snapshot_.program_source)),
      original_(interp::execute(program_, snapshot_.entry, limits_)) {
  problem_ = snapshot_.problem ? *snapshot_.problem : snapshot::derive_symptom(original_);
  original_output_ = outputs_until(original_, snapshot_.stop_idx);
  candidate_limits_ = limits_;
  candidate_limits_.step_budget =
      std::min(limits_.step_budget, std::max(kMinCandidateSteps, kCandidateStepFactor * original_.step_count));
}

ValidationResult Validator::validate_program(const lang::Program& patched, const patch::Patch& p,
                                             interp::ExecutionTrace* trace_out) const {
  ValidationResult r;
  auto trace = interp::execute(patched, snapshot_.entry, candidate_limits_);
  r.outcome = trace.outcome;
  r.steps = trace.step_count;
  r.resolved = symptom_resolved(problem_, trace, &patched);
  r.clean_completion = trace.outcome.kind == interp::OutcomeKind::Completed;
  std::vector<std::string> out;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::Out) {
      out.push_back(e.text);
      if (out.size() == original_output_.size()) break;
    }
  r.output_match = out == original_output_;
  r.similarity = trace_similarity(original_, trace);
  r.size_penalty = size_penalty(program_, patched, p);
  r.score = compute_score(r.resolved, r.clean_completion, r.output_match, r.similarity, r.size_penalty);
  if (trace_out) *trace_out = std::move(trace);
  return r;
}

ValidationResult Validator::validate(const patch::Patch& p) const {
  return validate_program(patch::apply_patch(program_, p), p);
}

ValidationResult Validator::validate_or_error(const patch::Patch& p) const {
  try {
    return validate(p);
  } catch (const patch::ApplyError& e) {
    ValidationResult r;
    r.error = e.what();
    r.size_penalty = kMaxSizePenalty;
    r.score = compute_score(false, false, false, 0, r.size_penalty);
    return r;
  }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned w = workers > 0 ? static_cast<unsigned>(workers) : std::max(1u, std::thread::hardware_concurrency());
  w = static_cast<unsigned>(std::min<std::size_t>(w, n));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  if (w <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

std::vector<ValidationResult> Validator::validate_all(const std::vector<patch::Patch>& patches,
                                                      int workers) const {
  std::vector<ValidationResult> out(patches.size());
  parallel_for(patches.size(), workers, [&](std::size_t i) { out[i] = validate_or_error(patches[i]); });
  return out;
}

bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.result.score != b.result.score) return a.result.score > b.result.score;
  if (a.result.size_penalty != b.result.size_penalty) return a.result.size_penalty < b.result.size_penalty;
  return a.patch.strategy < b.patch.strategy;
}

RankedPatchList rank(const std::vector<RankedEntry>& results, int k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  RankedPatchList out;
  out.k = k;
  for (const auto& r : results)
    if (r.result.resolved) out.entries.push_back(r);
  std::stable_sort(out.entries.begin(), out.entries.end(), ranks_before);
  if (static_cast<int>(out.entries.size()) > k) out.entries.resize(static_cast<std::size_t>(k));
  return out;
}

namespace {

nlohmann::json outcome_to_json(const interp::Outcome& o) {
  nlohmann::json j{{"kind", interp::to_string(o.kind)}};
  if (o.kind == interp::OutcomeKind::Completed) j["value"] = snapshot::value_to_json(o.value);
  if (o.kind == interp::OutcomeKind::Raised) {
    j["raise_kind"] = o.raise_kind;
    j["message"] = o.message;
    j["function"] = o.function;
    j["line"] = o.line;
  }
  return j;
}

interp::Outcome outcome_from_json(const nlohmann::json& j) {
  interp::Outcome o;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "Completed") {
    o.kind = interp::OutcomeKind::Completed;
    o.value = snapshot::value_from_json(j.at("value"));
  } else if (kind == "Raised") {
    o.kind = interp::OutcomeKind::Raised;
    o.raise_kind = j.at("raise_kind").get<std::string>();
    o.message = j.at("message").get<std::string>();
    o.function = j.at("function").get<std::string>();
    o.line = j.at("line").get<int>();
  } else if (kind == "BudgetExceeded") {
    o.kind = interp::OutcomeKind::BudgetExceeded;
  } else {
    throw snapshot::SchemaError("unknown outcome kind '" + kind + "'");
  }
  return o;
}

}  // namespace

nlohmann::json result_to_json(const ValidationResult& r) {
  nlohmann::json j{{"resolved", r.resolved},
                   {"clean_completion", r.clean_completion},
                   {"output_match", r.output_match},
                   {"similarity", r.similarity},
                   {"size_penalty", r.size_penalty},
                   {"score", r.score},
                   {"outcome", outcome_to_json(r.outcome)},
                   {"steps", r.steps}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ValidationResult result_from_json(const nlohmann::json& j) {
  try {
    ValidationResult r;
    r.resolved = j.at("resolved").get<bool>();
    r.clean_completion = j.at("clean_completion").get<bool>();
    r.output_match = j.at("output_match").get<bool>();
    r.similarity = j.at("similarity").get<double>();
    r.size_penalty = j.at("size_penalty").get<int>();
    r.score = j.at("score").get<int>();
    r.outcome = outcome_from_json(j.at("outcome"));
    r.steps = j.at("steps").get<long long>();
    r.error = j.value("error", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw snapshot::SchemaError(std::string("validation result: ") + e.what());
  }
}

nlohmann::json validation_record(const lang::Program& program, const patch::Patch& p,
                                 const ValidationResult& r) {
  nlohmann::json j{{"strategy", p.strategy},
                   {"relationship", p.relationship ? nlohmann::json(patch::to_string(*p.relationship))
                                                   : nlohmann::json(nullptr)},
                   {"summary", patch::describe(p, &program)},
                   {"patch", patch::patch_to_json(p)},
                   {"validation", result_to_json(r)}};
  if (r.error.empty())
    j["diff"] = patch::unified_diff(lang::pretty_print(program), lang::pretty_print(patch::apply_patch(program, p)));
  return j;
}

}  // namespace tracefix::validate
