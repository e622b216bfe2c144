// Patch validation by simulated re-execution, and ranking of the results.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tracefix/interp/trace.hpp"
#include "tracefix/lang/ast.hpp"
#include "tracefix/patch/edit.hpp"
#include "tracefix/snapshot/snapshot.hpp"

namespace tracefix::validate {

inline constexpr int kDefaultTopK = 5;
inline constexpr int kMaxSizePenalty = 500;
// Beyond this many statements per run, similarity is computed on a window
// around the first divergence.
inline constexpr std::size_t kSimilarityWindowThreshold = 10000;
inline constexpr std::size_t kWindowBefore = 100;
inline constexpr std::size_t kWindowAfter = 900;
// Patched runs stop after max(kMinCandidateSteps, kCandidateStepFactor x
// original steps), never beyond the snapshot's own budget.
inline constexpr long long kMinCandidateSteps = 10000;
inline constexpr long long kCandidateStepFactor = 100;

struct ValidationResult {
  bool resolved = false;
  bool clean_completion = false;
  bool output_match = false;
  double similarity = 0;
  int size_penalty = 0;
  int score = 0;
  // Outcome of the patched run.
  interp::Outcome outcome;
  long long steps = 0;
  // Set when the patch could not be applied; all flags are then false.
  std::string error;

  friend bool operator==(const ValidationResult&, const ValidationResult&) = default;
};

int compute_score(bool resolved, bool clean, bool output_match, double similarity, int size_penalty);

// Whether `patched_trace` is free of the symptom. With `patched_program`,
// statements added by a patch do not count as executing a forbidden line.
bool symptom_resolved(const snapshot::ProblemSpec& problem, const interp::ExecutionTrace& patched_trace,
                      const lang::Program* patched_program = nullptr);

// Length of a longest common subsequence.
std::size_t lcs_length(const std::vector<int>& a, const std::vector<int>& b);

// (function, line) sequence of the StmtEnter events.
std::vector<std::pair<std::string, int>> statement_projection(const interp::ExecutionTrace& trace);

double trace_similarity(const interp::ExecutionTrace& a, const interp::ExecutionTrace& b);

// 10 per edit plus the number of tokens removed or added, capped.
int size_penalty(const lang::Program& before, const lang::Program& after, const patch::Patch& patch);

// Validates patches against one snapshot. Immutable after construction,
// so one instance may serve concurrent validations.
class Validator {
 public:
  // Uses the snapshot's limits unless `limits` is given. Without a problem
  // in the snapshot, the symptom is derived from the original run.
  explicit Validator(snapshot::DebugSnapshot snapshot,
                     std::optional<interp::RuntimeLimits> limits = std::nullopt);

  const snapshot::DebugSnapshot& snapshot() const { return snapshot_; }
  const lang::Program& program() const { return program_; }
  const interp::ExecutionTrace& original_trace() const { return original_; }
  const snapshot::ProblemSpec& problem() const { return problem_; }
  const interp::RuntimeLimits& limits() const { return limits_; }
  const interp::RuntimeLimits& candidate_limits() const { return candidate_limits_; }

  // Throws patch::ApplyError.
  ValidationResult validate(const patch::Patch& patch) const;
  // Validation of an already patched program; the patched run is stored in
  // `trace` when given.
  ValidationResult validate_program(const lang::Program& patched, const patch::Patch& patch,
                                    interp::ExecutionTrace* trace = nullptr) const;
  // Like validate, but apply failures are reported in `error`.
  ValidationResult validate_or_error(const patch::Patch& patch) const;

  // Results in input order, computed on at most `workers` threads
  // (0 = available cores).
  std::vector<ValidationResult> validate_all(const std::vector<patch::Patch>& patches,
                                             int workers = 0) const;

 private:
  snapshot::DebugSnapshot snapshot_;
  interp::RuntimeLimits limits_;
  interp::RuntimeLimits candidate_limits_;
  lang::Program program_;
  interp::ExecutionTrace original_;
  snapshot::ProblemSpec problem_;
  std::vector<std::string> original_output_;
};

// Calls fn(0) .. fn(n - 1) on at most `workers` threads (0 = available
// cores). fn must be safe to call concurrently for distinct indices.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct RankedEntry {
  patch::Patch patch;
  ValidationResult result;
};

struct RankedPatchList {
  std::vector<RankedEntry> entries;
  int k = kDefaultTopK;
};

RankedPatchList rank(const std::vector<RankedEntry>& results, int k = kDefaultTopK);

// Ordering used by rank(): score, then size penalty, then strategy.
bool ranks_before(const RankedEntry& a, const RankedEntry& b);

nlohmann::json result_to_json(const ValidationResult& result);
ValidationResult result_from_json(const nlohmann::json& j);

// One report record: strategy, relationship, score components and the
// unified diff of the pretty-printed sources.
nlohmann::json validation_record(const lang::Program& program, const patch::Patch& patch,
                                 const ValidationResult& result);

}  // namespace tracefix::validate
