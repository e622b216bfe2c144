// Multi-location repair: iterative repair with re-localization, sibling
// co-change, and definition/setup/wrap pattern generators.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/faultloc/localize.hpp"
#include "tracefix/patch/edit.hpp"
#include "tracefix/validate/validate.hpp"

namespace tracefix::global {

struct SearchConfig {
  int beam_width = 5;
  int max_depth = 3;
  int per_round_candidates = 200;
  int total_validation_budget = 2000;

  // Throws std::invalid_argument unless every field is positive.
  void check() const;
};

struct SearchResult {
  std::vector<patch::Patch> patches;
  // The validation budget ran out before the search finished.
  bool budget_exhausted = false;
  int validations = 0;
};

// Beam search over partial programs. Each round localizes the current
// symptom of every beam state and validates its single-edit candidates.
// A candidate that clears the original symptom and completes is a result;
// otherwise it joins the next beam when it makes progress:
//   - it clears the state's symptom but raises something else (the new
//     raise becomes that state's symptom), or
//   - the run gets further before showing the symptom (more statements
//     before it; for a wrong integer value, a value closer to the expected
//     one).
// The beam keeps the states that closed most of their remaining distance,
// then the best validation scores.
// Multi-edit results are tagged FU when a later edit targets a statement
// whose read or written values an earlier edit changed, else ONPF when some round
// traded the symptom for a new failure, else DIF.
SearchResult iterative_repair(const validate::Validator& validator, const SearchConfig& config = {},
                              int workers = 0);

struct Sibling {
  faultloc::RepairLocation location;
  double similarity = 0;
  // Seed identifier -> sibling identifier, from the token alignment.
  std::map<std::string, std::string> mapping;
};

inline constexpr double kDefaultSiblingThreshold = 0.8;

// Statements whose identifier-abstracted header tokens are within the
// normalized edit similarity `threshold` of the seed's, most similar
// first. Throws std::invalid_argument unless threshold is in (0, 1].
std::vector<Sibling> sibling_locations(const lang::Program& program, const faultloc::RepairLocation& seed,
                                       double threshold = kDefaultSiblingThreshold);

// Normalized token edit similarity after identifier abstraction.
double statement_similarity(const lang::Stmt& a, const lang::Stmt& b);

class TransplantFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The seed's edit moved to the sibling, identifiers renamed through the
// mapping. Throws TransplantFailed.
patch::Edit transplant_edit(const lang::Program& program, const patch::Edit& edit, const Sibling& sibling);

struct TransplantFailure {
  lang::StmtRef sibling;
  std::string reason;
};

struct SimultaneousResult {
  std::vector<patch::Patch> patches;
  std::vector<TransplantFailure> failures;
};

// Seed edit plus its transplants as one RIF patch. Siblings that cannot
// take the edit are skipped and reported. Throws std::invalid_argument for
// a multi-edit seed.
SimultaneousResult simultaneous_repair(const lang::Program& program, const patch::Patch& seed_patch,
                                       const std::vector<Sibling>& siblings);

struct PatternContext {
  const interp::ExecutionTrace* trace = nullptr;
  // Statements on the slice (the ranked locations).
  std::vector<faultloc::RepairLocation> slice;
};

inline constexpr int kMaxPatternPatches = 200;

// DU: `let v = E;` before an earlier statement of the block, E a compound
// subexpression of the location, and E replaced by v at the location.
// SU: `x = E;` before the location, alone or with a use of x substituted
// into another slice statement.
// OA: guard wraps of 1-3 statements, alone or with a default assignment of
// a variable the wrapped code writes.
std::vector<patch::Patch> pattern_patches(const lang::Program& program, const faultloc::RepairLocation& location,
                                          const PatternContext& context, int cap = kMaxPatternPatches);

struct RunAllOptions {
  SearchConfig search;
  int workers = 0;
  // Local candidates per location that seed sibling transplants.
  int transplant_seeds = 40;
};

struct RunAllResult {
  std::vector<patch::Patch> patches;
  bool budget_exhausted = false;
};

// Local, pattern, simultaneous and iterative generators as concurrent
// tasks. Output is sorted by strategy name then generation index and holds
// no two patches with the same edit set.
RunAllResult run_all_generators(const validate::Validator& validator, const RunAllOptions& options = {});

// Merge step of run_all_generators, exposed for testing: stable sort by
// strategy, then deduplication by edit set.
std::vector<patch::Patch> merge_candidates(std::vector<std::vector<patch::Patch>> outputs);

// Relationship for a multi-edit patch assembled by the iterative search.
patch::Relationship iterative_relationship(bool later_edit_fixes_disturbed, bool new_failure_round);

// The snapshot the faultloc module sees for a validator's run.
snapshot::DebugSnapshot localization_snapshot(const validate::Validator& validator);

}  // namespace tracefix::global
