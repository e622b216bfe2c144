#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tracefix/global/global.hpp"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"
#include "tracefix/patch/local.hpp"

namespace tracefix::global {

using interp::EventKind;
using snapshot::ProblemKind;

void SearchConfig::check() const {
  if (beam_width < 1 || max_depth < 1 || per_round_candidates < 1 || total_validation_budget < 1)
    throw std::invalid_argument("search configuration values must be positive");
}

patch::Relationship iterative_relationship(bool later_edit_fixes_disturbed, bool new_failure_round) {
  if (later_edit_fixes_disturbed) return patch::Relationship::FU;
  if (new_failure_round) return patch::Relationship::ONPF;
  return patch::Relationship::DIF;
}

snapshot::DebugSnapshot localization_snapshot(const validate::Validator& v) {
  snapshot::DebugSnapshot snap = v.snapshot();
  snap.problem = v.problem();
  return snap;
}

namespace {

constexpr double kNoProgress = -std::numeric_limits<double>::infinity();

// How far a run gets before showing `problem`; larger is better.
double progress_metric(const snapshot::ProblemSpec& problem, const interp::ExecutionTrace& t) {
  if (t.outcome.kind == interp::OutcomeKind::BudgetExceeded) return kNoProgress;
  if (problem.kind == ProblemKind::VariableWrongValue) {
    auto functions = interp::frame_functions(t);
    const interp::Value* last = nullptr;
    for (const auto& e : t.events)
      if (e.kind == EventKind::VarWrite && e.name == problem.name && functions[e.frame] == problem.function)
        last = &e.value;
    if (!last || !problem.expected_value || !last->is_int() || !problem.expected_value->is_int())
      return kNoProgress;
    return -std::fabs(static_cast<double>(last->as_int()) - static_cast<double>(problem.expected_value->as_int()));
  }
  double statements = 0;
  for (const auto& e : t.events) {
    bool symptom = problem.kind == ProblemKind::UnexpectedException
                       ? e.kind == EventKind::Raise && e.name == problem.exception &&
                             e.function == problem.function && e.line == problem.line
                       : e.kind == EventKind::StmtEnter && e.function == problem.function && e.line == problem.line;
    if (symptom) return statements;
    if (e.kind == EventKind::StmtEnter) ++statements;
  }
  return statements;
}

// Whether the run still shows `problem`. Unlike symptom_resolved, a
// wrong-value symptom whose variable is never written counts as gone, so a
// run that now fails earlier with a different raise is a new-failure step.
bool symptom_exhibited(const snapshot::ProblemSpec& problem, const interp::ExecutionTrace& t,
                       const lang::Program& program) {
  if (problem.kind != ProblemKind::VariableWrongValue) return !validate::symptom_resolved(problem, t, &program);
  auto functions = interp::frame_functions(t);
  const interp::Value* last = nullptr;
  for (const auto& e : t.events)
    if (e.kind == EventKind::VarWrite && e.name == problem.name && functions[e.frame] == problem.function)
      last = &e.value;
  if (!last) return false;
  return *last == problem.bad_value || (problem.expected_value && !(*last == *problem.expected_value));
}

// Per (non-synthetic) statement, in order: the values of the variables its
// header reads at each entry, and the values it writes.
std::map<lang::StmtRef, std::vector<std::string>> statement_values(const lang::Program& program,
                                                                   const interp::ExecutionTrace& t) {
  lang::ProgramIndex index(program);
  std::map<int, std::set<std::string>> reads;
  std::map<lang::StmtRef, std::vector<std::string>> out;
  std::map<int, int> current;  // frame -> stmt id
  std::map<int, std::map<std::string, std::string>> env;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::StmtEnter) {
      current[e.frame] = e.stmt_id;
      if (!index.contains(e.stmt_id) || index.stmt(e.stmt_id).synthetic) continue;
      auto it = reads.find(e.stmt_id);
      if (it == reads.end()) it = reads.emplace(e.stmt_id, lang::header_reads(index.stmt(e.stmt_id))).first;
      auto& seq = out[index.ref_of(e.stmt_id)];
      const auto& vars = env[e.frame];
      for (const auto& name : it->second) {
        auto v = vars.find(name);
        seq.push_back("r:" + name + "=" + (v == vars.end() ? "?" : v->second));
      }
      continue;
    }
    if (e.kind != EventKind::VarWrite) continue;
    env[e.frame][e.name] = e.value.literal();
    auto it = current.find(e.frame);
    if (it == current.end() || !index.contains(it->second) || index.stmt(it->second).synthetic) continue;
    out[index.ref_of(it->second)].push_back("w:" + e.name + "=" + e.value.literal());
  }
  return out;
}

std::set<lang::StmtRef> disturbed_statements(const lang::Program& before, const interp::ExecutionTrace& tb,
                                             const lang::Program& after, const interp::ExecutionTrace& ta,
                                             const lang::StmtRef& edited) {
  auto wb = statement_values(before, tb), wa = statement_values(after, ta);
  std::set<lang::StmtRef> out;
  for (const auto& [ref, values] : wa) {
    auto it = wb.find(ref);
    if (it != wb.end() && it->second != values && !(ref == edited)) out.insert(ref);
  }
  return out;
}

struct State {
  patch::Patch patch;
  lang::Program program;
  interp::ExecutionTrace trace;
  snapshot::ProblemSpec problem;
  bool new_failure_round = false;
  bool fixes_disturbed = false;
  // Statements each earlier edit disturbed.
  std::set<lang::StmtRef> disturbed;
  int score = 0;
  // Share of the parent's remaining distance this step removed; 1 for a
  // new-failure step.
  double gain = 0;
};

snapshot::DebugSnapshot state_snapshot(const validate::Validator& v, const State& s, bool root) {
  if (root) return localization_snapshot(v);
  snapshot::DebugSnapshot snap;
  snap.entry = v.snapshot().entry;
  snap.limits = v.limits();
  snap.problem = s.problem;
  int r = interp::raise_index(s.trace);
  snap.stop_idx = r >= 0 ? r : static_cast<int>(s.trace.events.size()) - 1;
  snap.stack = snapshot::stack_at(s.trace, snap.stop_idx);
  return snap;
}

// Round-robin over the ranked locations so every location contributes.
std::vector<patch::Patch> round_candidates(const State& s, const std::vector<faultloc::RepairLocation>& locs,
                                           int cap) {
  std::vector<std::vector<patch::Patch>> per;
  for (const auto& loc : locs) per.push_back(patch::generate_local(s.program, loc, &s.trace));
  std::vector<patch::Patch> out;
  for (std::size_t k = 0; static_cast<int>(out.size()) < cap; ++k) {
    bool any = false;
    for (auto& list : per)
      if (k < list.size()) {
        any = true;
        if (static_cast<int>(out.size()) < cap) out.push_back(list[k]);
      }
    if (!any) break;
  }
  return out;
}

struct Trial {
  bool usable = false;
  patch::Patch combined;
  lang::Program program;
  interp::ExecutionTrace trace;
  validate::ValidationResult result;
};

}  // namespace

SearchResult iterative_repair(const validate::Validator& v, const SearchConfig& config, int workers) {
  config.check();
  SearchResult out;
  State root;
  root.program = v.program();
  root.trace = v.original_trace();
  root.problem = v.problem();
  std::vector<State> beam{root};
  std::set<std::string> visited{lang::pretty_print(root.program)};

  for (int depth = 1; depth <= config.max_depth && !beam.empty(); ++depth) {
    std::vector<State> next;
    std::vector<patch::Patch> found;
    std::set<std::string> found_keys;
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const State& s = beam[b];
      const bool is_root = s.patch.edits.empty();
      std::vector<faultloc::RepairLocation> locs;
      try {
        locs = faultloc::localize(state_snapshot(v, s, is_root), s.trace, s.program);
      } catch (const faultloc::SymptomNotInTrace&) {
        continue;
      }
      auto candidates = round_candidates(s, locs, config.per_round_candidates);
      int remaining = config.total_validation_budget - out.validations;
      if (static_cast<int>(candidates.size()) > remaining) {
        candidates.resize(static_cast<std::size_t>(std::max(remaining, 0)));
        out.budget_exhausted = true;
      }
      out.validations += static_cast<int>(candidates.size());

      std::vector<Trial> trials(candidates.size());
      validate::parallel_for(candidates.size(), workers, [&](std::size_t i) {
        Trial& t = trials[i];
        try {
          lang::Program patched = patch::apply_patch(s.program, candidates[i]);
          t.combined = s.patch;
          t.combined.edits.insert(t.combined.edits.end(), candidates[i].edits.begin(), candidates[i].edits.end());
          t.combined.co_targeting = t.combined.edits.size() > 1;
          // The accumulated edits must reproduce the program from the original.
          if (lang::pretty_print(patch::apply_patch(v.program(), t.combined)) != lang::pretty_print(patched)) return;
          t.result = v.validate_program(patched, t.combined, &t.trace);
          t.program = std::move(patched);
          t.usable = true;
        } catch (const patch::ApplyError&) {
        }
      });

      for (std::size_t i = 0; i < trials.size(); ++i) {
        Trial& t = trials[i];
        if (!t.usable) continue;
        const patch::Edit& edit = candidates[i].edits[0];
        bool fixes_disturbed = s.fixes_disturbed || s.disturbed.count(edit.target) > 0;
        if (t.result.resolved && t.result.clean_completion) {
          patch::Patch p = t.combined;
          if (p.edits.size() == 1) {
            p = candidates[i];
          } else {
            p.strategy = "iterative";
            p.relationship = iterative_relationship(fixes_disturbed, s.new_failure_round);
            p.provenance = std::to_string(p.edits.size()) + " edits over " + std::to_string(depth) + " rounds";
          }
          if (found_keys.insert(patch::edit_set_key(p)).second) found.push_back(std::move(p));
          continue;
        }
        if (depth == config.max_depth) continue;
        bool cleared = !symptom_exhibited(s.problem, t.trace, t.program);
        State n;
        if (cleared && t.trace.outcome.kind == interp::OutcomeKind::Raised) {
          n.problem = snapshot::derive_symptom(t.trace);
          n.new_failure_round = true;
          n.gain = 1;
        } else if (double before = progress_metric(s.problem, s.trace), after = progress_metric(s.problem, t.trace);
                   !cleared && after > before) {
          n.problem = s.problem;
          n.new_failure_round = s.new_failure_round;
          n.gain = std::isinf(before) ? 1 : std::min(1.0, (after - before) / std::max(1.0, std::fabs(before)));
        } else {
          continue;
        }
        if (!visited.insert(lang::pretty_print(t.program)).second) continue;
        n.fixes_disturbed = fixes_disturbed;
        n.disturbed = s.disturbed;
        for (const auto& r : disturbed_statements(s.program, s.trace, t.program, t.trace, edit.target))
          n.disturbed.insert(r);
        n.patch = std::move(t.combined);
        n.program = std::move(t.program);
        n.trace = std::move(t.trace);
        n.score = t.result.score;
        next.push_back(std::move(n));
      }
      if (out.budget_exhausted) break;
    }
    if (!found.empty()) {
      out.patches = std::move(found);
      return out;
    }
    if (out.budget_exhausted) return out;
    std::stable_sort(next.begin(), next.end(), [](const State& a, const State& b) {
      if (a.gain != b.gain) return a.gain > b.gain;
      return a.score > b.score;
    });
    if (static_cast<int>(next.size()) > config.beam_width) next.resize(static_cast<std::size_t>(config.beam_width));
    beam = std::move(next);
  }
  return out;
}

}  // namespace tracefix::global
