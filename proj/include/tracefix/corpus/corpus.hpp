// Bundled seeded-bug corpus: one directory per bug holding buggy.ml0,
// fixed.ml0, bug.json and snapshot.json.
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracefix/patch/edit.hpp"
#include "tracefix/snapshot/snapshot.hpp"

namespace tracefix::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BugCase {
  std::string name;
  std::string description;
  // "single" or "multi".
  std::string kind;
  std::optional<patch::Relationship> relationship;
  // Local template expected to produce the fix (single-edit bugs).
  std::string template_name;
  std::string buggy_source;
  std::string fixed_source;
  interp::EntryCall entry;
  snapshot::StopRule stop;
  snapshot::ProblemSpec problem;
  // Symptom of the run after the first partial fix (ONPF/FU fixtures).
  std::optional<snapshot::ProblemSpec> stage2_problem;
  patch::Patch ground_truth;
  std::filesystem::path dir;

  bool single_edit() const { return kind == "single"; }
};

nlohmann::json stop_to_json(const snapshot::StopRule& rule);
snapshot::StopRule stop_from_json(const nlohmann::json& j);

// Throws CorpusError.
BugCase load_bug(const std::filesystem::path& dir);
// Every bug directory under `root`, sorted by name.
std::vector<BugCase> load_corpus(const std::filesystem::path& root);

// Fresh capture of the buggy program with the bug's problem attached.
snapshot::DebugSnapshot capture_bug(const BugCase& bug, const interp::RuntimeLimits& limits = {});

std::filesystem::path snapshot_path(const BugCase& bug);

}  // namespace tracefix::corpus
