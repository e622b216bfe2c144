// Repair sessions: create from a snapshot, set or refine the problem, run
// repair, preview and accept patches. Sessions persist under data_dir, one
// directory each.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tracefix/faultloc/localize.hpp"
#include "tracefix/global/global.hpp"
#include "tracefix/validate/validate.hpp"

namespace tracefix::service {

struct EngineConfig {
  // Upper bound on the limits of accepted snapshots. Runs use the
  // snapshot's own limits.
  interp::RuntimeLimits limits;
  global::SearchConfig search;
  int top_k = validate::kDefaultTopK;
  // 0 = available cores.
  int worker_count = 0;
  // Rounds of feedback given to the external generator after its first
  // reply.
  int external_feedback_rounds = 2;
  // Empty keeps sessions in memory only.
  std::filesystem::path data_dir;

  // Throws std::invalid_argument.
  void check() const;
};

nlohmann::json config_to_json(const EngineConfig& config);
// data_dir is not part of the serialized form.
EngineConfig config_from_json(const nlohmann::json& j);

enum class SessionStatus { New, Localized, Repairing, Done, Failed };

const char* to_string(SessionStatus status);
std::optional<SessionStatus> status_from_string(const std::string& text);

struct HistoryEntry {
  snapshot::ProblemSpec problem;
  validate::RankedPatchList ranked;
};

struct RepairSession {
  std::string session_id;
  snapshot::DebugSnapshot snapshot;
  interp::ExecutionTrace original_trace;
  SessionStatus status = SessionStatus::New;
  std::vector<faultloc::RepairLocation> locations;
  std::optional<validate::RankedPatchList> ranked;
  // 1-based position in `ranked`.
  std::optional<int> accepted;
  std::vector<HistoryEntry> history;
  // Why the last repair failed.
  std::string error;
};

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TRACEFIX_SERVICE_ERROR(Name)            \
  class Name : public ServiceError {            \
   public:                                      \
    using ServiceError::ServiceError;           \
  };
TRACEFIX_SERVICE_ERROR(SnapshotInconsistent)
TRACEFIX_SERVICE_ERROR(UnknownSession)
TRACEFIX_SERVICE_ERROR(UnknownPatch)
TRACEFIX_SERVICE_ERROR(AlreadyAccepted)
TRACEFIX_SERVICE_ERROR(NoLocations)
TRACEFIX_SERVICE_ERROR(NoProblem)
TRACEFIX_SERVICE_ERROR(SessionBusy)
#undef TRACEFIX_SERVICE_ERROR

// Locations for the snapshot's problem. Throws NoLocations.
std::vector<faultloc::RepairLocation> locate(const validate::Validator& validator);

// Candidates from the external generator for the top locations, with up to
// `feedback_rounds` follow-up prompts describing failed attempts. Empty when
// no generator is configured.
std::vector<patch::Patch> external_candidates(const validate::Validator& validator,
                                              const std::vector<faultloc::RepairLocation>& locations,
                                              int feedback_rounds, int workers);

// The whole pipeline on one snapshot: localize, generate, validate, rank.
// Throws NoProblem, NoLocations.
validate::RankedPatchList repair_snapshot(const snapshot::DebugSnapshot& snapshot, const EngineConfig& config);

nlohmann::json session_to_json(const RepairSession& session);
nlohmann::json ranked_to_json(const lang::Program& program, const validate::RankedPatchList& ranked);
validate::RankedPatchList ranked_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const interp::TraceEvent& event);

class Engine {
 public:
  // Loads the sessions already stored under config.data_dir.
  explicit Engine(EngineConfig config);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }

  // Runs the snapshot once and checks that the run reproduces its stack.
  // Throws SnapshotInconsistent, and std::invalid_argument when the
  // snapshot's limits exceed config().limits.
  std::string create_session(const snapshot::DebugSnapshot& snapshot);
  // Copy of the session's current state. Throws UnknownSession.
  RepairSession session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  // Throws snapshot::SchemaError when the problem names a missing location,
  // SessionBusy during a repair.
  void set_problem(const std::string& id, const snapshot::ProblemSpec& problem);

  // Synchronous repair. The result is stored and appended to the history;
  // an empty list means no suggestion. Throws NoProblem, NoLocations,
  // SessionBusy.
  validate::RankedPatchList run_repair(const std::string& id);
  // Marks the session Repairing and runs the repair on a background
  // thread; failures end in status Failed. Throws NoProblem, SessionBusy.
  void start_repair(const std::string& id);
  // Blocks until no background repair of the session is running.
  void wait(const std::string& id);

  // Unified diff, original against patched source. Throws UnknownPatch.
  std::string preview(const std::string& id, int patch_id) const;
  // Patched source; stored as accepted.ml0. Throws UnknownPatch,
  // AlreadyAccepted.
  std::string accept(const std::string& id, int patch_id);

 private:
  struct Slot {
    mutable std::mutex mutex;
    RepairSession session;
    std::thread worker;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  void persist(const RepairSession& session) const;
  void load_all();
  // Caller holds the slot lock. Throws NoProblem, NoLocations, SessionBusy.
  void begin_repair(Slot& slot);
  // Caller does not hold the lock. Throws ServiceError after recording the
  // failure.
  validate::RankedPatchList finish_repair(Slot& slot);

  EngineConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  int next_id_ = 1;
};

}  // namespace tracefix::service
