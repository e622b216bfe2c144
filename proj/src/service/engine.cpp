#include "tracefix/service/engine.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "tracefix/interp/interpreter.hpp"
#include "tracefix/interp/trace_io.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/patch/diff.hpp"
#include "tracefix/patch/local.hpp"
#include "tracefix/patch/prompt.hpp"

namespace tracefix::service {

using nlohmann::json;

void EngineConfig::check() const {
  search.check();
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  if (worker_count < 0) throw std::invalid_argument("worker_count must not be negative");
  if (external_feedback_rounds < 0) throw std::invalid_argument("external_feedback_rounds must not be negative");
  if (limits.step_budget <= 0 || limits.max_trace_events <= 0)
    throw std::invalid_argument("limits must be positive");
}

json config_to_json(const EngineConfig& c) {
  return {{"limits", snapshot::limits_to_json(c.limits)},
          {"search",
           {{"beam_width", c.search.beam_width},
            {"max_depth", c.search.max_depth},
            {"per_round_candidates", c.search.per_round_candidates},
            {"total_validation_budget", c.search.total_validation_budget}}},
          {"top_k", c.top_k},
          {"worker_count", c.worker_count},
          {"external_feedback_rounds", c.external_feedback_rounds}};
}

EngineConfig config_from_json(const json& j) {
  EngineConfig c;
  if (j.contains("limits")) c.limits = snapshot::limits_from_json(j["limits"]);
  if (j.contains("search")) {
    const json& s = j["search"];
    c.search.beam_width = s.value("beam_width", c.search.beam_width);
    c.search.max_depth = s.value("max_depth", c.search.max_depth);
    c.search.per_round_candidates = s.value("per_round_candidates", c.search.per_round_candidates);
    c.search.total_validation_budget = s.value("total_validation_budget", c.search.total_validation_budget);
  }
  c.top_k = j.value("top_k", c.top_k);
  c.worker_count = j.value("worker_count", c.worker_count);
  c.external_feedback_rounds = j.value("external_feedback_rounds", c.external_feedback_rounds);
  c.check();
  return c;
}

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::New: return "New";
    case SessionStatus::Localized: return "Localized";
    case SessionStatus::Repairing: return "Repairing";
    case SessionStatus::Done: return "Done";
    case SessionStatus::Failed: return "Failed";
  }
  return "?";
}

std::optional<SessionStatus> status_from_string(const std::string& text) {
  for (SessionStatus s : {SessionStatus::New, SessionStatus::Localized, SessionStatus::Repairing,
                          SessionStatus::Done, SessionStatus::Failed})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

std::vector<faultloc::RepairLocation> locate(const validate::Validator& v) {
  std::vector<faultloc::RepairLocation> locs;
  try {
    locs = faultloc::localize(global::localization_snapshot(v), v.original_trace(), v.program());
  } catch (const faultloc::SymptomNotInTrace& e) {
    throw NoLocations(e.what());
  }
  if (locs.empty()) throw NoLocations("the slice holds no statements");
  return locs;
}

std::vector<patch::Patch> external_candidates(const validate::Validator& v,
                                              const std::vector<faultloc::RepairLocation>& locations,
                                              int feedback_rounds, int workers) {
  if (!patch::external_generator_command()) return {};
  std::vector<patch::Patch> out;
  std::set<std::string> seen;
  // The three most suspicious locations get a prompt each.
  const std::size_t n = std::min<std::size_t>(locations.size(), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& loc = locations[i];
    std::vector<patch::AttemptFeedback> history;
    for (int round = 0; round <= feedback_rounds; ++round) {
      auto prompt = patch::build_prompt(v.snapshot(), v.original_trace(), v.program(), loc, history);
      auto reply = patch::call_external_generator(prompt.render());
      if (!reply) break;
      std::vector<patch::Patch> batch;
      try {
        batch = patch::parse_generator_reply(*reply, v.program(), loc).patches;
      } catch (const patch::NoCandidates&) {
        continue;
      }
      auto results = v.validate_all(batch, workers);
      bool solved = false;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (!results[k].error.empty()) continue;
        if (seen.insert(patch::edit_set_key(batch[k])).second) out.push_back(batch[k]);
        solved = solved || (results[k].resolved && results[k].clean_completion);
        history.push_back({batch[k], results[k].resolved, results[k].outcome});
      }
      if (solved) break;
    }
  }
  return out;
}

namespace {

validate::RankedPatchList repair_located(const validate::Validator& v,
                                         const std::vector<faultloc::RepairLocation>& locs,
                                         const EngineConfig& config) {
  global::RunAllOptions opts;
  opts.search = config.search;
  opts.workers = config.worker_count;
  auto generated = global::run_all_generators(v, opts);
  auto external = external_candidates(v, locs, config.external_feedback_rounds, config.worker_count);
  auto candidates = global::merge_candidates({std::move(generated.patches), std::move(external)});
  auto results = v.validate_all(candidates, config.worker_count);
  std::vector<validate::RankedEntry> entries;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (results[i].error.empty()) entries.push_back({std::move(candidates[i]), results[i]});
  return validate::rank(entries, config.top_k);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ServiceError("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ServiceError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json location_to_json(const faultloc::RepairLocation& l) {
  return {{"function", l.function},   {"line", l.line},       {"occurrence", l.occurrence},
          {"stmt_id", l.stmt_id},     {"suspiciousness", l.suspiciousness},
          {"hops", l.hops},           {"recency", l.recency}, {"frame_match", l.frame_match},
          {"event_idx", l.event_idx}};
}

faultloc::RepairLocation location_from_json(const json& j) {
  faultloc::RepairLocation l;
  l.function = j.at("function").get<std::string>();
  l.line = j.at("line").get<int>();
  l.occurrence = j.at("occurrence").get<int>();
  l.stmt_id = j.at("stmt_id").get<int>();
  l.suspiciousness = j.at("suspiciousness").get<double>();
  l.hops = j.at("hops").get<int>();
  l.recency = j.at("recency").get<double>();
  l.frame_match = j.at("frame_match").get<bool>();
  l.event_idx = j.at("event_idx").get<int>();
  return l;
}

}  // namespace

validate::RankedPatchList repair_snapshot(const snapshot::DebugSnapshot& snap, const EngineConfig& config) {
  config.check();
  if (!snap.problem) throw NoProblem("the snapshot has no problem");
  validate::Validator v(snap);
  return repair_located(v, locate(v), config);
}

json event_to_json(const interp::TraceEvent& e) {
  json j{{"idx", e.idx}, {"kind", interp::to_string(e.kind)}};
  switch (e.kind) {
    case interp::EventKind::StmtEnter:
      j.update({{"stmt_id", e.stmt_id}, {"function", e.function}, {"line", e.line}, {"frame", e.frame}});
      break;
    case interp::EventKind::VarWrite:
      j.update({{"frame", e.frame}, {"name", e.name}, {"value", snapshot::value_to_json(e.value)}});
      break;
    case interp::EventKind::CallEnter: {
      json args = json::array();
      for (const auto& a : e.args) args.push_back(snapshot::value_to_json(a));
      j.update({{"function", e.function}, {"args", args}, {"frame", e.frame}});
      break;
    }
    case interp::EventKind::Ret:
      j.update({{"frame", e.frame}, {"value", snapshot::value_to_json(e.value)}});
      break;
    case interp::EventKind::Raise:
      j.update({{"name", e.name}, {"text", e.text}, {"function", e.function}, {"line", e.line}, {"frame", e.frame}});
      break;
    case interp::EventKind::Out: j["text"] = e.text; break;
  }
  return j;
}

json ranked_to_json(const lang::Program& program, const validate::RankedPatchList& ranked) {
  json entries = json::array();
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    json rec = validate::validation_record(program, ranked.entries[i].patch, ranked.entries[i].result);
    rec["id"] = static_cast<int>(i) + 1;
    entries.push_back(std::move(rec));
  }
  return {{"k", ranked.k}, {"entries", entries}};
}

validate::RankedPatchList ranked_from_json(const json& j) {
  validate::RankedPatchList out;
  out.k = j.at("k").get<int>();
  for (const auto& e : j.at("entries"))
    out.entries.push_back({patch::patch_from_json(e.at("patch")), validate::result_from_json(e.at("validation"))});
  return out;
}

json session_to_json(const RepairSession& s) {
  lang::Program program = lang::parse(s.snapshot.program_source);
  json locs = json::array();
  for (const auto& l : s.locations) locs.push_back(location_to_json(l));
  json history = json::array();
  for (const auto& h : s.history)
    history.push_back({{"problem", snapshot::problem_to_json(h.problem)}, {"ranked", ranked_to_json(program, h.ranked)}});
  json j{{"session_id", s.session_id},
         {"status", to_string(s.status)},
         {"locations", locs},
         {"ranked", s.ranked ? ranked_to_json(program, *s.ranked) : json(nullptr)},
         {"accepted", s.accepted ? json(*s.accepted) : json(nullptr)},
         {"history", history}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
  config_.check();
  if (!config_.data_dir.empty()) {
    std::filesystem::create_directories(config_.data_dir);
    load_all();
  }
}

Engine::~Engine() {
  std::vector<std::shared_ptr<Slot>> all;
  {
    std::lock_guard<std::mutex> g(mutex_);
    for (auto& [id, s] : slots_) all.push_back(s);
  }
  for (auto& s : all)
    if (s->worker.joinable()) s->worker.join();
}

std::shared_ptr<Engine::Slot> Engine::slot(const std::string& id) const {
  std::lock_guard<std::mutex> g(mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw UnknownSession("no session '" + id + "'");
  return it->second;
}

std::vector<std::string> Engine::session_ids() const {
  std::lock_guard<std::mutex> g(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : slots_) out.push_back(id);
  return out;
}

std::string Engine::create_session(const snapshot::DebugSnapshot& snap) {
  if (snap.limits.step_budget > config_.limits.step_budget ||
      snap.limits.max_trace_events > config_.limits.max_trace_events)
    throw std::invalid_argument("snapshot limits exceed the service limits");
  RepairSession s;
  lang::Program program;
  try {
    program = lang::parse(snap.program_source);
    if (snap.problem) snapshot::check_problem(*snap.problem, program);
  } catch (const lang::LangError& e) {
    throw SnapshotInconsistent(std::string("program does not compile: ") + e.what());
  } catch (const snapshot::SchemaError& e) {
    throw SnapshotInconsistent(e.what());
  }
  s.original_trace = interp::execute(program, snap.entry, snap.limits);
  if (auto err = snapshot::consistency_error(snap, s.original_trace)) throw SnapshotInconsistent(*err);
  s.snapshot = snap;

  auto slot = std::make_shared<Slot>();
  {
    std::lock_guard<std::mutex> g(mutex_);
    std::ostringstream id;
    id << "s" << std::setw(4) << std::setfill('0') << next_id_++;
    s.session_id = id.str();
    slot->session = std::move(s);
    slots_[slot->session.session_id] = slot;
  }
  std::lock_guard<std::mutex> g(slot->mutex);
  persist(slot->session);
  return slot->session.session_id;
}

RepairSession Engine::session(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard<std::mutex> g(s->mutex);
  return s->session;
}

void Engine::set_problem(const std::string& id, const snapshot::ProblemSpec& problem) {
  auto s = slot(id);
  std::lock_guard<std::mutex> g(s->mutex);
  if (s->session.status == SessionStatus::Repairing) throw SessionBusy("a repair is running");
  snapshot::check_problem(problem, lang::parse(s->session.snapshot.program_source));
  s->session.snapshot.problem = problem;
  persist(s->session);
}

void Engine::begin_repair(Slot& s) {
  RepairSession& session = s.session;
  if (session.status == SessionStatus::Repairing) throw SessionBusy("a repair is running");
  if (!session.snapshot.problem) throw NoProblem("set a problem before repairing");
  validate::Validator v(session.snapshot);
  session.locations = locate(v);
  if (session.status == SessionStatus::New) session.status = SessionStatus::Localized;
  session.status = SessionStatus::Repairing;
  persist(session);
}

validate::RankedPatchList Engine::finish_repair(Slot& s) {
  // Writers are turned away while the status is Repairing, so the snapshot
  // and locations can be read without the lock.
  validate::RankedPatchList ranked;
  std::string error;
  try {
    validate::Validator v(s.session.snapshot);
    ranked = repair_located(v, s.session.locations, config_);
  } catch (const std::exception& e) {
    error = e.what();
  }
  std::lock_guard<std::mutex> g(s.mutex);
  RepairSession& session = s.session;
  if (!error.empty()) {
    session.status = SessionStatus::Failed;
    session.error = error;
    persist(session);
    throw ServiceError(error);
  }
  session.ranked = ranked;
  session.accepted.reset();
  session.history.push_back({*session.snapshot.problem, ranked});
  session.status = SessionStatus::Done;
  session.error.clear();
  persist(session);
  return ranked;
}

validate::RankedPatchList Engine::run_repair(const std::string& id) {
  auto s = slot(id);
  {
    std::lock_guard<std::mutex> g(s->mutex);
    begin_repair(*s);
  }
  return finish_repair(*s);
}

void Engine::start_repair(const std::string& id) {
  auto s = slot(id);
  std::lock_guard<std::mutex> g(s->mutex);
  if (s->worker.joinable() && s->session.status != SessionStatus::Repairing) s->worker.join();
  begin_repair(*s);
  s->worker = std::thread([this, s] {
    try {
      finish_repair(*s);
    } catch (const std::exception&) {
      // Recorded in the session as Failed.
    }
  });
}

void Engine::wait(const std::string& id) {
  auto s = slot(id);
  std::thread t;
  {
    std::lock_guard<std::mutex> g(s->mutex);
    t = std::move(s->worker);
  }
  if (t.joinable()) t.join();
}

std::string Engine::preview(const std::string& id, int patch_id) const {
  auto s = slot(id);
  std::lock_guard<std::mutex> g(s->mutex);
  const auto& ranked = s->session.ranked;
  if (!ranked || patch_id < 1 || patch_id > static_cast<int>(ranked->entries.size()))
    throw UnknownPatch("no patch " + std::to_string(patch_id));
  lang::Program program = lang::parse(s->session.snapshot.program_source);
  const auto& p = ranked->entries[static_cast<std::size_t>(patch_id - 1)].patch;
  return patch::unified_diff(lang::pretty_print(program), lang::pretty_print(patch::apply_patch(program, p)));
}

std::string Engine::accept(const std::string& id, int patch_id) {
  auto s = slot(id);
  std::lock_guard<std::mutex> g(s->mutex);
  RepairSession& session = s->session;
  if (session.status == SessionStatus::Repairing) throw SessionBusy("a repair is running");
  if (!session.ranked || patch_id < 1 || patch_id > static_cast<int>(session.ranked->entries.size()))
    throw UnknownPatch("no patch " + std::to_string(patch_id));
  if (session.accepted) throw AlreadyAccepted("patch " + std::to_string(*session.accepted) + " was accepted");
  lang::Program program = lang::parse(session.snapshot.program_source);
  std::string text = lang::pretty_print(
      patch::apply_patch(program, session.ranked->entries[static_cast<std::size_t>(patch_id - 1)].patch));
  session.accepted = patch_id;
  if (!config_.data_dir.empty()) write_file(config_.data_dir / session.session_id / "accepted.ml0", text);
  persist(session);
  return text;
}

void Engine::persist(const RepairSession& s) const {
  if (config_.data_dir.empty()) return;
  std::filesystem::path dir = config_.data_dir / s.session_id;
  std::filesystem::create_directories(dir);
  write_file(dir / "snapshot.json", snapshot::snapshot_to_json(s.snapshot).dump(2) + "\n");
  write_file(dir / "config.json", config_to_json(config_).dump(2) + "\n");
  if (!std::filesystem::exists(dir / "trace.txt")) write_file(dir / "trace.txt", interp::serialize_trace(s.original_trace));
  write_file(dir / "session.json", session_to_json(s).dump(2) + "\n");
}

void Engine::load_all() {
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(config_.data_dir))
    if (e.is_directory() && std::filesystem::exists(e.path() / "session.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    json j = json::parse(read_file(dir / "session.json"));
    auto slot = std::make_shared<Slot>();
    RepairSession& s = slot->session;
    s.session_id = j.at("session_id").get<std::string>();
    s.snapshot = snapshot::load_snapshot((dir / "snapshot.json").string());
    s.original_trace = interp::parse_trace(read_file(dir / "trace.txt"));
    auto status = status_from_string(j.at("status").get<std::string>());
    if (!status) throw ServiceError("bad status in " + (dir / "session.json").string());
    s.status = *status;
    for (const auto& l : j.at("locations")) s.locations.push_back(location_from_json(l));
    if (!j.at("ranked").is_null()) s.ranked = ranked_from_json(j["ranked"]);
    if (!j.at("accepted").is_null()) s.accepted = j["accepted"].get<int>();
    for (const auto& h : j.at("history"))
      s.history.push_back({snapshot::problem_from_json(h.at("problem")), ranked_from_json(h.at("ranked"))});
    s.error = j.value("error", "");
    // A repair cut short by a shutdown does not resume.
    if (s.status == SessionStatus::Repairing) {
      s.status = SessionStatus::Failed;
      s.error = "interrupted";
    }
    if (s.session_id.size() > 1 && s.session_id[0] == 's')
      next_id_ = std::max(next_id_, std::stoi(s.session_id.substr(1)) + 1);
    slots_[s.session_id] = slot;
  }
}

}  // namespace tracefix::service
