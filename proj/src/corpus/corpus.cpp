#include "tracefix/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tracefix::corpus {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json stop_to_json(const snapshot::StopRule& rule) {
  using K = snapshot::StopRule::Kind;
  switch (rule.kind) {
    case K::AtRaise: return {{"rule", "at_raise"}};
    case K::AtEvent: return {{"rule", "at_event"}, {"event", rule.event}};
    case K::AtLineOccurrence:
      return {{"rule", "at_line"}, {"function", rule.function}, {"line", rule.line},
              {"occurrence", rule.occurrence}};
  }
  return nullptr;
}

snapshot::StopRule stop_from_json(const json& j) {
  std::string rule = j.at("rule").get<std::string>();
  if (rule == "at_raise") return snapshot::StopRule::at_raise();
  if (rule == "at_event") return snapshot::StopRule::at_event(j.at("event").get<int>());
  if (rule == "at_line")
    return snapshot::StopRule::at_line_occurrence(j.at("function").get<std::string>(),
                                                  j.at("line").get<int>(), j.value("occurrence", 1));
  throw CorpusError("unknown stop rule '" + rule + "'");
}

BugCase load_bug(const std::filesystem::path& dir) {
  BugCase bug;
  bug.dir = dir;
  try {
    json meta = json::parse(read_file(dir / "bug.json"));
    bug.name = meta.at("name").get<std::string>();
    bug.description = meta.value("description", "");
    bug.kind = meta.at("kind").get<std::string>();
    if (bug.kind != "single" && bug.kind != "multi") throw CorpusError("bad kind '" + bug.kind + "'");
    if (meta.contains("relationship")) {
      bug.relationship = patch::relationship_from_string(meta["relationship"].get<std::string>());
      if (!bug.relationship) throw CorpusError("unknown relationship in " + bug.name);
    }
    bug.template_name = meta.value("template", "");
    bug.entry = snapshot::entry_from_json(meta.at("entry"));
    bug.stop = stop_from_json(meta.at("stop"));
    bug.problem = snapshot::problem_from_json(meta.at("problem"));
    if (meta.contains("stage2_problem"))
      bug.stage2_problem = snapshot::problem_from_json(meta["stage2_problem"]);
    bug.ground_truth = patch::patch_from_json(meta.at("ground_truth"));
    bug.ground_truth.strategy = "ground-truth";
    bug.ground_truth.relationship = bug.relationship;
  } catch (const json::exception& e) {
    throw CorpusError(dir.string() + "/bug.json: " + e.what());
  } catch (const snapshot::SchemaError& e) {
    throw CorpusError(dir.string() + "/bug.json: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorpusError(dir.string() + "/bug.json: " + e.what());
  }
  bug.buggy_source = read_file(dir / "buggy.ml0");
  bug.fixed_source = read_file(dir / "fixed.ml0");
  return bug;
}

std::vector<BugCase> load_corpus(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "bug.json"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<BugCase> out;
  for (const auto& d : dirs) out.push_back(load_bug(d));
  return out;
}

snapshot::DebugSnapshot capture_bug(const BugCase& bug, const interp::RuntimeLimits& limits) {
  snapshot::DebugSnapshot snap = snapshot::capture(bug.buggy_source, bug.entry, limits, bug.stop);
  snap.problem = bug.problem;
  return snap;
}

std::filesystem::path snapshot_path(const BugCase& bug) { return bug.dir / "snapshot.json"; }

}  // namespace tracefix::corpus
