#include "tracefix/snapshot/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "tracefix/interp/interpreter.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/program_index.hpp"

namespace tracefix::snapshot {

using interp::EventKind;
using nlohmann::json;

int find_stop(const interp::ExecutionTrace& trace, const StopRule& rule) {
  switch (rule.kind) {
    case StopRule::Kind::AtRaise: {
      int idx = interp::raise_index(trace);
      if (idx < 0) throw StopNotReached("run did not raise");
      return idx;
    }
    case StopRule::Kind::AtEvent:
      if (rule.event < 0 || rule.event >= static_cast<int>(trace.events.size()))
        throw StopNotReached("event " + std::to_string(rule.event) + " not in trace of " +
                             std::to_string(trace.events.size()) + " events");
      return rule.event;
    case StopRule::Kind::AtLineOccurrence: {
      int seen = 0;
      for (const auto& e : trace.events)
        if (e.kind == EventKind::StmtEnter && e.function == rule.function && e.line == rule.line &&
            ++seen == rule.occurrence)
          return e.idx;
      throw StopNotReached("occurrence " + std::to_string(rule.occurrence) + " of " +
                           rule.function + ":" + std::to_string(rule.line) + " never executed");
    }
  }
  throw StopNotReached("bad stop rule");
}

std::vector<StackFrameInfo> stack_at(const interp::ExecutionTrace& trace, int stop_idx) {
  auto idx = static_cast<std::size_t>(stop_idx);
  std::vector<int> live = interp::live_frames(trace, idx);
  interp::FrameStates states = interp::state_at(trace, idx);
  auto functions = interp::frame_functions(trace);
  std::vector<StackFrameInfo> out;
  for (int f : live) {
    StackFrameInfo info;
    info.frame = f;
    info.function = functions[f];
    for (std::size_t i = idx + 1; i-- > 0;) {
      const auto& e = trace.events[i];
      if (e.kind == EventKind::StmtEnter && e.frame == f) {
        info.line = e.line;
        break;
      }
    }
    info.bindings = states[f];
    out.push_back(std::move(info));
  }
  return out;
}

DebugSnapshot capture(const std::string& program_source, const interp::EntryCall& entry,
                      const interp::RuntimeLimits& limits, const StopRule& rule) {
  lang::Program program = lang::parse(program_source);
  interp::ExecutionTrace trace = interp::execute(program, entry, limits);
  DebugSnapshot snap;
  snap.program_source = program_source;
  snap.entry = entry;
  snap.limits = limits;
  snap.stop_idx = find_stop(trace, rule);
  snap.stack = stack_at(trace, snap.stop_idx);
  return snap;
}

ProblemSpec derive_symptom(const interp::ExecutionTrace& trace) {
  if (trace.outcome.kind != interp::OutcomeKind::Raised)
    throw NoFailure(std::string("run ended with ") + to_string(trace.outcome.kind));
  return ProblemSpec::unexpected_exception(trace.outcome.function, trace.outcome.line,
                                           trace.outcome.raise_kind);
}

std::optional<std::string> consistency_error(const DebugSnapshot& snapshot,
                                             const interp::ExecutionTrace& trace) {
  if (snapshot.stop_idx < 0 || snapshot.stop_idx >= static_cast<int>(trace.events.size()))
    return "stop_idx " + std::to_string(snapshot.stop_idx) + " outside trace of " +
           std::to_string(trace.events.size()) + " events";
  auto actual = stack_at(trace, snapshot.stop_idx);
  if (actual.size() != snapshot.stack.size())
    return "stack depth " + std::to_string(snapshot.stack.size()) + " but run has " +
           std::to_string(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const auto& want = snapshot.stack[i];
    const auto& got = actual[i];
    std::string where = "frame " + std::to_string(want.frame);
    if (want.frame != got.frame || want.function != got.function)
      return where + ": expected " + want.function + " but run has " + got.function;
    if (want.line != got.line)
      return where + ": line " + std::to_string(want.line) + " but run is at " +
             std::to_string(got.line);
    if (want.bindings != got.bindings) {
      for (const auto& [name, v] : want.bindings) {
        auto it = got.bindings.find(name);
        if (it == got.bindings.end()) return where + ": " + name + " not bound in run";
        if (!(it->second == v))
          return where + ": " + name + " = " + v.literal() + " but run has " +
                 it->second.literal();
      }
      return where + ": run binds extra variables";
    }
  }
  return std::nullopt;
}

void check_problem(const ProblemSpec& p, const lang::Program& program) {
  if (!program.find_function(p.function))
    throw SchemaError("problem refers to unknown function '" + p.function + "'");
  switch (p.kind) {
    case ProblemKind::UnexpectedException:
    case ProblemKind::LineShouldNotExecute:
      if (lang::locate(program, p.function, p.line).empty())
        throw SchemaError("problem refers to " + p.function + ":" + std::to_string(p.line) +
                          ", which has no statement");
      if (p.kind == ProblemKind::UnexpectedException && p.exception.empty())
        throw SchemaError("UnexpectedException needs an exception kind");
      break;
    case ProblemKind::VariableWrongValue:
      if (p.name.empty()) throw SchemaError("VariableWrongValue needs a variable name");
      if (p.expected_value && *p.expected_value == p.bad_value)
        throw SchemaError("bad_value equals expected_value");
      break;
  }
}

json value_to_json(const interp::Value& v) {
  using K = interp::Value::Kind;
  switch (v.kind()) {
    case K::Unit: return nullptr;
    case K::Int: return v.as_int();
    case K::Bool: return v.as_bool();
    case K::Str: return v.as_str();
    case K::Array: {
      json arr = json::array();
      for (const auto& x : v.as_array()) arr.push_back(value_to_json(x));
      return arr;
    }
  }
  return nullptr;
}

interp::Value value_from_json(const json& j) {
  if (j.is_null()) return interp::Value::unit();
  if (j.is_boolean()) return interp::Value::boolean(j.get<bool>());
  if (j.is_number_integer()) {
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > INT64_MAX)
      throw SchemaError("integer out of range: " + j.dump());
    return interp::Value::integer(j.get<std::int64_t>());
  }
  if (j.is_string()) return interp::Value::string(j.get<std::string>());
  if (j.is_array()) {
    interp::Value::Array items;
    for (const auto& x : j) items.push_back(value_from_json(x));
    return interp::Value::array(std::move(items));
  }
  throw SchemaError("not a MiniLang value: " + j.dump());
}

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw SchemaError(std::string("expected object holding '") + name + "'");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
  return *it;
}

std::string str_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw SchemaError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

long long int_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number_integer())
    throw SchemaError(std::string("field '") + name + "' must be an integer");
  return v.get<long long>();
}

}  // namespace

json problem_to_json(const ProblemSpec& p) {
  json j{{"kind", to_string(p.kind)}, {"function", p.function}};
  switch (p.kind) {
    case ProblemKind::UnexpectedException:
      j["line"] = p.line;
      j["exception"] = p.exception;
      break;
    case ProblemKind::LineShouldNotExecute: j["line"] = p.line; break;
    case ProblemKind::VariableWrongValue:
      j["name"] = p.name;
      j["bad_value"] = value_to_json(p.bad_value);
      if (p.expected_value) j["expected_value"] = value_to_json(*p.expected_value);
      break;
  }
  return j;
}

ProblemSpec problem_from_json(const json& j) {
  std::string kind = str_field(j, "kind");
  std::string function = str_field(j, "function");
  if (kind == "UnexpectedException")
    return ProblemSpec::unexpected_exception(function, static_cast<int>(int_field(j, "line")),
                                             str_field(j, "exception"));
  if (kind == "LineShouldNotExecute")
    return ProblemSpec::line_should_not_execute(function, static_cast<int>(int_field(j, "line")));
  if (kind == "VariableWrongValue") {
    std::optional<interp::Value> expected;
    if (j.contains("expected_value")) expected = value_from_json(j["expected_value"]);
    ProblemSpec p = ProblemSpec::variable_wrong_value(function, str_field(j, "name"),
                                                      value_from_json(field(j, "bad_value")),
                                                      expected);
    if (p.expected_value && *p.expected_value == p.bad_value)
      throw SchemaError("bad_value equals expected_value");
    return p;
  }
  throw SchemaError("unknown problem kind '" + kind + "'");
}

json limits_to_json(const interp::RuntimeLimits& l) {
  return {{"step_budget", l.step_budget}, {"max_trace_events", l.max_trace_events}};
}

interp::RuntimeLimits limits_from_json(const json& j) {
  interp::RuntimeLimits l;
  if (j.contains("step_budget")) l.step_budget = int_field(j, "step_budget");
  if (j.contains("max_trace_events")) l.max_trace_events = int_field(j, "max_trace_events");
  if (l.step_budget <= 0 || l.max_trace_events <= 0) throw SchemaError("limits must be positive");
  return l;
}

json entry_to_json(const interp::EntryCall& e) {
  json args = json::array();
  for (const auto& a : e.args) args.push_back(value_to_json(a));
  return {{"function", e.function}, {"args", args}};
}

interp::EntryCall entry_from_json(const json& j) {
  interp::EntryCall e;
  e.function = str_field(j, "function");
  const json& args = field(j, "args");
  if (!args.is_array()) throw SchemaError("entry.args must be an array");
  for (const auto& a : args) e.args.push_back(value_from_json(a));
  return e;
}

json snapshot_to_json(const DebugSnapshot& s) {
  json stack = json::array();
  for (const auto& f : s.stack) {
    json b = json::object();
    for (const auto& [name, v] : f.bindings) b[name] = value_to_json(v);
    stack.push_back({{"frame", f.frame}, {"function", f.function}, {"line", f.line}, {"bindings", b}});
  }
  return {{"version", kSnapshotVersion},
          {"program_source", s.program_source},
          {"entry", entry_to_json(s.entry)},
          {"stop_idx", s.stop_idx},
          {"stack", stack},
          {"problem", s.problem ? problem_to_json(*s.problem) : json(nullptr)},
          {"limits", limits_to_json(s.limits)}};
}

DebugSnapshot snapshot_from_json(const json& j) {
  long long version = int_field(j, "version");
  if (version != kSnapshotVersion)
    throw SchemaError("unsupported snapshot version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kSnapshotVersion) + ")");
  DebugSnapshot s;
  s.program_source = str_field(j, "program_source");
  s.entry = entry_from_json(field(j, "entry"));
  s.stop_idx = static_cast<int>(int_field(j, "stop_idx"));
  if (s.stop_idx < 0) throw SchemaError("stop_idx must be non-negative");
  const json& stack = field(j, "stack");
  if (!stack.is_array()) throw SchemaError("stack must be an array");
  for (const auto& f : stack) {
    StackFrameInfo info;
    info.frame = static_cast<int>(int_field(f, "frame"));
    info.function = str_field(f, "function");
    info.line = static_cast<int>(int_field(f, "line"));
    const json& b = field(f, "bindings");
    if (!b.is_object()) throw SchemaError("bindings must be an object");
    for (auto it = b.begin(); it != b.end(); ++it) info.bindings[it.key()] = value_from_json(it.value());
    s.stack.push_back(std::move(info));
  }
  if (j.contains("problem") && !j["problem"].is_null()) s.problem = problem_from_json(j["problem"]);
  if (j.contains("limits")) s.limits = limits_from_json(j["limits"]);

  lang::Program program;
  try {
    program = lang::parse(s.program_source);
  } catch (const lang::LangError& e) {
    throw SchemaError(std::string("program_source does not compile: ") + e.what());
  }
  const lang::FunctionDecl* fn = program.find_function(s.entry.function);
  if (!fn) throw SchemaError("entry function '" + s.entry.function + "' not in program");
  if (fn->params.size() != s.entry.args.size())
    throw SchemaError("entry function '" + s.entry.function + "' takes " +
                      std::to_string(fn->params.size()) + " argument(s)");
  if (s.problem) check_problem(*s.problem, program);
  return s;
}

void save_snapshot(const DebugSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << snapshot_to_json(snapshot).dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

DebugSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return snapshot_from_json(j);
}

}  // namespace tracefix::snapshot
