// tracefix command line: run, trace, capture, slice, repair, serve, snapshots.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tracefix/corpus/corpus.hpp"
#include "tracefix/faultloc/localize.hpp"
#include "tracefix/interp/interpreter.hpp"
#include "tracefix/interp/trace_io.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/service/engine.hpp"
#include "tracefix/service/http.hpp"

using namespace tracefix;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when it is empty or "-".
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

interp::EntryCall make_entry(const std::string& function, const std::vector<std::string>& args) {
  interp::EntryCall entry{function, {}};
  for (const auto& a : args) entry.args.push_back(interp::parse_value(a));
  return entry;
}

// "fn:line" or "fn:line:occurrence".
snapshot::StopRule parse_at_line(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
    throw UsageError("--at-line expects FUNCTION:LINE[:OCCURRENCE], got '" + text + "'");
  try {
    int line = std::stoi(parts[1]);
    int k = parts.size() == 3 ? std::stoi(parts[2]) : 1;
    return snapshot::StopRule::at_line_occurrence(parts[0], line, k);
  } catch (const std::logic_error&) {
    throw UsageError("--at-line expects FUNCTION:LINE[:OCCURRENCE], got '" + text + "'");
  }
}

std::pair<std::string, int> parse_fn_line(const std::string& text, const char* flag) {
  auto colon = text.rfind(':');
  try {
    if (colon != std::string::npos && colon > 0) return {text.substr(0, colon), std::stoi(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
  }
  throw UsageError(std::string(flag) + " expects FUNCTION:LINE, got '" + text + "'");
}

void print_locations(const std::vector<faultloc::RepairLocation>& locs) {
  std::printf("%-4s %-20s %6s %8s %6s %8s %5s\n", "rank", "function", "line", "score", "hops", "recency", "frame");
  int rank = 0;
  for (const auto& l : locs)
    std::printf("%-4d %-20s %6d %8.4f %6d %8.4f %5s\n", ++rank, l.function.c_str(), l.line, l.suspiciousness, l.hops,
                l.recency, l.frame_match ? "yes" : "no");
}

void print_ranked(const json& report) {
  if (report["entries"].empty()) {
    std::cout << "no suggestion\n";
    return;
  }
  for (const auto& e : report["entries"]) {
    const auto& v = e["validation"];
    std::printf("#%d score=%d resolved=%s clean=%s similarity=%.3f penalty=%d  [%s%s] %s\n", e["id"].get<int>(),
                v["score"].get<int>(), v["resolved"].get<bool>() ? "yes" : "no",
                v["clean_completion"].get<bool>() ? "yes" : "no", v["similarity"].get<double>(),
                v["size_penalty"].get<int>(), e["strategy"].get<std::string>().c_str(),
                e["relationship"].is_null() ? "" : (" " + e["relationship"].get<std::string>()).c_str(),
                e["summary"].get<std::string>().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-free repair for MiniLang programs"};
  app.require_subcommand(1);

  interp::RuntimeLimits limits;
  auto add_limits = [&](CLI::App* cmd) {
    cmd->add_option("--step-budget", limits.step_budget, "Maximum statements per run")->capture_default_str();
    cmd->add_option("--max-events", limits.max_trace_events, "Maximum trace events per run")->capture_default_str();
  };

  // run
  std::string program_path, entry_fn, out_path;
  std::vector<std::string> entry_args;
  auto* run = app.add_subcommand("run", "Execute a program and print its trace");
  run->add_option("program", program_path, "MiniLang source file")->required();
  run->add_option("--entry", entry_fn, "Entry function")->required();
  run->add_option("--args", entry_args, "Entry arguments as MiniLang literals")->expected(1, 64)->allow_extra_args(false);
  run->add_option("-o,--output", out_path, "Trace file (default stdout)");
  add_limits(run);

  // trace
  std::string snap_path;
  auto* trace_cmd = app.add_subcommand("trace", "Print the trace of a snapshot's run");
  trace_cmd->add_option("snapshot", snap_path, "Snapshot file")->required();
  trace_cmd->add_option("-o,--output", out_path, "Trace file (default stdout)");

  // capture
  bool at_raise = false;
  int at_event = -1;
  std::string at_line, problem_path, not_execute, wrong_var, wrong_bad, wrong_expected;
  auto* capture = app.add_subcommand("capture", "Run a program and freeze it at a stop point");
  capture->add_option("program", program_path, "MiniLang source file")->required();
  capture->add_option("--entry", entry_fn, "Entry function")->required();
  capture->add_option("--args", entry_args, "Entry arguments as MiniLang literals")->expected(1, 64)->allow_extra_args(false);
  auto* stop_group = capture->add_option_group("stop", "Where to stop");
  stop_group->add_flag("--at-raise", at_raise, "Stop at the final raise");
  stop_group->add_option("--at-event", at_event, "Stop at this event index");
  stop_group->add_option("--at-line", at_line, "Stop at FUNCTION:LINE[:OCCURRENCE]");
  stop_group->require_option(1);
  auto* problem_group = capture->add_option_group("problem", "The symptom (default: the raise, with --at-raise)");
  problem_group->add_option("--problem", problem_path, "Problem as a JSON file");
  problem_group->add_option("--line-should-not-execute", not_execute, "FUNCTION:LINE");
  problem_group->add_option("--wrong-value", wrong_var, "FUNCTION:VARIABLE");
  problem_group->require_option(0, 1);
  capture->add_option("--bad", wrong_bad, "Observed value for --wrong-value");
  capture->add_option("--expected", wrong_expected, "Expected value for --wrong-value");
  capture->add_option("-o,--output", out_path, "Snapshot file (default stdout)");
  add_limits(capture);

  // slice
  int top_locations = faultloc::kTopLocations;
  auto* slice = app.add_subcommand("slice", "Rank repair locations for a snapshot");
  slice->add_option("snapshot", snap_path, "Snapshot file")->required();
  slice->add_option("--top", top_locations, "Locations to show")->capture_default_str()->check(CLI::PositiveNumber);
  slice->add_option("-o,--output", out_path, "Write the locations as JSON");

  // repair
  service::EngineConfig config;
  auto* repair = app.add_subcommand("repair", "Generate, validate and rank patches for a snapshot");
  repair->add_option("snapshot", snap_path, "Snapshot file")->required();
  repair->add_option("--top", config.top_k, "Patches to keep")->capture_default_str();
  repair->add_option("--workers", config.worker_count, "Validation threads (0 = cores)")->capture_default_str();
  repair->add_option("--budget", config.search.total_validation_budget, "Validations for the iterative search")
      ->capture_default_str();
  repair->add_option("-o,--output", out_path, "Write the report as JSON");

  // serve
  int port = 8080;
  std::string host = "127.0.0.1", data_dir;
  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Address to bind")->capture_default_str();
  serve->add_option("--data-dir", data_dir, "Session directory (default: in memory)");
  serve->add_option("--top", config.top_k, "Patches to keep")->capture_default_str();
  serve->add_option("--workers", config.worker_count, "Validation threads (0 = cores)")->capture_default_str();

  // snapshots
  std::string corpus_dir;
  auto* snapshots = app.add_subcommand("snapshots", "Capture snapshot.json for every bug in a corpus");
  snapshots->add_option("corpus", corpus_dir, "Corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto trace = interp::execute(lang::parse(read_text(program_path)), make_entry(entry_fn, entry_args), limits);
      write_text(out_path, interp::serialize_trace(trace));
    } else if (*trace_cmd) {
      auto snap = snapshot::load_snapshot(snap_path);
      auto trace = interp::execute(lang::parse(snap.program_source), snap.entry, snap.limits);
      write_text(out_path, interp::serialize_trace(trace));
    } else if (*capture) {
      std::string source = read_text(program_path);
      auto entry = make_entry(entry_fn, entry_args);
      snapshot::StopRule rule = at_raise ? snapshot::StopRule::at_raise()
                                : at_event >= 0 ? snapshot::StopRule::at_event(at_event)
                                                : parse_at_line(at_line);
      auto snap = snapshot::capture(source, entry, limits, rule);
      if (!problem_path.empty()) {
        snap.problem = snapshot::problem_from_json(json::parse(read_text(problem_path)));
      } else if (!not_execute.empty()) {
        auto [fn, line] = parse_fn_line(not_execute, "--line-should-not-execute");
        snap.problem = snapshot::ProblemSpec::line_should_not_execute(fn, line);
      } else if (!wrong_var.empty()) {
        auto colon = wrong_var.find(':');
        if (colon == std::string::npos || wrong_bad.empty())
          throw UsageError("--wrong-value expects FUNCTION:VARIABLE together with --bad");
        std::optional<interp::Value> expected;
        if (!wrong_expected.empty()) expected = interp::parse_value(wrong_expected);
        snap.problem = snapshot::ProblemSpec::variable_wrong_value(
            wrong_var.substr(0, colon), wrong_var.substr(colon + 1), interp::parse_value(wrong_bad), expected);
      } else if (at_raise) {
        snap.problem = snapshot::derive_symptom(interp::execute(lang::parse(source), entry, limits));
      }
      if (snap.problem) snapshot::check_problem(*snap.problem, lang::parse(source));
      write_text(out_path, snapshot::snapshot_to_json(snap).dump(2) + "\n");
    } else if (*slice) {
      auto snap = snapshot::load_snapshot(snap_path);
      if (!snap.problem) throw UsageError("the snapshot has no problem");
      lang::Program program = lang::parse(snap.program_source);
      auto trace = interp::execute(program, snap.entry, snap.limits);
      auto locs = faultloc::localize(snap, trace, program, top_locations);
      print_locations(locs);
      if (!out_path.empty()) {
        json records = json::array();
        for (const auto& l : locs)
          records.push_back({{"function", l.function}, {"line", l.line}, {"suspiciousness", l.suspiciousness}});
        write_text(out_path, records.dump(2) + "\n");
      }
    } else if (*repair) {
      auto snap = snapshot::load_snapshot(snap_path);
      auto ranked = service::repair_snapshot(snap, config);
      json report = service::ranked_to_json(lang::parse(snap.program_source), ranked);
      report["problem"] = snapshot::problem_to_json(*snap.problem);
      print_ranked(report);
      if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
    } else if (*serve) {
      if (!data_dir.empty()) config.data_dir = data_dir;
      service::Engine engine(config);
      service::HttpServer server(engine);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
    } else if (*snapshots) {
      for (const auto& bug : corpus::load_corpus(corpus_dir)) {
        snapshot::save_snapshot(corpus::capture_bug(bug), corpus::snapshot_path(bug).string());
        std::cout << corpus::snapshot_path(bug).string() << "\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
