#include "tracefix/patch/prompt.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/patch/local.hpp"

namespace tracefix::patch {

using interp::EventKind;

bool PromptDocument::has_section(const std::string& title) const { return section(title) != nullptr; }

const PromptSection* PromptDocument::section(const std::string& title) const {
  for (const auto& s : sections)
    if (s.title == title) return &s;
  return nullptr;
}

std::string PromptDocument::render() const {
  std::string out;
  for (const auto& s : sections) {
    out += "## " + s.title + "\n" + s.body;
    if (!s.body.empty() && s.body.back() != '\n') out += "\n";
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string bindings_text(const interp::Bindings& b) {
  std::string out;
  for (const auto& [name, v] : b) {
    if (!out.empty()) out += ", ";
    out += name + "=" + v.literal();
  }
  return out;
}

// Source lines of `function`, with the location's line marked.
std::string marked_function(const std::string& source, const lang::Program& program,
                            const std::string& function, int line) {
  auto lines = lines_of(source);
  const lang::FunctionDecl* f = program.find_function(function);
  if (!f) return "";
  int end = static_cast<int>(lines.size());
  for (const auto& g : program.functions)
    if (g.line > f->line && g.line - 1 < end) end = g.line - 1;
  std::string out;
  for (int l = f->line; l <= end; ++l) {
    const std::string& text = lines[static_cast<std::size_t>(l - 1)];
    if (l == end && text.empty()) break;
    out += (l == line ? ">> " : "   ") + std::to_string(l) + " | " + text + "\n";
  }
  return out;
}

std::set<std::string> callees(const lang::FunctionDecl& f) {
  std::set<std::string> out;
  lang::for_each_stmt(f.body, f.name, [&](const lang::Stmt& s, const std::string&) {
    for (const auto& e : s.exprs)
      lang::for_each_expr(e, [&](const lang::Expr& x) {
        if (x.kind == lang::ExprKind::Call && x.text != f.name) out.insert(x.text);
      });
  });
  return out;
}

std::string outcome_text(const interp::Outcome& o) {
  switch (o.kind) {
    case interp::OutcomeKind::Completed: return "completed returning " + o.value.literal();
    case interp::OutcomeKind::Raised:
      return "still raised " + o.raise_kind + " at line " + std::to_string(o.line) + " in " +
             o.function + " (" + o.message + ")";
    case interp::OutcomeKind::BudgetExceeded: return "ran out of steps (possible non-termination)";
  }
  return "";
}

}  // namespace

PromptDocument build_prompt(const snapshot::DebugSnapshot& snap, const interp::ExecutionTrace& trace,
                            const lang::Program& program, const faultloc::RepairLocation& loc,
                            const std::vector<AttemptFeedback>& history, const std::string& guidance) {
  PromptDocument doc;
  std::string problem = snap.problem ? snapshot::describe(*snap.problem) : "no problem specified";
  doc.sections.push_back({"Problem", "The program misbehaves: " + problem +
                                         ".\nCandidate repair location: " + loc.function + " line " +
                                         std::to_string(loc.line) + ".\n"});
  doc.sections.push_back(
      {"Function", marked_function(snap.program_source, program, loc.function, loc.line)});

  std::string related;
  if (const lang::FunctionDecl* f = program.find_function(loc.function))
    for (const auto& name : callees(*f))
      if (const lang::FunctionDecl* g = program.find_function(name)) related += lang::pretty_print(*g);
  doc.sections.push_back({"Related functions", related.empty() ? "(none)\n" : related});

  doc.sections.push_back({"Entry", interp::to_string(snap.entry) + "\n"});

  std::string symptom = problem + "\n";
  if (!snap.stack.empty()) {
    const auto& top = snap.stack.front();
    symptom += "Stopped in " + top.function + " at line " + std::to_string(top.line) +
               " with " + (top.bindings.empty() ? std::string("no bindings") : bindings_text(top.bindings)) + "\n";
  }
  doc.sections.push_back({"Symptom", symptom});

  // Last statements before the stop, each with its frame's state.
  std::vector<std::string> excerpt;
  {
    const int stop = std::min(snap.stop_idx, static_cast<int>(trace.events.size()) - 1);
    std::vector<int> picks;
    for (int i = stop; i >= 0 && static_cast<int>(picks.size()) < kTraceExcerptStatements; --i)
      if (trace.events[static_cast<std::size_t>(i)].kind == EventKind::StmtEnter) picks.push_back(i);
    std::reverse(picks.begin(), picks.end());
    std::map<int, interp::Bindings> env;
    std::size_t next = 0;
    lang::ProgramIndex index(program);
    for (int i = 0; i <= stop && next < picks.size(); ++i) {
      const auto& e = trace.events[static_cast<std::size_t>(i)];
      if (e.kind == EventKind::VarWrite) env[e.frame][e.name] = e.value;
      if (i != picks[next]) continue;
      ++next;
      std::string header = index.contains(e.stmt_id) ? lang::header_text(index.stmt(e.stmt_id)) : "";
      excerpt.push_back("[" + std::to_string(i) + "] " + e.function + ":" + std::to_string(e.line) +
                        "  " + header + "  | " + bindings_text(env[e.frame]));
    }
  }
  auto excerpt_text = [&](std::size_t drop) {
    std::string body;
    if (drop > 0) body += "(" + std::to_string(drop) + " earlier statements omitted)\n";
    for (std::size_t i = drop; i < excerpt.size(); ++i) body += excerpt[i] + "\n";
    return body;
  };
  doc.sections.push_back({"Trace excerpt", excerpt_text(0)});
  const std::size_t trace_section = doc.sections.size() - 1;

  if (!history.empty()) {
    std::string body;
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& h = history[i];
      body += std::to_string(i + 1) + ". " + describe(h.patch, &program) + "\n   result: " +
              (h.resolved ? std::string("resolved the symptom") : outcome_text(h.outcome)) + "\n";
    }
    doc.sections.push_back({"Prior attempts", body});
  }
  doc.sections.push_back(
      {"Guidance", (guidance.empty() ? std::string("") : guidance + "\n") +
                       "Reply with the corrected statement or the corrected function in a fenced "
                       "code block.\n"});

  for (std::size_t drop = 1; doc.render().size() > kMaxPromptChars && drop <= excerpt.size(); ++drop)
    doc.sections[trace_section].body = excerpt_text(drop);
  if (doc.render().size() > kMaxPromptChars) {
    // Still too long: cut sections from the end of the longest one.
    for (auto& s : doc.sections) {
      std::size_t total = doc.render().size();
      if (total <= kMaxPromptChars) break;
      std::size_t excess = total - kMaxPromptChars;
      if (s.body.size() > excess + 20) s.body = s.body.substr(0, s.body.size() - excess - 20) + "\n(truncated)\n";
    }
  }
  return doc;
}

namespace {

std::vector<std::string> fenced_blocks(const std::string& text) {
  std::vector<std::string> out;
  auto lines = lines_of(text);
  bool in = false;
  std::string cur;
  for (const auto& l : lines) {
    std::string trimmed = l;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.rfind("```", 0) == 0) {
      if (in) out.push_back(cur);
      in = !in;
      cur.clear();
      continue;
    }
    if (in) cur += l + "\n";
  }
  return out;
}

bool same_shape(const lang::Block& a, const lang::Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind || a[i].blocks.size() != b[i].blocks.size()) return false;
    for (std::size_t k = 0; k < a[i].blocks.size(); ++k)
      if (!same_shape(a[i].blocks[k], b[i].blocks[k])) return false;
  }
  return true;
}

void collect_changes(const lang::Block& orig, const lang::Block& repl, const lang::ProgramIndex& index,
                     std::vector<Edit>& edits) {
  for (std::size_t i = 0; i < orig.size(); ++i) {
    const lang::Stmt& o = orig[i];
    const lang::Stmt& r = repl[i];
    if (!o.synthetic) {
      lang::StmtRef ref = index.ref_of(o.id);
      if (o.name != r.name && !lang::is_compound(o.kind)) {
        edits.push_back(Edit::replace_stmt(ref, r));
      } else {
        for (std::size_t k = 0; k < o.exprs.size() && k < r.exprs.size(); ++k)
          if (!(o.exprs[k] == r.exprs[k]))
            edits.push_back(Edit::replace_expr(ref, {static_cast<int>(k)}, r.exprs[k]));
        if (o.exprs.size() != r.exprs.size()) edits.push_back(Edit::replace_stmt(ref, r));
      }
    }
    for (std::size_t k = 0; k < o.blocks.size(); ++k) collect_changes(o.blocks[k], r.blocks[k], index, edits);
  }
}

}  // namespace

ReplyParse parse_generator_reply(const std::string& text, const lang::Program& program,
                                 const faultloc::RepairLocation& loc) {
  ReplyParse out;
  int id = location_stmt(program, loc);
  lang::ProgramIndex index(program);
  auto blocks = fenced_blocks(text);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string& code = blocks[b];
    std::string tag = "block " + std::to_string(b + 1) + ": ";
    Patch p;
    p.strategy = "llm";
    p.provenance = "external generator reply, " + tag.substr(0, tag.size() - 2);
    std::string trimmed = code;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\n"));
    try {
      if (trimmed.rfind("fn ", 0) == 0) {
        lang::FunctionDecl f = lang::parse_function(code);
        const lang::FunctionDecl* orig = program.find_function(f.name);
        if (!orig) {
          out.diagnostics.push_back(tag + "function '" + f.name + "' is not in the program");
          continue;
        }
        if (!same_shape(orig->body, f.body)) {
          out.diagnostics.push_back(tag + "function structure changed; only statement-level changes are supported");
          continue;
        }
        collect_changes(orig->body, f.body, index, p.edits);
      } else {
        if (id < 0) {
          out.diagnostics.push_back(tag + "location does not resolve");
          continue;
        }
        lang::Stmt s = lang::parse_statement(code);
        p.edits.push_back(Edit::replace_stmt(index.ref_of(id), s));
      }
    } catch (const lang::LangError& e) {
      out.diagnostics.push_back(tag + "does not parse: " + e.what());
      continue;
    }
    if (p.edits.empty()) {
      out.diagnostics.push_back(tag + "no change");
      continue;
    }
    try {
      apply_patch(program, p);
    } catch (const ApplyError& e) {
      out.diagnostics.push_back(tag + "does not apply: " + e.what());
      continue;
    }
    out.patches.push_back(std::move(p));
  }
  if (out.patches.empty())
    throw NoCandidates(blocks.empty() ? "reply has no fenced code block" : "no code block yields a patch",
                       out.diagnostics);
  return out;
}

std::optional<std::string> external_generator_command() {
  const char* cmd = std::getenv("REPAIR_LLM_CMD");
  if (!cmd || !*cmd) return std::nullopt;
  return std::string(cmd);
}

std::optional<std::string> call_external_generator(const std::string& prompt) {
  static std::mutex io;
  auto cmd = external_generator_command();
  if (!cmd) return std::nullopt;
  std::lock_guard<std::mutex> lock(io);
  std::random_device rd;
  auto path = std::filesystem::temp_directory_path() /
              ("tracefix_prompt_" + std::to_string(rd()) + ".txt");
  {
    std::ofstream f(path);
    if (!f) return std::nullopt;
    f << prompt;
  }
  std::string full = *cmd + " < '" + path.string() + "'";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(path);
    return std::nullopt;
  }
  std::string reply;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) reply.append(buf, n);
  int status = pclose(pipe);
  std::filesystem::remove(path);
  if (status != 0) return std::nullopt;
  return reply;
}

}  // namespace tracefix::patch
