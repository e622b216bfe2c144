#include "tracefix/interp/trace_io.hpp"

#include <sstream>
#include <vector>

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"

namespace tracefix::interp {

namespace {

std::string args_literal(const std::vector<Value>& args) {
  return Value::array(args).literal();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string unquote(const std::string& text, int line) {
  lang::Expr e;
  try {
    e = lang::parse_expression(text);
  } catch (const lang::LangError& err) {
    throw TraceFormatError(line, std::string("bad string: ") + err.what());
  }
  if (e.kind != lang::ExprKind::StrLit) throw TraceFormatError(line, "expected quoted string");
  return e.text;
}

Value value_of(const std::string& text, int line) {
  try {
    return parse_value(text);
  } catch (const lang::LangError& err) {
    throw TraceFormatError(line, std::string("bad value: ") + err.what());
  }
}

int int_of(const std::string& text, int line) {
  try {
    std::size_t used = 0;
    long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw TraceFormatError(line, "expected integer, got '" + text + "'");
  }
}

}  // namespace

std::string serialize_trace(const ExecutionTrace& trace) {
  std::ostringstream out;
  out << "ENTRY\t" << trace.entry_function << "\n";
  for (const TraceEvent& e : trace.events) {
    out << e.idx << '\t' << to_string(e.kind);
    switch (e.kind) {
      case EventKind::StmtEnter:
        out << '\t' << e.stmt_id << '\t' << e.function << '\t' << e.line << '\t' << e.frame;
        break;
      case EventKind::VarWrite:
        out << '\t' << e.frame << '\t' << e.name << '\t' << e.value.literal();
        break;
      case EventKind::CallEnter:
        out << '\t' << e.function << '\t' << args_literal(e.args) << '\t' << e.frame;
        break;
      case EventKind::Ret:
        out << '\t' << e.frame << '\t' << e.value.literal();
        break;
      case EventKind::Raise:
        out << '\t' << e.name << '\t' << lang::quote(e.text) << '\t' << e.function << '\t'
            << e.line << '\t' << e.frame;
        break;
      case EventKind::Out:
        out << '\t' << lang::quote(e.text);
        break;
    }
    out << '\n';
  }
  const Outcome& o = trace.outcome;
  out << "END\t" << to_string(o.kind) << '\t' << trace.step_count;
  if (o.kind == OutcomeKind::Completed) {
    out << '\t' << o.value.literal();
  } else if (o.kind == OutcomeKind::Raised) {
    out << '\t' << o.raise_kind << '\t' << lang::quote(o.message) << '\t' << o.function << '\t'
        << o.line;
  }
  out << '\n';
  return out.str();
}

ExecutionTrace parse_trace(const std::string& text) {
  ExecutionTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (ended) throw TraceFormatError(lineno, "content after END");
    std::vector<std::string> f = split_tabs(line);
    auto need = [&](std::size_t n) {
      if (f.size() != n)
        throw TraceFormatError(lineno, "expected " + std::to_string(n) + " fields, got " +
                                           std::to_string(f.size()));
    };
    if (f[0] == "ENTRY") {
      need(2);
      trace.entry_function = f[1];
      continue;
    }
    if (f[0] == "END") {
      if (f.size() < 3) throw TraceFormatError(lineno, "short END record");
      trace.step_count = int_of(f[2], lineno);
      Outcome& o = trace.outcome;
      if (f[1] == "Completed") {
        need(4);
        o.kind = OutcomeKind::Completed;
        o.value = value_of(f[3], lineno);
      } else if (f[1] == "Raised") {
        need(7);
        o.kind = OutcomeKind::Raised;
        o.raise_kind = f[3];
        o.message = unquote(f[4], lineno);
        o.function = f[5];
        o.line = int_of(f[6], lineno);
      } else if (f[1] == "BudgetExceeded") {
        need(3);
        o.kind = OutcomeKind::BudgetExceeded;
      } else {
        throw TraceFormatError(lineno, "unknown outcome '" + f[1] + "'");
      }
      ended = true;
      continue;
    }
    if (f.size() < 2) throw TraceFormatError(lineno, "missing event kind");
    TraceEvent e;
    e.idx = int_of(f[0], lineno);
    if (e.idx != static_cast<int>(trace.events.size()))
      throw TraceFormatError(lineno, "event index out of sequence");
    const std::string& k = f[1];
    if (k == "STMT") {
      need(6);
      e.kind = EventKind::StmtEnter;
      e.stmt_id = int_of(f[2], lineno);
      e.function = f[3];
      e.line = int_of(f[4], lineno);
      e.frame = int_of(f[5], lineno);
    } else if (k == "WRITE") {
      need(5);
      e.kind = EventKind::VarWrite;
      e.frame = int_of(f[2], lineno);
      e.name = f[3];
      e.value = value_of(f[4], lineno);
    } else if (k == "CALL") {
      need(5);
      e.kind = EventKind::CallEnter;
      e.function = f[2];
      Value args = value_of(f[3], lineno);
      if (!args.is_array()) throw TraceFormatError(lineno, "call arguments must be a list");
      e.args = args.as_array();
      e.frame = int_of(f[4], lineno);
    } else if (k == "RET") {
      need(4);
      e.kind = EventKind::Ret;
      e.frame = int_of(f[2], lineno);
      e.value = value_of(f[3], lineno);
    } else if (k == "RAISE") {
      need(7);
      e.kind = EventKind::Raise;
      e.name = f[2];
      e.text = unquote(f[3], lineno);
      e.function = f[4];
      e.line = int_of(f[5], lineno);
      e.frame = int_of(f[6], lineno);
    } else if (k == "OUT") {
      need(3);
      e.kind = EventKind::Out;
      e.text = unquote(f[2], lineno);
    } else {
      throw TraceFormatError(lineno, "unknown event kind '" + k + "'");
    }
    trace.events.push_back(std::move(e));
  }
  if (!ended) throw TraceFormatError(lineno, "missing END record");
  return trace;
}

}  // namespace tracefix::interp
