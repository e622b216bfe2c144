#include "tracefix/interp/interpreter.hpp"

#include <limits>
#include <unordered_map>

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"

namespace tracefix::interp {

namespace {

using lang::BinaryOp;
using lang::Expr;
using lang::ExprKind;
using lang::Stmt;
using lang::StmtKind;

struct Fault {
  const char* kind;
  std::string message;
};

struct Halt {};

struct Frame {
  int id = 0;
  const lang::FunctionDecl* fn = nullptr;
  std::unordered_map<std::string, Value> env;
  int current_stmt_event = -1;
  int return_stmt_event = -1;
  Value return_value;
};

enum class Flow { Normal, Return };

class Interpreter {
 public:
  Interpreter(const lang::Program& program, const RuntimeLimits& limits,
              ExecutionObserver* observer)
      : program_(program), limits_(limits), observer_(observer) {}

  ExecutionTrace run(const EntryCall& entry) {
    const lang::FunctionDecl* fn = program_.find_function(entry.function);
    if (!fn) throw lang::UnknownFunction(entry.function);
    if (fn->params.size() != entry.args.size())
      throw lang::ArityError(fn->line, "entry function '" + fn->name + "' expects " +
                                           std::to_string(fn->params.size()) + " argument(s)");
    trace_.entry_function = fn->name;
    frames_.reserve(kMaxCallDepth + 2);
    try {
      frames_.push_back(Frame{});
      Frame& f = frames_.back();
      f.id = next_frame_++;
      f.fn = fn;
      for (std::size_t i = 0; i < entry.args.size(); ++i)
        write(frames_.size() - 1, fn->params[i], entry.args[i], -1);
      exec_block(fn->body, 0, -1);
      Value result = frames_[0].return_value;
      TraceEvent ret;
      ret.kind = EventKind::Ret;
      ret.frame = 0;
      ret.value = result;
      emit(std::move(ret));
      trace_.outcome.kind = OutcomeKind::Completed;
      trace_.outcome.value = result;
    } catch (const Fault& fault) {
      raise(fault);
    } catch (const Halt&) {
      trace_.outcome = Outcome{};
      trace_.outcome.kind = OutcomeKind::BudgetExceeded;
    }
    trace_.step_count = steps_;
    return std::move(trace_);
  }

 private:
  void raise(const Fault& fault) {
    const Frame& top = frames_.back();
    TraceEvent e;
    e.kind = EventKind::Raise;
    e.name = fault.kind;
    e.text = fault.message;
    e.function = top.fn->name;
    e.line = current_line_;
    e.frame = top.id;
    // The raise record itself is never dropped by the event cap.
    e.idx = static_cast<int>(trace_.events.size());
    trace_.events.push_back(e);
    trace_.outcome = Outcome{};
    trace_.outcome.kind = OutcomeKind::Raised;
    trace_.outcome.raise_kind = fault.kind;
    trace_.outcome.message = fault.message;
    trace_.outcome.function = e.function;
    trace_.outcome.line = e.line;
  }

  int emit(TraceEvent e) {
    if (static_cast<long long>(trace_.events.size()) >= limits_.max_trace_events) throw Halt{};
    e.idx = static_cast<int>(trace_.events.size());
    trace_.events.push_back(std::move(e));
    return trace_.events.back().idx;
  }

  int enter(const Stmt& s, std::size_t fi, int governing) {
    if (steps_ >= limits_.step_budget) throw Halt{};
    ++steps_;
    Frame& f = frames_[fi];
    TraceEvent e;
    e.kind = EventKind::StmtEnter;
    e.stmt_id = s.id;
    e.function = f.fn->name;
    e.line = s.line;
    e.frame = f.id;
    int idx = emit(std::move(e));
    frames_[fi].current_stmt_event = idx;
    current_line_ = s.line;
    if (observer_ && governing >= 0) observer_->on_control(idx, governing);
    return idx;
  }

  void write(std::size_t fi, const std::string& name, Value v, int stmt_event) {
    Frame& f = frames_[fi];
    TraceEvent e;
    e.kind = EventKind::VarWrite;
    e.frame = f.id;
    e.name = name;
    e.value = v;
    emit(std::move(e));
    frames_[fi].env[name] = std::move(v);
    if (observer_) observer_->on_write(frames_[fi].id, name, stmt_event);
  }

  const Value& read(std::size_t fi, const std::string& name) {
    Frame& f = frames_[fi];
    auto it = f.env.find(name);
    if (it == f.env.end()) throw Fault{raise_kind::kTypeError, "unbound variable '" + name + "'"};
    if (observer_) observer_->on_read(f.id, name, f.current_stmt_event);
    return it->second;
  }

  Flow exec_block(const lang::Block& block, std::size_t fi, int governing) {
    for (const Stmt& s : block)
      if (exec(s, fi, governing) == Flow::Return) return Flow::Return;
    return Flow::Normal;
  }

  static std::int64_t need_int(const Value& v, const char* what) {
    if (!v.is_int())
      throw Fault{raise_kind::kTypeError, std::string(what) + " expects Int, got " +
                                               to_string(v.kind())};
    return v.as_int();
  }

  static bool need_bool(const Value& v, const char* what) {
    if (!v.is_bool())
      throw Fault{raise_kind::kTypeError, std::string(what) + " expects Bool, got " +
                                               to_string(v.kind())};
    return v.as_bool();
  }

  Flow exec(const Stmt& s, std::size_t fi, int governing) {
    switch (s.kind) {
      case StmtKind::Let:
      case StmtKind::Assign: {
        int ev = enter(s, fi, governing);
        Value v = eval(s.exprs[0], fi);
        write(fi, s.name, std::move(v), ev);
        return Flow::Normal;
      }
      case StmtKind::IndexAssign: {
        int ev = enter(s, fi, governing);
        std::int64_t i = need_int(eval(s.exprs[0], fi), "index");
        Value v = eval(s.exprs[1], fi);
        const Value& target = read(fi, s.name);
        if (!target.is_array())
          throw Fault{raise_kind::kTypeError, "indexed assignment to " +
                                                  std::string(to_string(target.kind()))};
        Value::Array items = target.as_array();
        if (i < 0 || i >= static_cast<std::int64_t>(items.size()))
          throw Fault{raise_kind::kIndexOutOfBounds,
                      "index " + std::to_string(i) + " out of bounds for length " +
                          std::to_string(items.size())};
        items[static_cast<std::size_t>(i)] = std::move(v);
        write(fi, s.name, Value::array(std::move(items)), ev);
        return Flow::Normal;
      }
      case StmtKind::If: {
        int ev = enter(s, fi, governing);
        bool c = need_bool(eval(s.exprs[0], fi), "if condition");
        if (c) return exec_block(s.blocks[0], fi, ev);
        if (s.blocks.size() > 1) return exec_block(s.blocks[1], fi, ev);
        return Flow::Normal;
      }
      case StmtKind::While: {
        for (;;) {
          int ev = enter(s, fi, governing);
          bool c = need_bool(eval(s.exprs[0], fi), "while condition");
          if (!c) return Flow::Normal;
          if (exec_block(s.blocks[0], fi, ev) == Flow::Return) return Flow::Return;
        }
      }
      case StmtKind::ForRange: {
        int ev = enter(s, fi, governing);
        std::int64_t lo = need_int(eval(s.exprs[0], fi), "range bound");
        std::int64_t hi = need_int(eval(s.exprs[1], fi), "range bound");
        write(fi, s.name, Value::integer(lo), ev);
        bool go = lo < hi;
        while (go) {
          if (exec_block(s.blocks[0], fi, ev) == Flow::Return) return Flow::Return;
          ev = enter(s, fi, governing);
          std::int64_t cur = need_int(read(fi, s.name), "loop variable");
          if (cur == std::numeric_limits<std::int64_t>::max())
            throw Fault{raise_kind::kIntegerOverflow, "loop counter overflow"};
          write(fi, s.name, Value::integer(cur + 1), ev);
          go = cur + 1 < hi;
        }
        return Flow::Normal;
      }
      case StmtKind::Return: {
        int ev = enter(s, fi, governing);
        Value v = s.exprs.empty() ? Value::unit() : eval(s.exprs[0], fi);
        frames_[fi].return_value = std::move(v);
        frames_[fi].return_stmt_event = ev;
        return Flow::Return;
      }
      case StmtKind::Throw: {
        enter(s, fi, governing);
        Value v = eval(s.exprs[0], fi);
        throw Fault{raise_kind::kException, v.display()};
      }
      case StmtKind::Assert: {
        enter(s, fi, governing);
        if (!need_bool(eval(s.exprs[0], fi), "assert"))
          throw Fault{raise_kind::kAssertionFailure,
                      "assertion failed: " + lang::pretty_print(s.exprs[0])};
        return Flow::Normal;
      }
      case StmtKind::Print: {
        enter(s, fi, governing);
        Value v = eval(s.exprs[0], fi);
        TraceEvent e;
        e.kind = EventKind::Out;
        e.text = v.display();
        emit(std::move(e));
        return Flow::Normal;
      }
      case StmtKind::ExprStmt: {
        enter(s, fi, governing);
        eval(s.exprs[0], fi);
        return Flow::Normal;
      }
    }
    return Flow::Normal;
  }

  Value call(const Expr& e, std::size_t fi) {
    std::vector<Value> args;
    args.reserve(e.children.size());
    for (const Expr& a : e.children) args.push_back(eval(a, fi));
    const lang::FunctionDecl* fn = program_.find_function(e.text);
    if (!fn) throw Fault{raise_kind::kTypeError, "unknown function '" + e.text + "'"};
    if (frames_.size() >= static_cast<std::size_t>(kMaxCallDepth))
      throw Fault{raise_kind::kStackOverflow, "call depth exceeds " + std::to_string(kMaxCallDepth)};
    int caller_event = frames_[fi].current_stmt_event;
    int caller_line = current_line_;
    Frame callee;
    callee.id = next_frame_++;
    callee.fn = fn;
    TraceEvent ce;
    ce.kind = EventKind::CallEnter;
    ce.function = fn->name;
    ce.args = args;
    ce.frame = callee.id;
    emit(std::move(ce));
    frames_.push_back(std::move(callee));
    std::size_t ci = frames_.size() - 1;
    for (std::size_t i = 0; i < args.size(); ++i) write(ci, fn->params[i], args[i], caller_event);
    exec_block(fn->body, ci, caller_event);
    Value result = frames_[ci].return_value;
    int ret_stmt = frames_[ci].return_stmt_event;
    int id = frames_[ci].id;
    TraceEvent re;
    re.kind = EventKind::Ret;
    re.frame = id;
    re.value = result;
    emit(std::move(re));
    frames_.pop_back();
    current_line_ = caller_line;
    if (observer_ && ret_stmt >= 0) observer_->on_return_value(caller_event, ret_stmt);
    return result;
  }

  Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (op == BinaryOp::Add) {
      if (a.is_str() && b.is_str()) return Value::string(a.as_str() + b.as_str());
      if (a.is_array() && b.is_array()) {
        Value::Array items = a.as_array();
        const auto& tail = b.as_array();
        items.insert(items.end(), tail.begin(), tail.end());
        return Value::array(std::move(items));
      }
    }
    std::int64_t x = need_int(a, lang::to_string(op));
    std::int64_t y = need_int(b, lang::to_string(op));
    std::int64_t r = 0;
    switch (op) {
      case BinaryOp::Add:
        if (__builtin_add_overflow(x, y, &r)) throw Fault{raise_kind::kIntegerOverflow, "overflow in +"};
        return Value::integer(r);
      case BinaryOp::Sub:
        if (__builtin_sub_overflow(x, y, &r)) throw Fault{raise_kind::kIntegerOverflow, "overflow in -"};
        return Value::integer(r);
      case BinaryOp::Mul:
        if (__builtin_mul_overflow(x, y, &r)) throw Fault{raise_kind::kIntegerOverflow, "overflow in *"};
        return Value::integer(r);
      case BinaryOp::Div:
        if (y == 0) throw Fault{raise_kind::kDivisionByZero, "division by zero"};
        if (x == std::numeric_limits<std::int64_t>::min() && y == -1)
          throw Fault{raise_kind::kIntegerOverflow, "overflow in /"};
        return Value::integer(x / y);
      case BinaryOp::Mod:
        if (y == 0) throw Fault{raise_kind::kDivisionByZero, "modulo by zero"};
        if (y == -1) return Value::integer(0);
        return Value::integer(x % y);
      default: break;
    }
    throw Fault{raise_kind::kTypeError, "bad arithmetic operator"};
  }

  Value compare(BinaryOp op, const Value& a, const Value& b) {
    if (op == BinaryOp::Eq) return Value::boolean(a == b);
    if (op == BinaryOp::Ne) return Value::boolean(!(a == b));
    int c = 0;
    if (a.is_int() && b.is_int()) {
      c = a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    } else if (a.is_str() && b.is_str()) {
      c = a.as_str().compare(b.as_str());
    } else {
      throw Fault{raise_kind::kTypeError, std::string("cannot order ") + to_string(a.kind()) +
                                               " and " + to_string(b.kind())};
    }
    switch (op) {
      case BinaryOp::Lt: return Value::boolean(c < 0);
      case BinaryOp::Le: return Value::boolean(c <= 0);
      case BinaryOp::Gt: return Value::boolean(c > 0);
      default: return Value::boolean(c >= 0);
    }
  }

  Value eval(const Expr& e, std::size_t fi) {
    switch (e.kind) {
      case ExprKind::IntLit: return Value::integer(e.int_value);
      case ExprKind::BoolLit: return Value::boolean(e.bool_value);
      case ExprKind::StrLit: return Value::string(e.text);
      case ExprKind::ArrayLit: {
        Value::Array items;
        items.reserve(e.children.size());
        for (const Expr& c : e.children) items.push_back(eval(c, fi));
        return Value::array(std::move(items));
      }
      case ExprKind::Var: return read(fi, e.text);
      case ExprKind::Unary: {
        Value v = eval(e.children[0], fi);
        if (e.unary_op == lang::UnaryOp::Not) return Value::boolean(!need_bool(v, "!"));
        std::int64_t x = need_int(v, "unary -");
        if (x == std::numeric_limits<std::int64_t>::min())
          throw Fault{raise_kind::kIntegerOverflow, "overflow in unary -"};
        return Value::integer(-x);
      }
      case ExprKind::Binary: {
        if (e.binary_op == BinaryOp::And || e.binary_op == BinaryOp::Or) {
          bool l = need_bool(eval(e.children[0], fi), lang::to_string(e.binary_op));
          if (e.binary_op == BinaryOp::And && !l) return Value::boolean(false);
          if (e.binary_op == BinaryOp::Or && l) return Value::boolean(true);
          return Value::boolean(need_bool(eval(e.children[1], fi), lang::to_string(e.binary_op)));
        }
        Value l = eval(e.children[0], fi);
        Value r = eval(e.children[1], fi);
        if (lang::is_comparison(e.binary_op)) return compare(e.binary_op, l, r);
        return arithmetic(e.binary_op, l, r);
      }
      case ExprKind::Call: return call(e, fi);
      case ExprKind::Index: {
        Value base = eval(e.children[0], fi);
        std::int64_t i = need_int(eval(e.children[1], fi), "index");
        std::size_t n = 0;
        if (base.is_array()) {
          n = base.as_array().size();
        } else if (base.is_str()) {
          n = base.as_str().size();
        } else {
          throw Fault{raise_kind::kTypeError,
                      std::string("cannot index ") + to_string(base.kind())};
        }
        if (i < 0 || i >= static_cast<std::int64_t>(n))
          throw Fault{raise_kind::kIndexOutOfBounds, "index " + std::to_string(i) +
                                                         " out of bounds for length " +
                                                         std::to_string(n)};
        if (base.is_str()) return Value::string(base.as_str().substr(static_cast<std::size_t>(i), 1));
        return base.as_array()[static_cast<std::size_t>(i)];
      }
      case ExprKind::Len: {
        Value v = eval(e.children[0], fi);
        if (v.is_array()) return Value::integer(static_cast<std::int64_t>(v.as_array().size()));
        if (v.is_str()) return Value::integer(static_cast<std::int64_t>(v.as_str().size()));
        throw Fault{raise_kind::kTypeError, std::string("len of ") + to_string(v.kind())};
      }
    }
    throw Fault{raise_kind::kTypeError, "bad expression"};
  }

  const lang::Program& program_;
  RuntimeLimits limits_;
  ExecutionObserver* observer_;
  ExecutionTrace trace_;
  std::vector<Frame> frames_;
  int next_frame_ = 0;
  long long steps_ = 0;
  int current_line_ = 0;
};

}  // namespace

ExecutionTrace execute(const lang::Program& program, const EntryCall& entry,
                       const RuntimeLimits& limits, ExecutionObserver* observer) {
  return Interpreter(program, limits, observer).run(entry);
}

}  // namespace tracefix::interp
