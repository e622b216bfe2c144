#include "reference_eval.hpp"

#include <climits>
#include <stdexcept>

namespace tracefix::testing {

namespace {

using interp::Value;
using lang::BinaryOp;
using lang::Expr;
using lang::ExprKind;
using lang::Stmt;
using lang::StmtKind;

struct Raised {
  std::string kind;
};
struct OutOfSteps {};
struct Returned {
  Value value;
};

struct Ctx {
  const lang::Program* program;
  long long budget;
  bool record;
  ReferenceResult* out;
  // Frame stack: id, function, env.
  struct F {
    int id;
    std::string function;
    interp::Bindings env;
    int line = 0;
  };
  std::vector<F> stack;
  int next_id = 0;

  void step(const Stmt& s) {
    if (out->steps == budget) throw OutOfSteps{};
    ++out->steps;
    stack.back().line = s.line;
    if (record) {
      interp::FrameStates st;
      for (const F& f : stack) st[f.id] = f.env;
      out->states.push_back(std::move(st));
      out->step_info.push_back({s.id, stack.back().function, s.line, stack.back().id});
    }
  }

  static long long as_int(const Value& v) {
    if (!v.is_int()) throw Raised{"TypeError"};
    return v.as_int();
  }
  static bool as_bool(const Value& v) {
    if (!v.is_bool()) throw Raised{"TypeError"};
    return v.as_bool();
  }

  Value ev(const Expr& e) {
    auto& env = stack.back().env;
    switch (e.kind) {
      case ExprKind::IntLit: return Value::integer(e.int_value);
      case ExprKind::BoolLit: return Value::boolean(e.bool_value);
      case ExprKind::StrLit: return Value::string(e.text);
      case ExprKind::ArrayLit: {
        Value::Array a;
        for (const Expr& c : e.children) a.push_back(ev(c));
        return Value::array(a);
      }
      case ExprKind::Var: {
        auto it = env.find(e.text);
        if (it == env.end()) throw Raised{"TypeError"};
        return it->second;
      }
      case ExprKind::Unary: {
        Value v = ev(e.children[0]);
        if (e.unary_op == lang::UnaryOp::Not) return Value::boolean(!as_bool(v));
        long long x = as_int(v);
        if (x == LLONG_MIN) throw Raised{"IntegerOverflow"};
        return Value::integer(-x);
      }
      case ExprKind::Binary: return binary(e);
      case ExprKind::Call: {
        std::vector<Value> args;
        for (const Expr& c : e.children) args.push_back(ev(c));
        return call(e.text, args);
      }
      case ExprKind::Index: {
        Value b = ev(e.children[0]);
        long long i = as_int(ev(e.children[1]));
        if (b.is_array()) {
          if (i < 0 || i >= static_cast<long long>(b.as_array().size()))
            throw Raised{"IndexOutOfBounds"};
          return b.as_array()[static_cast<std::size_t>(i)];
        }
        if (b.is_str()) {
          if (i < 0 || i >= static_cast<long long>(b.as_str().size()))
            throw Raised{"IndexOutOfBounds"};
          return Value::string(std::string(1, b.as_str()[static_cast<std::size_t>(i)]));
        }
        throw Raised{"TypeError"};
      }
      case ExprKind::Len: {
        Value v = ev(e.children[0]);
        if (v.is_array()) return Value::integer(static_cast<long long>(v.as_array().size()));
        if (v.is_str()) return Value::integer(static_cast<long long>(v.as_str().size()));
        throw Raised{"TypeError"};
      }
    }
    throw std::logic_error("unreachable");
  }

  Value binary(const Expr& e) {
    BinaryOp op = e.binary_op;
    if (op == BinaryOp::And) {
      if (!as_bool(ev(e.children[0]))) return Value::boolean(false);
      return Value::boolean(as_bool(ev(e.children[1])));
    }
    if (op == BinaryOp::Or) {
      if (as_bool(ev(e.children[0]))) return Value::boolean(true);
      return Value::boolean(as_bool(ev(e.children[1])));
    }
    Value a = ev(e.children[0]);
    Value b = ev(e.children[1]);
    if (op == BinaryOp::Eq) return Value::boolean(a == b);
    if (op == BinaryOp::Ne) return Value::boolean(!(a == b));
    if (op == BinaryOp::Add && a.is_str() && b.is_str()) return Value::string(a.as_str() + b.as_str());
    if (op == BinaryOp::Add && a.is_array() && b.is_array()) {
      Value::Array r = a.as_array();
      for (const Value& v : b.as_array()) r.push_back(v);
      return Value::array(r);
    }
    if (lang::is_comparison(op) && a.is_str() && b.is_str()) {
      const std::string &x = a.as_str(), &y = b.as_str();
      switch (op) {
        case BinaryOp::Lt: return Value::boolean(x < y);
        case BinaryOp::Le: return Value::boolean(x <= y);
        case BinaryOp::Gt: return Value::boolean(x > y);
        default: return Value::boolean(x >= y);
      }
    }
    long long x = as_int(a), y = as_int(b);
    // Wide arithmetic, then range check.
    __int128 r = 0;
    switch (op) {
      case BinaryOp::Lt: return Value::boolean(x < y);
      case BinaryOp::Le: return Value::boolean(x <= y);
      case BinaryOp::Gt: return Value::boolean(x > y);
      case BinaryOp::Ge: return Value::boolean(x >= y);
      case BinaryOp::Add: r = static_cast<__int128>(x) + y; break;
      case BinaryOp::Sub: r = static_cast<__int128>(x) - y; break;
      case BinaryOp::Mul: r = static_cast<__int128>(x) * y; break;
      case BinaryOp::Div:
        if (y == 0) throw Raised{"DivisionByZero"};
        r = static_cast<__int128>(x) / y;
        break;
      case BinaryOp::Mod:
        if (y == 0) throw Raised{"DivisionByZero"};
        r = static_cast<__int128>(x) % y;
        break;
      default: throw std::logic_error("operator");
    }
    if (r > LLONG_MAX || r < LLONG_MIN) throw Raised{"IntegerOverflow"};
    return Value::integer(static_cast<long long>(r));
  }

  Value call(const std::string& name, const std::vector<Value>& args) {
    const lang::FunctionDecl* fn = program->find_function(name);
    if (static_cast<int>(stack.size()) >= 400) throw Raised{"StackOverflow"};
    F frame{next_id++, name, {}, 0};
    for (std::size_t i = 0; i < args.size(); ++i) frame.env[fn->params[i]] = args[i];
    stack.push_back(frame);
    Value result;
    try {
      block(fn->body);
    } catch (Returned& r) {
      result = r.value;
    }
    stack.pop_back();
    return result;
  }

  void block(const lang::Block& b) {
    for (const Stmt& s : b) stmt(s);
  }

  void stmt(const Stmt& s) {
    auto& env = stack.back().env;
    switch (s.kind) {
      case StmtKind::Let:
      case StmtKind::Assign: {
        step(s);
        Value v = ev(s.exprs[0]);
        stack.back().env[s.name] = v;
        return;
      }
      case StmtKind::IndexAssign: {
        step(s);
        long long i = as_int(ev(s.exprs[0]));
        Value v = ev(s.exprs[1]);
        auto it = env.find(s.name);
        if (it == env.end() || !it->second.is_array()) throw Raised{"TypeError"};
        Value::Array a = it->second.as_array();
        if (i < 0 || i >= static_cast<long long>(a.size())) throw Raised{"IndexOutOfBounds"};
        a[static_cast<std::size_t>(i)] = v;
        stack.back().env[s.name] = Value::array(a);
        return;
      }
      case StmtKind::If:
        step(s);
        if (as_bool(ev(s.exprs[0])))
          block(s.blocks[0]);
        else if (s.blocks.size() > 1)
          block(s.blocks[1]);
        return;
      case StmtKind::While:
        for (;;) {
          step(s);
          if (!as_bool(ev(s.exprs[0]))) return;
          block(s.blocks[0]);
        }
      case StmtKind::ForRange: {
        step(s);
        long long lo = as_int(ev(s.exprs[0]));
        long long hi = as_int(ev(s.exprs[1]));
        for (long long i = lo;;) {
          stack.back().env[s.name] = Value::integer(i);
          if (!(i < hi)) return;
          block(s.blocks[0]);
          step(s);
          long long cur = as_int(stack.back().env[s.name]);
          if (cur == LLONG_MAX) throw Raised{"IntegerOverflow"};
          i = cur + 1;
        }
      }
      case StmtKind::Return:
        step(s);
        throw Returned{s.exprs.empty() ? Value() : ev(s.exprs[0])};
      case StmtKind::Throw:
        step(s);
        ev(s.exprs[0]);
        throw Raised{"Exception"};
      case StmtKind::Assert:
        step(s);
        if (!as_bool(ev(s.exprs[0]))) throw Raised{"AssertionFailure"};
        return;
      case StmtKind::Print:
        step(s);
        out->output += ev(s.exprs[0]).display() + "\n";
        return;
      case StmtKind::ExprStmt:
        step(s);
        ev(s.exprs[0]);
        return;
    }
  }
};

}  // namespace

ReferenceResult reference_run(const lang::Program& program, const interp::EntryCall& entry,
                              long long step_budget, bool record_states) {
  ReferenceResult out;
  Ctx ctx{&program, step_budget, record_states, &out, {}, 0};
  try {
    out.value = ctx.call(entry.function, entry.args);
    out.kind = interp::OutcomeKind::Completed;
  } catch (const Raised& r) {
    out.kind = interp::OutcomeKind::Raised;
    out.raise_kind = r.kind;
    out.raise_function = ctx.stack.back().function;
    out.raise_line = ctx.stack.back().line;
  } catch (const OutOfSteps&) {
    out.kind = interp::OutcomeKind::BudgetExceeded;
  }
  return out;
}

}  // namespace tracefix::testing
