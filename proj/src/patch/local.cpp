#include "tracefix/patch/local.hpp"

#include <functional>
#include <set>

#include "tracefix/lang/printer.hpp"

namespace tracefix::patch {

using lang::BinaryOp;
using lang::Expr;
using lang::ExprKind;
using lang::Stmt;
using lang::StmtKind;
using Kind = interp::Value::Kind;

const std::vector<std::string>& local_templates() {
  static const std::vector<std::string> names{
      "local:relational-flip", "local:arith-swap",     "local:literal-adjust", "local:negate-condition",
      "local:bound-adjust",    "local:var-substitute", "local:call-mutate",    "local:delete",
      "local:guard",           "local:return-replace"};
  return names;
}

int location_stmt(const lang::Program& program, const faultloc::RepairLocation& loc) {
  lang::ProgramIndex index(program);
  if (index.contains(loc.stmt_id)) {
    const auto& info = index.info(loc.stmt_id);
    if (info.function == loc.function && info.stmt->line == loc.line) return loc.stmt_id;
  }
  if (!program.find_function(loc.function)) return -1;
  for (int id : index.locate(loc.function, loc.line))
    if (!index.stmt(id).synthetic) return id;
  return -1;
}

std::map<std::string, Kind> variable_kinds(const interp::ExecutionTrace& trace, int idx) {
  std::map<std::string, Kind> out;
  if (idx < 0 || idx >= static_cast<int>(trace.events.size())) return out;
  const auto& ev = trace.events[static_cast<std::size_t>(idx)];
  auto states = interp::state_at(trace, static_cast<std::size_t>(idx));
  auto it = states.find(ev.frame);
  if (it == states.end()) return out;
  for (const auto& [name, v] : it->second) out[name] = v.kind();
  return out;
}

Expr offset_expr(const Expr& e, std::int64_t d) {
  if (e.kind == ExprKind::IntLit) return Expr::integer(e.int_value + d);
  if (e.kind == ExprKind::Binary && e.children[1].kind == ExprKind::IntLit &&
      (e.binary_op == BinaryOp::Add || e.binary_op == BinaryOp::Sub)) {
    std::int64_t c = e.children[1].int_value;
    std::int64_t total = e.binary_op == BinaryOp::Add ? c + d : -c + d;
    if (total == 0) return e.children[0];
    if (total > 0) return Expr::binary(BinaryOp::Add, e.children[0], Expr::integer(total));
    return Expr::binary(BinaryOp::Sub, e.children[0], Expr::integer(-total));
  }
  return Expr::binary(d > 0 ? BinaryOp::Add : BinaryOp::Sub, e, Expr::integer(d > 0 ? d : -d));
}

namespace {

struct Node {
  std::vector<int> path;
  const Expr* expr;
  const Expr* parent;
};

// Header expression nodes in pre-order.
std::vector<Node> header_nodes(const Stmt& s) {
  std::vector<Node> out;
  std::function<void(const Expr&, std::vector<int>&, const Expr*)> walk =
      [&](const Expr& e, std::vector<int>& path, const Expr* parent) {
        out.push_back({path, &e, parent});
        for (std::size_t i = 0; i < e.children.size(); ++i) {
          path.push_back(static_cast<int>(i));
          walk(e.children[i], path, &e);
          path.pop_back();
        }
      };
  for (std::size_t i = 0; i < s.exprs.size(); ++i) {
    std::vector<int> path{static_cast<int>(i)};
    walk(s.exprs[i], path, nullptr);
  }
  return out;
}

}  // namespace

std::vector<Expr> guard_expressions(const Stmt& stmt, const std::map<std::string, Kind>& kinds) {
  auto kind_is = [&](const std::string& name, Kind k) {
    auto it = kinds.find(name);
    return it == kinds.end() || it->second == k;
  };
  std::vector<Expr> guards;
  std::set<std::string> seen;
  auto push = [&](Expr g) {
    if (seen.insert(lang::pretty_print(g)).second) guards.push_back(std::move(g));
  };
  auto nodes = header_nodes(stmt);
  std::vector<std::string> int_vars, array_vars;
  for (const Node& n : nodes) {
    if (n.expr->kind != ExprKind::Var) continue;
    const std::string& v = n.expr->text;
    if (kind_is(v, Kind::Int) && std::find(int_vars.begin(), int_vars.end(), v) == int_vars.end())
      int_vars.push_back(v);
    auto k = kinds.find(v);
    if (k != kinds.end() && k->second == Kind::Array &&
        std::find(array_vars.begin(), array_vars.end(), v) == array_vars.end())
      array_vars.push_back(v);
  }
  for (const Node& n : nodes)
    if (n.expr->kind == ExprKind::Binary &&
        (n.expr->binary_op == BinaryOp::Div || n.expr->binary_op == BinaryOp::Mod))
      push(Expr::binary(BinaryOp::Ne, n.expr->children[1], Expr::integer(0)));
  for (const auto& v : int_vars) {
    push(Expr::binary(BinaryOp::Ne, Expr::var(v), Expr::integer(0)));
    push(Expr::binary(BinaryOp::Ge, Expr::var(v), Expr::integer(0)));
  }
  for (const Node& n : nodes)
    if (n.expr->kind == ExprKind::Index && n.expr->children[0].kind == ExprKind::Var) {
      const Expr& base = n.expr->children[0];
      push(Expr::binary(BinaryOp::Lt, n.expr->children[1], Expr::len(base)));
      push(Expr::binary(BinaryOp::Gt, Expr::len(base), Expr::integer(0)));
    }
  if (stmt.kind == StmtKind::IndexAssign) {
    push(Expr::binary(BinaryOp::Lt, stmt.exprs[0], Expr::len(Expr::var(stmt.name))));
    push(Expr::binary(BinaryOp::Gt, Expr::len(Expr::var(stmt.name)), Expr::integer(0)));
  }
  for (const auto& a : array_vars)
    push(Expr::binary(BinaryOp::Gt, Expr::len(Expr::var(a)), Expr::integer(0)));
  return guards;
}

namespace {

Expr with_op(const Expr& e, BinaryOp op) {
  Expr out = e;
  out.binary_op = op;
  return out;
}

bool is_cond_stmt(const Stmt& s) {
  return s.kind == StmtKind::If || s.kind == StmtKind::While || s.kind == StmtKind::Assert;
}

class Generator {
 public:
  Generator(const lang::Program& program, int id, const interp::ExecutionTrace* trace, int event_idx)
      : program_(program), index_(program), id_(id), stmt_(index_.stmt(id)), ref_(index_.ref_of(id)) {
    scope_ = index_.variables_in_scope(id);
    if (trace) kinds_ = variable_kinds(*trace, event_idx);
  }

  std::vector<std::pair<std::string, Edit>> run() {
    relational_flip();
    arith_swap();
    literal_adjust();
    negate_condition();
    bound_adjust();
    var_substitute();
    call_mutate();
    deletion();
    guards();
    return_replace();
    return std::move(out_);
  }

 private:
  void add(const char* strategy, Edit e) { out_.emplace_back(strategy, std::move(e)); }
  void replace(const char* strategy, const std::vector<int>& path, Expr e) {
    add(strategy, Edit::replace_expr(ref_, path, std::move(e)));
  }

  // Unknown kinds are treated as compatible.
  bool kind_is(const std::string& name, Kind k) const {
    auto it = kinds_.find(name);
    return it == kinds_.end() || it->second == k;
  }
  bool same_kind(const std::string& a, const std::string& b) const {
    auto ia = kinds_.find(a), ib = kinds_.find(b);
    if (ia == kinds_.end() || ib == kinds_.end()) return true;
    return ia->second == ib->second;
  }

  void relational_flip() {
    static const BinaryOp ops[] = {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt,
                                   BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne};
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind != ExprKind::Binary || !lang::is_comparison(n.expr->binary_op)) continue;
      for (BinaryOp op : ops)
        if (op != n.expr->binary_op) replace("local:relational-flip", n.path, with_op(*n.expr, op));
    }
  }

  void arith_swap() {
    static const BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                   BinaryOp::Mod};
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind != ExprKind::Binary) continue;
      BinaryOp cur = n.expr->binary_op;
      if (lang::is_arithmetic(cur)) {
        for (BinaryOp op : ops)
          if (op != cur) replace("local:arith-swap", n.path, with_op(*n.expr, op));
      } else if (cur == BinaryOp::And || cur == BinaryOp::Or) {
        replace("local:arith-swap", n.path,
                with_op(*n.expr, cur == BinaryOp::And ? BinaryOp::Or : BinaryOp::And));
      }
    }
  }

  void literal_adjust() {
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind != ExprKind::IntLit) continue;
      for (std::int64_t d : {1, -1}) {
        std::int64_t v = 0;
        if (__builtin_add_overflow(n.expr->int_value, d, &v)) continue;
        const Expr* p = n.parent;
        if (v == 0 && p && p->kind == ExprKind::Binary && n.path.back() == 1 &&
            (p->binary_op == BinaryOp::Add || p->binary_op == BinaryOp::Sub)) {
          std::vector<int> parent_path(n.path.begin(), n.path.end() - 1);
          replace("local:literal-adjust", parent_path, p->children[0]);
        } else {
          replace("local:literal-adjust", n.path, Expr::integer(v));
        }
      }
    }
  }

  void negate_condition() {
    if (!is_cond_stmt(stmt_)) return;
    const Expr& c = stmt_.exprs[0];
    if (c.kind == ExprKind::Unary && c.unary_op == lang::UnaryOp::Not)
      replace("local:negate-condition", {0}, c.children[0]);
    else
      replace("local:negate-condition", {0}, Expr::unary(lang::UnaryOp::Not, c));
  }

  void bound_adjust() {
    std::vector<std::vector<int>> targets;
    if (stmt_.kind == StmtKind::ForRange) {
      targets.push_back({0});
      targets.push_back({1});
    }
    if (stmt_.kind == StmtKind::IndexAssign) targets.push_back({0});
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind == ExprKind::Binary && lang::is_comparison(n.expr->binary_op)) {
        auto p = n.path;
        p.push_back(1);
        targets.push_back(p);
      }
      if (n.expr->kind == ExprKind::Index) {
        auto p = n.path;
        p.push_back(1);
        targets.push_back(p);
      }
    }
    for (const auto& path : targets) {
      const Expr* e = expr_at(stmt_, path);
      for (std::int64_t d : {1, -1}) replace("local:bound-adjust", path, offset_expr(*e, d));
    }
  }

  void var_substitute() {
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind != ExprKind::Var) continue;
      for (const std::string& v : scope_)
        if (v != n.expr->text && same_kind(v, n.expr->text))
          replace("local:var-substitute", n.path, Expr::var(v));
    }
    if (stmt_.kind == StmtKind::Assign || stmt_.kind == StmtKind::IndexAssign) {
      for (const std::string& v : scope_) {
        if (v == stmt_.name || !same_kind(v, stmt_.name)) continue;
        Stmt s = stmt_;
        s.name = v;
        add("local:var-substitute", Edit::replace_stmt(ref_, s));
      }
    }
  }

  void call_mutate() {
    for (const Node& n : header_nodes(stmt_)) {
      if (n.expr->kind != ExprKind::Call) continue;
      const auto& args = n.expr->children;
      for (std::size_t i = 0; i < args.size(); ++i)
        for (std::size_t j = i + 1; j < args.size(); ++j) {
          if (args[i] == args[j]) continue;
          Expr e = *n.expr;
          std::swap(e.children[i], e.children[j]);
          replace("local:call-mutate", n.path, e);
        }
      for (const auto& f : program_.functions) {
        if (f.name == n.expr->text || f.params.size() != args.size()) continue;
        Expr e = *n.expr;
        e.text = f.name;
        replace("local:call-mutate", n.path, e);
      }
    }
  }

  void deletion() {
    if (stmt_.kind != StmtKind::Let) add("local:delete", Edit::remove(ref_));
  }

  void guards() {
    std::vector<Expr> guards = guard_expressions(stmt_, kinds_);
    const lang::Block& block = index_.containing_block(id_);
    const int pos = index_.info(id_).position;
    const int room = static_cast<int>(block.size()) - pos;
    for (const Expr& g : guards)
      for (int span = 1; span <= 3 && span <= room; ++span)
        add("local:guard", Edit::wrap_if(ref_, g, span));
  }

  void return_replace() {
    if (stmt_.kind != StmtKind::Return || stmt_.exprs.empty()) return;
    for (const std::string& v : scope_)
      if (!(stmt_.exprs[0] == Expr::var(v))) replace("local:return-replace", {0}, Expr::var(v));
  }

  const lang::Program& program_;
  lang::ProgramIndex index_;
  int id_;
  const Stmt& stmt_;
  lang::StmtRef ref_;
  std::vector<std::string> scope_;
  std::map<std::string, Kind> kinds_;
  std::vector<std::pair<std::string, Edit>> out_;
};

}  // namespace

std::vector<Patch> generate_local(const lang::Program& program,
                                  const faultloc::RepairLocation& location,
                                  const interp::ExecutionTrace* trace, int cap) {
  int id = location_stmt(program, location);
  if (id < 0) return {};
  lang::ProgramIndex index(program);
  if (index.stmt(id).synthetic) return {};
  int event_idx = location.event_idx;
  if (trace && (event_idx < 0 || event_idx >= static_cast<int>(trace->events.size()) ||
                trace->events[static_cast<std::size_t>(event_idx)].stmt_id != id))
    event_idx = -1;
  auto candidates = Generator(program, id, trace, event_idx).run();

  std::vector<Patch> out;
  std::set<std::string> texts{lang::pretty_print(program)};
  for (auto& [strategy, edit] : candidates) {
    if (static_cast<int>(out.size()) >= cap) break;
    Patch p;
    p.edits.push_back(std::move(edit));
    p.strategy = strategy;
    try {
      lang::Program patched = apply_patch(program, p);
      if (!texts.insert(lang::pretty_print(patched)).second) continue;
    } catch (const ApplyError&) {
      continue;
    }
    p.provenance = describe(p, &program);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tracefix::patch
