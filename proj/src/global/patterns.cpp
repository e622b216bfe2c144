#include <algorithm>
#include <functional>
#include <set>

#include "tracefix/global/global.hpp"
#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"
#include "tracefix/patch/local.hpp"

namespace tracefix::global {

using lang::BinaryOp;
using lang::Expr;
using lang::ExprKind;
using lang::Stmt;
using lang::StmtKind;
using Kind = interp::Value::Kind;

namespace {

struct Occurrence {
  std::vector<int> path;
  const Expr* expr;
};

std::vector<Occurrence> header_occurrences(const Stmt& s) {
  std::vector<Occurrence> out;
  std::function<void(const Expr&, std::vector<int>&)> walk = [&](const Expr& e, std::vector<int>& path) {
    out.push_back({path, &e});
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      walk(e.children[i], path);
      path.pop_back();
    }
  };
  for (std::size_t i = 0; i < s.exprs.size(); ++i) {
    std::vector<int> path{static_cast<int>(i)};
    walk(s.exprs[i], path);
  }
  return out;
}

bool is_arith(const Expr& e) { return e.kind == ExprKind::Binary && lang::is_arithmetic(e.binary_op); }

bool hoistable(const Expr& e) { return e.kind == ExprKind::Index || is_arith(e); }

Stmt make_stmt(StmtKind kind, std::string name, Expr value) {
  Stmt s;
  s.kind = kind;
  s.name = std::move(name);
  s.exprs.push_back(std::move(value));
  return s;
}

std::string fresh_name(const lang::FunctionDecl& f) {
  std::set<std::string> used(f.params.begin(), f.params.end());
  lang::for_each_stmt(f.body, f.name, [&](const Stmt& s, const std::string&) {
    if (!s.name.empty()) used.insert(s.name);
    for (const auto& e : s.exprs)
      lang::for_each_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Var) used.insert(x.text);
      });
  });
  for (int i = 0;; ++i) {
    std::string name = i == 0 ? "tmp" : "tmp" + std::to_string(i);
    if (!used.count(name)) return name;
  }
}

bool vars_in(const Expr& e, const std::vector<std::string>& scope) {
  for (const auto& v : lang::expr_vars(e))
    if (std::find(scope.begin(), scope.end(), v) == scope.end()) return false;
  return true;
}

class PatternGenerator {
 public:
  PatternGenerator(const lang::Program& program, int id, const PatternContext& ctx, int event_idx)
      : program_(program), index_(program), id_(id), stmt_(index_.stmt(id)), ref_(index_.ref_of(id)), ctx_(ctx) {
    scope_ = index_.variables_in_scope(id);
    if (ctx.trace) kinds_ = patch::variable_kinds(*ctx.trace, event_idx);
    for (const auto& loc : ctx.slice) {
      int sid = patch::location_stmt(program, loc);
      if (sid >= 0 && sid != id && index_.info(sid).function == index_.info(id).function &&
          !index_.stmt(sid).synthetic && std::find(slice_.begin(), slice_.end(), sid) == slice_.end())
        slice_.push_back(sid);
    }
  }

  std::vector<patch::Patch> run() {
    define_use();
    setup_use();
    wrap_default();
    return std::move(out_);
  }

 private:
  void emit(std::vector<patch::Edit> edits, const char* strategy, std::optional<patch::Relationship> rel,
            bool co_targeting) {
    patch::Patch p;
    p.edits = std::move(edits);
    p.strategy = strategy;
    if (p.edits.size() > 1) p.relationship = rel;
    p.co_targeting = co_targeting;
    out_.push_back(std::move(p));
  }

  bool int_like(const std::string& v) const {
    auto it = kinds_.find(v);
    return it == kinds_.end() || it->second == Kind::Int;
  }

  // Initializer of the Let that declares `name` in this function, if any.
  std::optional<Expr> initializer(const std::string& name) const {
    std::optional<Expr> out;
    const auto* f = program_.find_function(index_.info(id_).function);
    lang::for_each_stmt(f->body, f->name, [&](const Stmt& s, const std::string&) {
      if (!out && s.kind == StmtKind::Let && s.name == name) out = s.exprs[0];
    });
    return out;
  }

  // Statements before the location's ancestors in their blocks, nearest
  // first.
  std::vector<int> earlier_points() const {
    std::vector<int> out;
    for (int cur = id_; cur >= 0; cur = index_.info(cur).parent) {
      const lang::Block& block = index_.containing_block(cur);
      for (int pos = index_.info(cur).position - 1; pos >= 0; --pos) {
        const Stmt& s = block[static_cast<std::size_t>(pos)];
        if (!s.synthetic) out.push_back(s.id);
      }
      if (index_.info(cur).parent >= 0) out.push_back(index_.info(cur).parent);
    }
    return out;
  }

  void define_use() {
    std::string v = fresh_name(*program_.find_function(index_.info(id_).function));
    std::vector<Expr> seen;
    auto occ = header_occurrences(stmt_);
    for (const auto& o : occ) {
      const Expr& e = *o.expr;
      if (!hoistable(e) || std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
      seen.push_back(e);
      std::vector<patch::Edit> uses;
      for (const auto& other : occ)
        if (*other.expr == e) {
          bool nested = false;
          for (const auto& u : uses)
            if (other.path.size() > u.path.size() && std::equal(u.path.begin(), u.path.end(), other.path.begin()))
              nested = true;
          if (!nested) uses.push_back(patch::Edit::replace_expr(ref_, other.path, Expr::var(v)));
        }
      for (int point : earlier_points()) {
        if (!vars_in(e, index_.variables_in_scope(point))) continue;
        std::vector<patch::Edit> edits{
            patch::Edit::insert_before(index_.ref_of(point), make_stmt(StmtKind::Let, v, e))};
        edits.insert(edits.end(), uses.begin(), uses.end());
        emit(std::move(edits), "pattern:du", patch::Relationship::DU, true);
      }
    }
  }

  std::vector<Expr> setup_values(const std::string& x) const {
    std::vector<Expr> out;
    auto push = [&](Expr e) {
      if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
    };
    if (int_like(x)) {
      push(Expr::binary(BinaryOp::Add, Expr::var(x), Expr::integer(1)));
      push(Expr::binary(BinaryOp::Sub, Expr::var(x), Expr::integer(1)));
      push(Expr::integer(0));
    }
    if (auto init = initializer(x); init && vars_in(*init, scope_)) push(*init);
    return out;
  }

  std::vector<std::string> setup_variables() const {
    // Slice variables first, then the rest of the scope.
    std::set<std::string> on_slice;
    for (int sid : slice_) {
      for (const auto& r : lang::header_reads(index_.stmt(sid))) on_slice.insert(r);
      if (!index_.stmt(sid).name.empty()) on_slice.insert(index_.stmt(sid).name);
    }
    std::vector<std::string> first, rest;
    for (const auto& v : scope_) (on_slice.count(v) ? first : rest).push_back(v);
    first.insert(first.end(), rest.begin(), rest.end());
    return first;
  }

  void setup_use() {
    const auto* f = program_.find_function(index_.info(id_).function);
    std::set<std::string> params(f->params.begin(), f->params.end());
    for (const auto& x : setup_variables()) {
      for (const Expr& value : setup_values(x)) {
        patch::Edit setup = patch::Edit::insert_before(ref_, make_stmt(StmtKind::Assign, x, value));
        emit({setup}, "pattern:su", std::nullopt, false);
        for (int sid : slice_) {
          auto visible = index_.variables_in_scope(sid);
          if (std::find(visible.begin(), visible.end(), x) == visible.end()) continue;
          for (const auto& o : header_occurrences(index_.stmt(sid))) {
            const Expr& e = *o.expr;
            bool usable = (e.kind == ExprKind::Var && e.text != x && int_like(e.text) == int_like(x)) ||
                          e.kind == ExprKind::Call || e.kind == ExprKind::Len ||
                          (int_like(x) && (e.kind == ExprKind::Index || is_arith(e)));
            if (!usable || lang::expr_vars(e).count(x)) continue;
            emit({setup, patch::Edit::replace_expr(index_.ref_of(sid), o.path, Expr::var(x))}, "pattern:su",
                 patch::Relationship::SU, false);
          }
        }
      }
    }
  }

  // Variables assigned (not declared) inside the first `span` statements.
  std::vector<std::string> written(int span) const {
    std::vector<std::string> out;
    const lang::Block& block = index_.containing_block(id_);
    int pos = index_.info(id_).position;
    std::set<std::string> declared;
    for (int k = 0; k < span; ++k)
      lang::for_each_stmt(lang::Block{block[static_cast<std::size_t>(pos + k)]}, "",
                          [&](const Stmt& s, const std::string&) {
                            if (s.kind == StmtKind::Let || s.kind == StmtKind::ForRange) declared.insert(s.name);
                            if ((s.kind == StmtKind::Assign || s.kind == StmtKind::IndexAssign) &&
                                !declared.count(s.name) &&
                                std::find(out.begin(), out.end(), s.name) == out.end())
                              out.push_back(s.name);
                          });
    return out;
  }

  void wrap_default() {
    auto guards = patch::guard_expressions(stmt_, kinds_);
    const lang::Block& block = index_.containing_block(id_);
    const int room = static_cast<int>(block.size()) - index_.info(id_).position;
    for (const Expr& g : guards)
      for (int span = 1; span <= 3 && span <= room; ++span) {
        patch::Edit wrap = patch::Edit::wrap_if(ref_, g, span);
        emit({wrap}, "pattern:oa", std::nullopt, false);
        for (const auto& x : written(span)) {
          std::vector<Expr> defaults;
          if (int_like(x)) defaults.push_back(Expr::integer(0));
          if (auto init = initializer(x); init && vars_in(*init, scope_) &&
                                          std::find(defaults.begin(), defaults.end(), *init) == defaults.end())
            defaults.push_back(*init);
          for (const Expr& d : defaults)
            emit({patch::Edit::insert_before(ref_, make_stmt(StmtKind::Assign, x, d)), wrap}, "pattern:oa",
                 patch::Relationship::OA, true);
        }
      }
  }

  const lang::Program& program_;
  lang::ProgramIndex index_;
  int id_;
  const Stmt& stmt_;
  lang::StmtRef ref_;
  const PatternContext& ctx_;
  std::vector<std::string> scope_;
  std::map<std::string, Kind> kinds_;
  std::vector<int> slice_;
  std::vector<patch::Patch> out_;
};

}  // namespace

std::vector<patch::Patch> pattern_patches(const lang::Program& program, const faultloc::RepairLocation& location,
                                          const PatternContext& context, int cap) {
  int id = patch::location_stmt(program, location);
  if (id < 0) return {};
  lang::ProgramIndex index(program);
  if (index.stmt(id).synthetic) return {};
  int event_idx = location.event_idx;
  if (context.trace && (event_idx < 0 || event_idx >= static_cast<int>(context.trace->events.size()) ||
                        context.trace->events[static_cast<std::size_t>(event_idx)].stmt_id != id))
    event_idx = -1;
  auto candidates = PatternGenerator(program, id, context, event_idx).run();
  std::vector<patch::Patch> out;
  std::set<std::string> texts{lang::pretty_print(program)};
  // Each pattern gets an equal share of the cap.
  const int share = (cap + 2) / 3;
  std::map<std::string, int> taken;
  for (auto& p : candidates) {
    if (static_cast<int>(out.size()) >= cap) break;
    if (taken[p.strategy] >= share) continue;
    try {
      if (!texts.insert(lang::pretty_print(patch::apply_patch(program, p))).second) continue;
    } catch (const patch::ApplyError&) {
      continue;
    }
    p.provenance = patch::describe(p, &program);
    ++taken[p.strategy];
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tracefix::global
