#include "program_gen.hpp"

#include <random>
#include <vector>

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"

namespace tracefix::testing {

namespace {

using lang::BinaryOp;
using lang::Expr;
using lang::Stmt;
using lang::StmtKind;

struct Gen {
  std::mt19937_64 rng;
  int var_counter = 0;
  int functions_before = 0;  // callable helpers: f0 .. f{n-1}
  std::vector<int> arity;

  struct Scope {
    std::vector<std::string> ints;
    std::vector<std::string> arrays;
  };

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return pick(100) < percent; }

  Expr int_expr(const Scope& sc, int depth) {
    int r = pick(depth <= 0 ? 3 : 10);
    if (r == 0 || (sc.ints.empty() && r < 3)) return Expr::integer(pick(11) - 3);
    if (r <= 2 && !sc.ints.empty()) return Expr::var(sc.ints[static_cast<std::size_t>(pick(static_cast<int>(sc.ints.size())))]);
    if (r <= 6) {
      static const BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Add,
                                     BinaryOp::Sub, BinaryOp::Div, BinaryOp::Mod};
      return Expr::binary(ops[pick(7)], int_expr(sc, depth - 1), int_expr(sc, depth - 1));
    }
    if (r == 7 && !sc.arrays.empty()) {
      const std::string& a = sc.arrays[static_cast<std::size_t>(pick(static_cast<int>(sc.arrays.size())))];
      if (chance(50)) return Expr::len(Expr::var(a));
      return Expr::index(Expr::var(a), int_expr(sc, depth - 1));
    }
    if (r == 8 && functions_before > 0) {
      int f = pick(functions_before);
      std::vector<Expr> args;
      for (int i = 0; i < arity[static_cast<std::size_t>(f)]; ++i) args.push_back(int_expr(sc, depth - 1));
      return Expr::call("f" + std::to_string(f), std::move(args));
    }
    if (r == 9) return Expr::unary(lang::UnaryOp::Neg, int_expr(sc, depth - 1));
    return Expr::integer(pick(7));
  }

  Expr bool_expr(const Scope& sc, int depth) {
    int r = pick(depth <= 0 ? 2 : 6);
    if (r == 0) return Expr::boolean(chance(50));
    if (r <= 3) {
      static const BinaryOp ops[] = {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt,
                                     BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne};
      return Expr::binary(ops[pick(6)], int_expr(sc, depth - 1), int_expr(sc, depth - 1));
    }
    if (r == 4) return Expr::unary(lang::UnaryOp::Not, bool_expr(sc, depth - 1));
    return Expr::binary(chance(50) ? BinaryOp::And : BinaryOp::Or, bool_expr(sc, depth - 1),
                        bool_expr(sc, depth - 1));
  }

  std::string fresh() { return "v" + std::to_string(var_counter++); }

  Stmt make(StmtKind k) {
    Stmt s;
    s.kind = k;
    return s;
  }

  lang::Block block(Scope sc, int depth, int count) {
    lang::Block out;
    for (int i = 0; i < count; ++i) {
      int r = pick(depth <= 0 ? 6 : 10);
      if (r <= 1) {
        Stmt s = make(StmtKind::Let);
        s.name = fresh();
        if (chance(20)) {
          std::vector<Expr> items;
          int n = pick(4);
          for (int j = 0; j < n; ++j) items.push_back(int_expr(sc, 1));
          s.exprs.push_back(Expr::array(std::move(items)));
          sc.arrays.push_back(s.name);
        } else {
          s.exprs.push_back(int_expr(sc, 2));
          sc.ints.push_back(s.name);
        }
        out.push_back(std::move(s));
      } else if (r == 2 && !sc.ints.empty()) {
        Stmt s = make(StmtKind::Assign);
        s.name = sc.ints[static_cast<std::size_t>(pick(static_cast<int>(sc.ints.size())))];
        s.exprs.push_back(int_expr(sc, 2));
        out.push_back(std::move(s));
      } else if (r == 3 && !sc.arrays.empty()) {
        Stmt s = make(StmtKind::IndexAssign);
        s.name = sc.arrays[static_cast<std::size_t>(pick(static_cast<int>(sc.arrays.size())))];
        s.exprs.push_back(int_expr(sc, 1));
        s.exprs.push_back(int_expr(sc, 1));
        out.push_back(std::move(s));
      } else if (r == 4) {
        Stmt s = make(StmtKind::Print);
        s.exprs.push_back(int_expr(sc, 2));
        out.push_back(std::move(s));
      } else if (r == 5) {
        Stmt s = make(chance(70) ? StmtKind::Assert : StmtKind::Return);
        if (s.kind == StmtKind::Assert) {
          s.exprs.push_back(bool_expr(sc, 1));
        } else {
          if (!chance(50)) continue;  // keep early returns rare
          s.exprs.push_back(int_expr(sc, 1));
        }
        out.push_back(std::move(s));
      } else if (r <= 7) {
        Stmt s = make(StmtKind::If);
        s.exprs.push_back(bool_expr(sc, 2));
        s.blocks.push_back(block(sc, depth - 1, 1 + pick(3)));
        if (chance(50)) s.blocks.push_back(block(sc, depth - 1, 1 + pick(2)));
        out.push_back(std::move(s));
      } else if (r == 8) {
        Stmt s = make(StmtKind::ForRange);
        s.name = fresh();
        s.exprs.push_back(int_expr(sc, 1));
        s.exprs.push_back(int_expr(sc, 1));
        Scope inner = sc;
        inner.ints.push_back(s.name);
        s.blocks.push_back(block(inner, depth - 1, 1 + pick(3)));
        out.push_back(std::move(s));
      } else if (!sc.ints.empty()) {
        // Counter loop; may run forever when the body resets the counter.
        std::string c = fresh();
        Stmt let = make(StmtKind::Let);
        let.name = c;
        let.exprs.push_back(Expr::integer(0));
        out.push_back(std::move(let));
        Scope inner = sc;
        inner.ints.push_back(c);
        Stmt w = make(StmtKind::While);
        w.exprs.push_back(Expr::binary(BinaryOp::Lt, Expr::var(c), int_expr(sc, 1)));
        lang::Block body = block(inner, depth - 1, 1 + pick(2));
        Stmt inc = make(StmtKind::Assign);
        inc.name = c;
        inc.exprs.push_back(Expr::binary(BinaryOp::Add, Expr::var(c), Expr::integer(1)));
        body.push_back(std::move(inc));
        w.blocks.push_back(std::move(body));
        out.push_back(std::move(w));
        sc.ints.push_back(c);
      }
    }
    return out;
  }
};

}  // namespace

GeneratedProgram generate_program(std::uint64_t seed) {
  Gen g{std::mt19937_64(seed)};
  lang::Program p;
  int helpers = g.pick(3);
  for (int f = 0; f <= helpers; ++f) {
    lang::FunctionDecl fn;
    bool is_main = f == helpers;
    fn.name = is_main ? "main" : "f" + std::to_string(f);
    int n = is_main ? g.pick(3) : 1 + g.pick(2);
    Gen::Scope sc;
    for (int i = 0; i < n; ++i) {
      fn.params.push_back("p" + std::to_string(i));
      sc.ints.push_back(fn.params.back());
    }
    g.functions_before = f;
    fn.body = g.block(sc, 2, 2 + g.pick(4));
    lang::Stmt ret = g.make(StmtKind::Return);
    ret.exprs.push_back(g.int_expr(sc, 2));
    fn.body.push_back(std::move(ret));
    g.arity.push_back(n);
    p.functions.push_back(std::move(fn));
  }
  GeneratedProgram out;
  out.source = lang::pretty_print(p);
  out.program = lang::parse(out.source);
  out.entry.function = "main";
  for (std::size_t i = 0; i < p.functions.back().params.size(); ++i)
    out.entry.args.push_back(interp::Value::integer(g.pick(9) - 2));
  return out;
}

}  // namespace tracefix::testing
