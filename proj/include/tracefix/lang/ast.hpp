// MiniLang abstract syntax tree.
//
// Expressions and statements are plain value types. A Program owns its
// functions by value, so copying a Program deep-copies the tree; patched
// versions are produced by copy-and-edit and never alias the original.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tracefix::lang {

enum class BinaryOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnaryOp { Neg, Not };

enum class ExprKind { IntLit, BoolLit, StrLit, ArrayLit, Var, Unary, Binary, Call, Index, Len };

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  std::int64_t int_value = 0;
  bool bool_value = false;
  // StrLit contents, Var name, or Call callee.
  std::string text;
  BinaryOp binary_op = BinaryOp::Add;
  UnaryOp unary_op = UnaryOp::Neg;
  // Unary: [operand]; Binary: [lhs, rhs]; Call/ArrayLit: elements;
  // Index: [base, index]; Len: [operand].
  std::vector<Expr> children;

  static Expr integer(std::int64_t v);
  static Expr boolean(bool v);
  static Expr string(std::string v);
  static Expr array(std::vector<Expr> items);
  static Expr var(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(std::string callee, std::vector<Expr> args);
  static Expr index(Expr base, Expr idx);
  static Expr len(Expr operand);

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class StmtKind {
  Let,
  Assign,
  IndexAssign,
  If,
  While,
  ForRange,
  Return,
  Throw,
  Assert,
  Print,
  ExprStmt
};

struct Stmt;
using Block = std::vector<Stmt>;

// Header expressions (`exprs`) per kind:
//   Let/Assign: [value]   IndexAssign: [index, value]   If/While/Assert: [cond]
//   ForRange: [lo, hi]    Return: [] or [value]         Throw/Print/ExprStmt: [value]
// Blocks: If: [then] or [then, else]; While/ForRange: [body].
struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  int id = -1;
  int line = 0;
  // Created by a patch edit rather than parsed from source. Synthetic
  // statements do not take part in cross-version StmtRef numbering.
  bool synthetic = false;
  // Let/Assign/IndexAssign target or ForRange loop variable.
  std::string name;
  std::vector<Expr> exprs;
  std::vector<Block> blocks;
};

struct FunctionDecl {
  std::string name;
  std::vector<std::string> params;
  Block body;
  int line = 0;
};

struct Program {
  std::vector<FunctionDecl> functions;
  std::string source_hash;

  const FunctionDecl* find_function(const std::string& name) const;
  FunctionDecl* find_function(const std::string& name);
  int statement_count() const;
};

const char* to_string(BinaryOp op);
const char* to_string(UnaryOp op);
const char* to_string(StmtKind kind);

bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_compound(StmtKind kind);

// Structural equality: ignores stmt ids, line numbers and the synthetic flag.
bool same_structure(const Stmt& a, const Stmt& b);
bool same_structure(const Block& a, const Block& b);
bool same_structure(const Program& a, const Program& b);

// Reassigns stmt ids densely in program pre-order.
void assign_ids(Program& program);

// Visits every statement in pre-order. The visitor receives the statement
// and the name of its enclosing function.
template <typename Fn>
void for_each_stmt(const Block& block, const std::string& function, Fn&& fn) {
  for (const Stmt& s : block) {
    fn(s, function);
    for (const Block& b : s.blocks) for_each_stmt(b, function, fn);
  }
}

template <typename Fn>
void for_each_stmt(const Program& program, Fn&& fn) {
  for (const FunctionDecl& f : program.functions) for_each_stmt(f.body, f.name, fn);
}

// Visits every expression node in pre-order.
template <typename Fn>
void for_each_expr(const Expr& e, Fn&& fn) {
  fn(e);
  for (const Expr& c : e.children) for_each_expr(c, fn);
}

// FNV-1a digest of `text`, rendered as 16 hex digits.
std::string content_digest(const std::string& text);

}  // namespace tracefix::lang
