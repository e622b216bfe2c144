#include "tracefix/lang/ast.hpp"

#include <cstdio>

namespace tracefix::lang {

Expr Expr::integer(std::int64_t v) {
  Expr e;
  e.kind = ExprKind::IntLit;
  e.int_value = v;
  return e;
}

Expr Expr::boolean(bool v) {
  Expr e;
  e.kind = ExprKind::BoolLit;
  e.bool_value = v;
  return e;
}

Expr Expr::string(std::string v) {
  Expr e;
  e.kind = ExprKind::StrLit;
  e.text = std::move(v);
  return e;
}

Expr Expr::array(std::vector<Expr> items) {
  Expr e;
  e.kind = ExprKind::ArrayLit;
  e.children = std::move(items);
  return e;
}

Expr Expr::var(std::string name) {
  Expr e;
  e.kind = ExprKind::Var;
  e.text = std::move(name);
  return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.unary_op = op;
  e.children.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.binary_op = op;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expr Expr::call(std::string callee, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::Call;
  e.text = std::move(callee);
  e.children = std::move(args);
  return e;
}

Expr Expr::index(Expr base, Expr idx) {
  Expr e;
  e.kind = ExprKind::Index;
  e.children.push_back(std::move(base));
  e.children.push_back(std::move(idx));
  return e;
}

Expr Expr::len(Expr operand) {
  Expr e;
  e.kind = ExprKind::Len;
  e.children.push_back(std::move(operand));
  return e;
}

const FunctionDecl* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

FunctionDecl* Program::find_function(const std::string& name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

int Program::statement_count() const {
  int n = 0;
  for_each_stmt(*this, [&](const Stmt&, const std::string&) { ++n; });
  return n;
}

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

const char* to_string(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "!"; }

const char* to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Let: return "Let";
    case StmtKind::Assign: return "Assign";
    case StmtKind::IndexAssign: return "IndexAssign";
    case StmtKind::If: return "If";
    case StmtKind::While: return "While";
    case StmtKind::ForRange: return "ForRange";
    case StmtKind::Return: return "Return";
    case StmtKind::Throw: return "Throw";
    case StmtKind::Assert: return "Assert";
    case StmtKind::Print: return "Print";
    case StmtKind::ExprStmt: return "ExprStmt";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
    case BinaryOp::Eq:
    case BinaryOp::Ne: return true;
    default: return false;
  }
}

bool is_arithmetic(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return true;
    default: return false;
  }
}

bool is_compound(StmtKind kind) {
  return kind == StmtKind::If || kind == StmtKind::While || kind == StmtKind::ForRange;
}

bool same_structure(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.name == b.name && a.exprs == b.exprs &&
         a.blocks.size() == b.blocks.size() && [&] {
           for (std::size_t i = 0; i < a.blocks.size(); ++i)
             if (!same_structure(a.blocks[i], b.blocks[i])) return false;
           return true;
         }();
}

bool same_structure(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_structure(a[i], b[i])) return false;
  return true;
}

bool same_structure(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& fa = a.functions[i];
    const auto& fb = b.functions[i];
    if (fa.name != fb.name || fa.params != fb.params || !same_structure(fa.body, fb.body))
      return false;
  }
  return true;
}

namespace {
void assign_block(Block& block, int& next) {
  for (Stmt& s : block) {
    s.id = next++;
    for (Block& b : s.blocks) assign_block(b, next);
  }
}
}  // namespace

void assign_ids(Program& program) {
  int next = 0;
  for (auto& f : program.functions) assign_block(f.body, next);
}

std::string content_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tracefix::lang
