#include "tracefix/lang/printer.hpp"

namespace tracefix::lang {

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    default: return 6;
  }
}

constexpr int kUnaryPrec = 7;
constexpr int kAtomPrec = 8;

int expr_prec(const Expr& e) {
  if (e.kind == ExprKind::Binary) return precedence(e.binary_op);
  if (e.kind == ExprKind::Unary) return kUnaryPrec;
  if (e.kind == ExprKind::IntLit && e.int_value < 0) return kUnaryPrec;
  return kAtomPrec;
}

void emit(const Expr& e, std::string& out);

void emit_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  emit(e, out);
  if (wrap) out += ')';
}

void emit_list(const std::vector<Expr>& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    emit(items[i], out);
  }
}

void emit(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::IntLit: out += std::to_string(e.int_value); return;
    case ExprKind::BoolLit: out += e.bool_value ? "true" : "false"; return;
    case ExprKind::StrLit: out += quote(e.text); return;
    case ExprKind::ArrayLit:
      out += '[';
      emit_list(e.children, out);
      out += ']';
      return;
    case ExprKind::Var: out += e.text; return;
    case ExprKind::Unary: {
      const Expr& operand = e.children[0];
      out += to_string(e.unary_op);
      // `-5` would re-parse as a negative literal, so keep Neg(5) explicit.
      bool literal_fold = e.unary_op == UnaryOp::Neg && operand.kind == ExprKind::IntLit &&
                          operand.int_value >= 0;
      emit_wrapped(operand, literal_fold || expr_prec(operand) < kUnaryPrec, out);
      return;
    }
    case ExprKind::Binary: {
      int p = precedence(e.binary_op);
      emit_wrapped(e.children[0], expr_prec(e.children[0]) < p, out);
      out += ' ';
      out += to_string(e.binary_op);
      out += ' ';
      emit_wrapped(e.children[1], expr_prec(e.children[1]) <= p, out);
      return;
    }
    case ExprKind::Call:
      out += e.text;
      out += '(';
      emit_list(e.children, out);
      out += ')';
      return;
    case ExprKind::Index:
      emit_wrapped(e.children[0], expr_prec(e.children[0]) < kAtomPrec, out);
      out += '[';
      emit(e.children[1], out);
      out += ']';
      return;
    case ExprKind::Len:
      out += "len(";
      emit(e.children[0], out);
      out += ')';
      return;
  }
}

void indent(int depth, std::string& out) { out.append(static_cast<std::size_t>(depth) * 4, ' '); }

void emit_stmt(const Stmt& s, int depth, std::string& out, bool continuation = false);

void emit_block_body(const Block& b, int depth, std::string& out) {
  for (const Stmt& s : b) emit_stmt(s, depth, out);
}

void emit_stmt(const Stmt& s, int depth, std::string& out, bool continuation) {
  if (!continuation) indent(depth, out);
  out += header_text(s);
  out += '\n';
  switch (s.kind) {
    case StmtKind::If:
      emit_block_body(s.blocks[0], depth + 1, out);
      if (s.blocks.size() > 1) {
        const Block& otherwise = s.blocks[1];
        indent(depth, out);
        if (otherwise.size() == 1 && otherwise[0].kind == StmtKind::If) {
          out += "} else ";
          emit_stmt(otherwise[0], depth, out, true);
          return;
        }
        out += "} else {\n";
        emit_block_body(otherwise, depth + 1, out);
      }
      indent(depth, out);
      out += "}\n";
      return;
    case StmtKind::While:
    case StmtKind::ForRange:
      emit_block_body(s.blocks[0], depth + 1, out);
      indent(depth, out);
      out += "}\n";
      return;
    default: return;
  }
}

}  // namespace

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string pretty_print(const Expr& expr) {
  std::string out;
  emit(expr, out);
  return out;
}

std::string header_text(const Stmt& s) {
  auto e = [&](std::size_t i) { return pretty_print(s.exprs[i]); };
  switch (s.kind) {
    case StmtKind::Let: return "let " + s.name + " = " + e(0) + ";";
    case StmtKind::Assign: return s.name + " = " + e(0) + ";";
    case StmtKind::IndexAssign: return s.name + "[" + e(0) + "] = " + e(1) + ";";
    case StmtKind::If: return "if (" + e(0) + ") {";
    case StmtKind::While: return "while (" + e(0) + ") {";
    case StmtKind::ForRange: return "for " + s.name + " in " + e(0) + ".." + e(1) + " {";
    case StmtKind::Return: return s.exprs.empty() ? "return;" : "return " + e(0) + ";";
    case StmtKind::Throw: return "throw " + e(0) + ";";
    case StmtKind::Assert: return "assert(" + e(0) + ");";
    case StmtKind::Print: return "print(" + e(0) + ");";
    case StmtKind::ExprStmt: return e(0) + ";";
  }
  return "";
}

std::string pretty_print(const Stmt& stmt, int depth) {
  std::string out;
  emit_stmt(stmt, depth, out);
  return out;
}

std::string pretty_print(const FunctionDecl& f) {
  std::string out = "fn " + f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) out += ", ";
    out += f.params[i];
  }
  out += ") {\n";
  emit_block_body(f.body, 1, out);
  out += "}\n";
  return out;
}

std::string pretty_print(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (i) out += '\n';
    out += pretty_print(program.functions[i]);
  }
  return out;
}

}  // namespace tracefix::lang
