#include "tracefix/lang/parser.hpp"

#include <limits>
#include <map>
#include <set>

#include "tracefix/lang/lexer.hpp"

namespace tracefix::lang {

namespace {

int precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return 0;
}

BinaryOp binary_op_of(const std::string& op) {
  if (op == "+") return BinaryOp::Add;
  if (op == "-") return BinaryOp::Sub;
  if (op == "*") return BinaryOp::Mul;
  if (op == "/") return BinaryOp::Div;
  if (op == "%") return BinaryOp::Mod;
  if (op == "<") return BinaryOp::Lt;
  if (op == "<=") return BinaryOp::Le;
  if (op == ">") return BinaryOp::Gt;
  if (op == ">=") return BinaryOp::Ge;
  if (op == "==") return BinaryOp::Eq;
  if (op == "!=") return BinaryOp::Ne;
  if (op == "&&") return BinaryOp::And;
  return BinaryOp::Or;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Program program() {
    Program p;
    while (!at_end()) p.functions.push_back(function());
    return p;
  }

  FunctionDecl function() {
    FunctionDecl f;
    f.line = peek().line;
    expect_keyword("fn");
    f.name = expect_ident("function name");
    expect("(");
    if (!check_punct(")")) {
      do {
        f.params.push_back(expect_ident("parameter name"));
      } while (accept(","));
    }
    expect(")");
    f.body = block();
    return f;
  }

  Stmt statement() {
    const Token& t = peek();
    Stmt s;
    s.line = t.line;
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "let") {
        advance();
        s.kind = StmtKind::Let;
        s.name = expect_ident("variable name");
        expect("=");
        s.exprs.push_back(expression());
        expect(";");
        return s;
      }
      if (t.text == "if") {
        advance();
        s.kind = StmtKind::If;
        expect("(");
        s.exprs.push_back(expression());
        expect(")");
        s.blocks.push_back(block());
        if (peek().kind == TokenKind::Keyword && peek().text == "else") {
          advance();
          if (peek().kind == TokenKind::Keyword && peek().text == "if") {
            s.blocks.push_back(Block{statement()});
          } else {
            s.blocks.push_back(block());
          }
        }
        return s;
      }
      if (t.text == "while") {
        advance();
        s.kind = StmtKind::While;
        expect("(");
        s.exprs.push_back(expression());
        expect(")");
        s.blocks.push_back(block());
        return s;
      }
      if (t.text == "for") {
        advance();
        s.kind = StmtKind::ForRange;
        s.name = expect_ident("loop variable");
        expect_keyword("in");
        s.exprs.push_back(expression());
        expect("..");
        s.exprs.push_back(expression());
        s.blocks.push_back(block());
        return s;
      }
      if (t.text == "return") {
        advance();
        s.kind = StmtKind::Return;
        if (!check_punct(";")) s.exprs.push_back(expression());
        expect(";");
        return s;
      }
      if (t.text == "throw") {
        advance();
        s.kind = StmtKind::Throw;
        s.exprs.push_back(expression());
        expect(";");
        return s;
      }
      if (t.text == "assert" || t.text == "print") {
        s.kind = t.text == "assert" ? StmtKind::Assert : StmtKind::Print;
        advance();
        expect("(");
        s.exprs.push_back(expression());
        expect(")");
        expect(";");
        return s;
      }
    }
    Expr e = expression();
    if (accept("=")) {
      if (e.kind == ExprKind::Var) {
        s.kind = StmtKind::Assign;
        s.name = e.text;
        s.exprs.push_back(expression());
      } else if (e.kind == ExprKind::Index && e.children[0].kind == ExprKind::Var) {
        s.kind = StmtKind::IndexAssign;
        s.name = e.children[0].text;
        s.exprs.push_back(std::move(e.children[1]));
        s.exprs.push_back(expression());
      } else {
        throw SyntaxError(s.line, "invalid assignment target");
      }
    } else {
      s.kind = StmtKind::ExprStmt;
      s.exprs.push_back(std::move(e));
    }
    expect(";");
    return s;
  }

  Block block() {
    expect("{");
    Block b;
    while (!check_punct("}")) {
      if (at_end()) throw SyntaxError(peek().line, "unexpected end of input, expected '}'");
      b.push_back(statement());
    }
    expect("}");
    return b;
  }

  Expr expression(int min_prec = 1) {
    Expr lhs = unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Punct) break;
      int prec = precedence(t.text);
      if (prec == 0 || prec < min_prec) break;
      std::string op = t.text;
      advance();
      Expr rhs = expression(prec + 1);
      lhs = Expr::binary(binary_op_of(op), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  bool at_end() const { return peek().kind == TokenKind::End; }

  void expect_end() {
    if (!at_end()) throw SyntaxError(peek().line, "unexpected '" + peek().text + "'");
  }

 private:
  Expr unary() {
    if (check_punct("-")) {
      advance();
      if (peek().kind == TokenKind::Int) return Expr::integer(integer_literal(true));
      return Expr::unary(UnaryOp::Neg, unary());
    }
    if (check_punct("!")) {
      advance();
      return Expr::unary(UnaryOp::Not, unary());
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (accept("[")) {
      Expr idx = expression();
      expect("]");
      e = Expr::index(std::move(e), std::move(idx));
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Int: return Expr::integer(integer_literal(false));
      case TokenKind::Str: {
        std::string v = t.text;
        advance();
        return Expr::string(std::move(v));
      }
      case TokenKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          bool v = t.text == "true";
          advance();
          return Expr::boolean(v);
        }
        if (t.text == "len") {
          advance();
          expect("(");
          Expr e = expression();
          expect(")");
          return Expr::len(std::move(e));
        }
        throw SyntaxError(t.line, "unexpected keyword '" + t.text + "'");
      case TokenKind::Ident: {
        std::string name = t.text;
        advance();
        if (accept("(")) {
          std::vector<Expr> args;
          if (!check_punct(")")) {
            do {
              args.push_back(expression());
            } while (accept(","));
          }
          expect(")");
          return Expr::call(std::move(name), std::move(args));
        }
        return Expr::var(std::move(name));
      }
      case TokenKind::Punct:
        if (t.text == "(") {
          advance();
          Expr e = expression();
          expect(")");
          return e;
        }
        if (t.text == "[") {
          advance();
          std::vector<Expr> items;
          if (!check_punct("]")) {
            do {
              items.push_back(expression());
            } while (accept(","));
          }
          expect("]");
          return Expr::array(std::move(items));
        }
        break;
      case TokenKind::End: throw SyntaxError(t.line, "unexpected end of input");
    }
    throw SyntaxError(t.line, "unexpected '" + t.text + "'");
  }

  std::int64_t integer_literal(bool negative) {
    const Token& t = peek();
    unsigned long long v = 0;
    constexpr unsigned long long kMaxMagnitude =
        static_cast<unsigned long long>(std::numeric_limits<std::int64_t>::max()) + 1ULL;
    for (char c : t.text) {
      unsigned digit = static_cast<unsigned>(c - '0');
      if (v > (kMaxMagnitude - digit) / 10) throw SyntaxError(t.line, "integer literal out of range");
      v = v * 10 + digit;
    }
    if (!negative && v == kMaxMagnitude) throw SyntaxError(t.line, "integer literal out of range");
    advance();
    if (negative) {
      return v == kMaxMagnitude ? std::numeric_limits<std::int64_t>::min()
                                : -static_cast<std::int64_t>(v);
    }
    return static_cast<std::int64_t>(v);
  }

  const Token& peek() const { return toks_[pos_]; }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool check_punct(const char* p) const {
    return peek().kind == TokenKind::Punct && peek().text == p;
  }
  bool accept(const char* p) {
    if (!check_punct(p)) return false;
    advance();
    return true;
  }
  void expect(const char* p) {
    if (!accept(p)) {
      const Token& t = peek();
      throw SyntaxError(t.line, std::string("expected '") + p + "' but found '" +
                                    (t.kind == TokenKind::End ? "end of input" : t.text) + "'");
    }
  }
  void expect_keyword(const char* k) {
    if (peek().kind != TokenKind::Keyword || peek().text != k)
      throw SyntaxError(peek().line, std::string("expected '") + k + "'");
    advance();
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != TokenKind::Ident)
      throw SyntaxError(peek().line, std::string("expected ") + what);
    std::string s = peek().text;
    advance();
    return s;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

class Checker {
 public:
  explicit Checker(const Program& p) : program_(p) {}

  void run() {
    for (const auto& f : program_.functions) {
      if (arity_.count(f.name)) throw NameError(f.line, f.name, "duplicate function");
      arity_[f.name] = f.params.size();
    }
    for (const auto& f : program_.functions) {
      scopes_.clear();
      scopes_.emplace_back();
      for (const auto& p : f.params) {
        if (scopes_.back().count(p)) throw NameError(f.line, p, "duplicate parameter");
        scopes_.back().insert(p);
      }
      block(f.body);
    }
  }

 private:
  bool visible(const std::string& name) const {
    for (const auto& s : scopes_)
      if (s.count(name)) return true;
    return false;
  }

  void declare(const std::string& name, int line) {
    if (visible(name)) throw NameError(line, name, "redeclaration of");
    scopes_.back().insert(name);
  }

  void block(const Block& b) {
    scopes_.emplace_back();
    for (const auto& s : b) stmt(s);
    scopes_.pop_back();
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let:
        expr(s.exprs[0], s.line);
        declare(s.name, s.line);
        return;
      case StmtKind::Assign:
      case StmtKind::IndexAssign:
        if (!visible(s.name)) throw NameError(s.line, s.name, "undeclared variable");
        for (const auto& e : s.exprs) expr(e, s.line);
        return;
      case StmtKind::ForRange:
        expr(s.exprs[0], s.line);
        expr(s.exprs[1], s.line);
        scopes_.emplace_back();
        declare(s.name, s.line);
        block(s.blocks[0]);
        scopes_.pop_back();
        return;
      default:
        for (const auto& e : s.exprs) expr(e, s.line);
        for (const auto& b : s.blocks) block(b);
        return;
    }
  }

  void expr(const Expr& e, int line) {
    if (e.kind == ExprKind::Var && !visible(e.text))
      throw NameError(line, e.text, "undeclared variable");
    if (e.kind == ExprKind::Call) {
      auto it = arity_.find(e.text);
      if (it == arity_.end()) throw NameError(line, e.text, "unknown function");
      if (it->second != e.children.size())
        throw ArityError(line, "function '" + e.text + "' expects " + std::to_string(it->second) +
                                   " argument(s), got " + std::to_string(e.children.size()));
    }
    for (const auto& c : e.children) expr(c, line);
  }

  const Program& program_;
  std::map<std::string, std::size_t> arity_;
  std::vector<std::set<std::string>> scopes_;
};

}  // namespace

Program parse(const std::string& source) {
  Parser parser(source);
  Program p = parser.program();
  check(p);
  assign_ids(p);
  p.source_hash = content_digest(source);
  return p;
}

Expr parse_expression(const std::string& text) {
  Parser parser(text);
  Expr e = parser.expression();
  parser.expect_end();
  return e;
}

Stmt parse_statement(const std::string& text) {
  Parser parser(text);
  Stmt s = parser.statement();
  parser.expect_end();
  return s;
}

FunctionDecl parse_function(const std::string& text) {
  Parser parser(text);
  FunctionDecl f = parser.function();
  parser.expect_end();
  return f;
}

void check(const Program& program) { Checker(program).run(); }

}  // namespace tracefix::lang
