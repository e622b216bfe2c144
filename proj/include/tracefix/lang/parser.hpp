#pragma once

#include <stdexcept>
#include <string>

#include "tracefix/lang/ast.hpp"

namespace tracefix::lang {

class LangError : public std::runtime_error {
 public:
  LangError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SyntaxError : public LangError {
 public:
  using LangError::LangError;
};

class NameError : public LangError {
 public:
  NameError(int line, std::string identifier, const std::string& what)
      : LangError(line, what + " '" + identifier + "'"), identifier_(std::move(identifier)) {}
  const std::string& identifier() const { return identifier_; }

 private:
  std::string identifier_;
};

class ArityError : public LangError {
 public:
  using LangError::LangError;
};

// Parses and statically checks a whole program. Statement ids are assigned
// in pre-order and source_hash is the digest of `source`.
Program parse(const std::string& source);

// Parses a single expression. No name resolution is performed.
Expr parse_expression(const std::string& text);

// Parses a single statement (compound statements included). Line numbers
// are relative to `text`; ids are left unassigned.
Stmt parse_statement(const std::string& text);

// Parses one function declaration without static checks.
FunctionDecl parse_function(const std::string& text);

// Static checks: unique function and parameter names, every identifier
// resolves to a parameter, an earlier `let` in scope or a loop variable,
// calls target declared functions with the right arity. No shadowing.
void check(const Program& program);

bool is_keyword(const std::string& word);

}  // namespace tracefix::lang
