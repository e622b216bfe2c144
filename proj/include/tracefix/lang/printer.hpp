#pragma once

#include <string>

#include "tracefix/lang/ast.hpp"

namespace tracefix::lang {

// Canonical source: one statement per line, 4-space indentation, a blank
// line between functions, trailing newline.
std::string pretty_print(const Program& program);

// Renders a function declaration in canonical form.
std::string pretty_print(const FunctionDecl& function);

// Renders a statement (including nested blocks) at the given indent depth.
std::string pretty_print(const Stmt& stmt, int depth = 0);

// Minimal-parenthesis rendering of an expression.
std::string pretty_print(const Expr& expr);

// The first printed line of a statement without indentation, e.g.
// `while (i < n) {` or `x = a[i];`.
std::string header_text(const Stmt& stmt);

// Quotes and escapes a string literal.
std::string quote(const std::string& text);

}  // namespace tracefix::lang
