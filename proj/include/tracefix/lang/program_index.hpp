// Statement lookup, cross-version statement references and scope queries.
#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/lang/ast.hpp"

namespace tracefix::lang {

class UnknownFunction : public std::runtime_error {
 public:
  explicit UnknownFunction(const std::string& name)
      : std::runtime_error("unknown function '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Identifies a statement across program versions: the `index`-th
// non-synthetic statement of `function` whose source line is `line`, in
// pre-order.
struct StmtRef {
  std::string function;
  int line = 0;
  int index = 0;

  friend bool operator==(const StmtRef&, const StmtRef&) = default;
  friend auto operator<=>(const StmtRef&, const StmtRef&) = default;
};

std::string to_string(const StmtRef& ref);

struct StmtInfo {
  const Stmt* stmt = nullptr;
  std::string function;
  // Innermost enclosing If/While/ForRange, or -1 at function top level.
  int parent = -1;
  // Which block of the parent holds this statement (0 = then/body, 1 = else).
  int parent_block = 0;
  // Position within the containing block.
  int position = 0;
  int depth = 0;
};

// Read-only index over a Program. Holds pointers into the program, which
// must outlive the index and stay unmodified.
class ProgramIndex {
 public:
  explicit ProgramIndex(const Program& program);

  const Program& program() const { return *program_; }
  int size() const { return static_cast<int>(infos_.size()); }
  bool contains(int stmt_id) const { return stmt_id >= 0 && stmt_id < size(); }
  const StmtInfo& info(int stmt_id) const { return infos_.at(static_cast<std::size_t>(stmt_id)); }
  const Stmt& stmt(int stmt_id) const { return *info(stmt_id).stmt; }

  // Statement ids of `function` at `line`, pre-order. Throws UnknownFunction.
  std::vector<int> locate(const std::string& function, int line) const;

  // -1 when the reference does not resolve.
  int resolve(const StmtRef& ref) const;
  // Throws std::invalid_argument for synthetic statements.
  StmtRef ref_of(int stmt_id) const;

  // The block that contains the statement and that block's statements.
  const Block& containing_block(int stmt_id) const;

  // Variables visible immediately before the statement executes, in
  // declaration order (parameters first).
  std::vector<std::string> variables_in_scope(int stmt_id) const;

  // True when `descendant` is nested (at any depth) inside `ancestor`.
  bool is_descendant(int descendant, int ancestor) const;

 private:
  void index_block(const Block& block, const FunctionDecl& f, int parent, int parent_block,
                   int depth);

  const Program* program_;
  std::vector<StmtInfo> infos_;
  std::vector<const Block*> containing_;
};

// locate() as a free function over a program.
std::vector<int> locate(const Program& program, const std::string& function, int line);

// Variables read by evaluating the statement's header expressions.
// IndexAssign also reads its target array. ForRange reports the bound
// variables (the reads of its first entry).
std::set<std::string> header_reads(const Stmt& stmt);

// Variables referenced anywhere in the expression.
std::set<std::string> expr_vars(const Expr& expr);

// True when the header expressions contain a function call.
bool header_has_call(const Stmt& stmt);

}  // namespace tracefix::lang
