// Source edits and patches.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracefix/lang/ast.hpp"
#include "tracefix/lang/program_index.hpp"

namespace tracefix::patch {

enum class EditAction { ReplaceExpr, ReplaceStmt, InsertBefore, InsertAfter, Delete, WrapIf };

const char* to_string(EditAction action);

struct Edit {
  lang::StmtRef target;
  EditAction action = EditAction::ReplaceExpr;
  // ReplaceExpr: header slot followed by child indices.
  std::vector<int> path;
  // ReplaceExpr: replacement; WrapIf: guard.
  lang::Expr expr;
  // ReplaceStmt, InsertBefore, InsertAfter.
  lang::Stmt stmt;
  // WrapIf: number of consecutive statements, starting at the target.
  int span = 1;

  static Edit replace_expr(lang::StmtRef target, std::vector<int> path, lang::Expr e);
  static Edit replace_stmt(lang::StmtRef target, lang::Stmt s);
  static Edit insert_before(lang::StmtRef target, lang::Stmt s);
  static Edit insert_after(lang::StmtRef target, lang::Stmt s);
  static Edit remove(lang::StmtRef target);
  static Edit wrap_if(lang::StmtRef target, lang::Expr guard, int span);
};

// Partial-patch relationships of multi-edit patches.
enum class Relationship { DU, OA, RIF, DIF, EOH, SU, ONPF, FU };

const char* to_string(Relationship r);
std::optional<Relationship> relationship_from_string(const std::string& text);

struct Patch {
  std::vector<Edit> edits;
  std::string strategy;
  std::optional<Relationship> relationship;
  std::string provenance;
  // Edits may touch the same statement.
  bool co_targeting = false;
};

// Canonical text of one edit; equal keys mean equal edits.
std::string edit_key(const Edit& edit);
// Order-insensitive key of a patch's edit set.
std::string edit_set_key(const Patch& patch);

// Short human-readable summary, e.g. `main:4 replace a < b -> a <= b`.
std::string describe(const Edit& edit, const lang::Program* program = nullptr);
std::string describe(const Patch& patch, const lang::Program* program = nullptr);

nlohmann::json edit_to_json(const Edit& edit);
Edit edit_from_json(const nlohmann::json& j);
nlohmann::json patch_to_json(const Patch& patch);
Patch patch_from_json(const nlohmann::json& j);

// Expression inside a statement's header, or nullptr when the path is
// invalid.
const lang::Expr* expr_at(const lang::Stmt& stmt, const std::vector<int>& path);
lang::Expr* expr_at(lang::Stmt& stmt, const std::vector<int>& path);

class ApplyError : public std::runtime_error {
 public:
  enum class Kind { TargetNotFound, ConflictingEdits, IllFormed };
  ApplyError(Kind kind, int edit_index, const std::string& message)
      : std::runtime_error(message), kind_(kind), edit_index_(edit_index) {}
  Kind kind() const { return kind_; }
  int edit_index() const { return edit_index_; }

 private:
  Kind kind_;
  int edit_index_;
};

const char* to_string(ApplyError::Kind kind);

// Applies all edits against `program` (targets are resolved before any edit
// is applied). New statements are synthetic and carry the line of their
// anchor, so unedited statements keep their source coordinates. The result
// has fresh ids and passes the static checks.
lang::Program apply_patch(const lang::Program& program, const Patch& patch);

// A statement converted to the synthetic form edits insert.
lang::Stmt make_synthetic(lang::Stmt stmt, int line);

}  // namespace tracefix::patch
