#include "tracefix/patch/edit.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"

namespace tracefix::patch {

using lang::Expr;
using lang::Stmt;
using nlohmann::json;

const char* to_string(EditAction a) {
  switch (a) {
    case EditAction::ReplaceExpr: return "ReplaceExpr";
    case EditAction::ReplaceStmt: return "ReplaceStmt";
    case EditAction::InsertBefore: return "InsertBefore";
    case EditAction::InsertAfter: return "InsertAfter";
    case EditAction::Delete: return "Delete";
    case EditAction::WrapIf: return "WrapIf";
  }
  return "?";
}

const char* to_string(Relationship r) {
  switch (r) {
    case Relationship::DU: return "DU";
    case Relationship::OA: return "OA";
    case Relationship::RIF: return "RIF";
    case Relationship::DIF: return "DIF";
    case Relationship::EOH: return "EOH";
    case Relationship::SU: return "SU";
    case Relationship::ONPF: return "ONPF";
    case Relationship::FU: return "FU";
  }
  return "?";
}

std::optional<Relationship> relationship_from_string(const std::string& text) {
  for (Relationship r : {Relationship::DU, Relationship::OA, Relationship::RIF, Relationship::DIF,
                         Relationship::EOH, Relationship::SU, Relationship::ONPF, Relationship::FU})
    if (text == to_string(r)) return r;
  return std::nullopt;
}

const char* to_string(ApplyError::Kind k) {
  switch (k) {
    case ApplyError::Kind::TargetNotFound: return "TargetNotFound";
    case ApplyError::Kind::ConflictingEdits: return "ConflictingEdits";
    case ApplyError::Kind::IllFormed: return "IllFormed";
  }
  return "?";
}

Edit Edit::replace_expr(lang::StmtRef target, std::vector<int> path, Expr e) {
  Edit x;
  x.target = std::move(target);
  x.action = EditAction::ReplaceExpr;
  x.path = std::move(path);
  x.expr = std::move(e);
  return x;
}

Edit Edit::replace_stmt(lang::StmtRef target, Stmt s) {
  Edit x;
  x.target = std::move(target);
  x.action = EditAction::ReplaceStmt;
  x.stmt = std::move(s);
  return x;
}

Edit Edit::insert_before(lang::StmtRef target, Stmt s) {
  Edit x = replace_stmt(std::move(target), std::move(s));
  x.action = EditAction::InsertBefore;
  return x;
}

Edit Edit::insert_after(lang::StmtRef target, Stmt s) {
  Edit x = replace_stmt(std::move(target), std::move(s));
  x.action = EditAction::InsertAfter;
  return x;
}

Edit Edit::remove(lang::StmtRef target) {
  Edit x;
  x.target = std::move(target);
  x.action = EditAction::Delete;
  return x;
}

Edit Edit::wrap_if(lang::StmtRef target, Expr guard, int span) {
  Edit x;
  x.target = std::move(target);
  x.action = EditAction::WrapIf;
  x.expr = std::move(guard);
  x.span = span;
  return x;
}

namespace {

std::string stmt_text(const Stmt& s) {
  std::string t = lang::pretty_print(s);
  while (!t.empty() && t.back() == '\n') t.pop_back();
  return t;
}

bool has_expr(EditAction a) { return a == EditAction::ReplaceExpr || a == EditAction::WrapIf; }
bool has_stmt(EditAction a) {
  return a == EditAction::ReplaceStmt || a == EditAction::InsertBefore ||
         a == EditAction::InsertAfter;
}

}  // namespace

std::string edit_key(const Edit& e) {
  std::string k = std::string(to_string(e.action)) + "|" + lang::to_string(e.target);
  if (e.action == EditAction::ReplaceExpr) {
    k += "|";
    for (int p : e.path) k += std::to_string(p) + ".";
  }
  if (has_expr(e.action)) k += "|" + lang::pretty_print(e.expr);
  if (has_stmt(e.action)) k += "|" + stmt_text(e.stmt);
  if (e.action == EditAction::WrapIf) k += "|" + std::to_string(e.span);
  return k;
}

std::string edit_set_key(const Patch& p) {
  std::vector<std::string> keys;
  for (const Edit& e : p.edits) keys.push_back(edit_key(e));
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& k : keys) out += k + "\n";
  return out;
}

const Expr* expr_at(const Stmt& s, const std::vector<int>& path) {
  if (path.empty() || path[0] < 0 || path[0] >= static_cast<int>(s.exprs.size())) return nullptr;
  const Expr* e = &s.exprs[static_cast<std::size_t>(path[0])];
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i] < 0 || path[i] >= static_cast<int>(e->children.size())) return nullptr;
    e = &e->children[static_cast<std::size_t>(path[i])];
  }
  return e;
}

Expr* expr_at(Stmt& s, const std::vector<int>& path) {
  return const_cast<Expr*>(expr_at(static_cast<const Stmt&>(s), path));
}

std::string describe(const Edit& e, const lang::Program* program) {
  std::string where = e.target.function + ":" + std::to_string(e.target.line);
  const Stmt* target = nullptr;
  std::optional<lang::ProgramIndex> index;
  if (program) {
    index.emplace(*program);
    int id = index->resolve(e.target);
    if (id >= 0) target = &index->stmt(id);
  }
  switch (e.action) {
    case EditAction::ReplaceExpr: {
      std::string old = "expression";
      if (target)
        if (const Expr* x = expr_at(*target, e.path)) old = lang::pretty_print(*x);
      return where + " replace " + old + " -> " + lang::pretty_print(e.expr);
    }
    case EditAction::ReplaceStmt:
      return where + " replace statement with " + lang::header_text(e.stmt);
    case EditAction::InsertBefore: return where + " insert before: " + lang::header_text(e.stmt);
    case EditAction::InsertAfter: return where + " insert after: " + lang::header_text(e.stmt);
    case EditAction::Delete:
      return where + " delete " + (target ? lang::header_text(*target) : std::string("statement"));
    case EditAction::WrapIf:
      return where + " wrap " + std::to_string(e.span) + " statement(s) in if (" +
             lang::pretty_print(e.expr) + ")";
  }
  return where;
}

std::string describe(const Patch& p, const lang::Program* program) {
  std::string out;
  for (std::size_t i = 0; i < p.edits.size(); ++i) {
    if (i) out += "; ";
    out += describe(p.edits[i], program);
  }
  return out;
}

json edit_to_json(const Edit& e) {
  json j{{"target", {{"function", e.target.function}, {"line", e.target.line}, {"index", e.target.index}}},
         {"action", to_string(e.action)}};
  if (e.action == EditAction::ReplaceExpr) j["path"] = e.path;
  if (has_expr(e.action)) j["expr"] = lang::pretty_print(e.expr);
  if (has_stmt(e.action)) j["stmt"] = stmt_text(e.stmt);
  if (e.action == EditAction::WrapIf) j["span"] = e.span;
  return j;
}

Edit edit_from_json(const json& j) {
  Edit e;
  const json& t = j.at("target");
  e.target = lang::StmtRef{t.at("function").get<std::string>(), t.at("line").get<int>(),
                           t.value("index", 0)};
  std::string action = j.at("action").get<std::string>();
  bool found = false;
  for (EditAction a : {EditAction::ReplaceExpr, EditAction::ReplaceStmt, EditAction::InsertBefore,
                       EditAction::InsertAfter, EditAction::Delete, EditAction::WrapIf})
    if (action == to_string(a)) {
      e.action = a;
      found = true;
    }
  if (!found) throw std::invalid_argument("unknown edit action '" + action + "'");
  if (e.action == EditAction::ReplaceExpr) e.path = j.at("path").get<std::vector<int>>();
  if (has_expr(e.action)) e.expr = lang::parse_expression(j.at("expr").get<std::string>());
  if (has_stmt(e.action)) e.stmt = lang::parse_statement(j.at("stmt").get<std::string>());
  if (e.action == EditAction::WrapIf) e.span = j.at("span").get<int>();
  return e;
}

json patch_to_json(const Patch& p) {
  json edits = json::array();
  for (const Edit& e : p.edits) edits.push_back(edit_to_json(e));
  json j{{"edits", edits}, {"strategy", p.strategy}, {"provenance", p.provenance}};
  j["relationship"] = p.relationship ? json(to_string(*p.relationship)) : json(nullptr);
  if (p.co_targeting) j["co_targeting"] = true;
  return j;
}

Patch patch_from_json(const json& j) {
  Patch p;
  for (const auto& e : j.at("edits")) p.edits.push_back(edit_from_json(e));
  p.strategy = j.value("strategy", "");
  p.provenance = j.value("provenance", "");
  if (j.contains("relationship") && !j["relationship"].is_null()) {
    p.relationship = relationship_from_string(j["relationship"].get<std::string>());
    if (!p.relationship) throw std::invalid_argument("unknown relationship");
  }
  p.co_targeting = j.value("co_targeting", false);
  return p;
}

Stmt make_synthetic(Stmt s, int line) {
  s.synthetic = true;
  s.line = line;
  s.id = -1;
  for (auto& b : s.blocks)
    for (auto& c : b) c = make_synthetic(std::move(c), line);
  return s;
}

namespace {

struct Slot {
  lang::Block* block = nullptr;
  std::size_t pos = 0;
};

bool find_slot(lang::Block& block, int id, Slot& out) {
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block[i].id == id) {
      out = {&block, i};
      return true;
    }
    for (auto& b : block[i].blocks)
      if (find_slot(b, id, out)) return true;
  }
  return false;
}

bool locate_slot(lang::Program& p, int id, Slot& s) {
  for (auto& f : p.functions)
    if (find_slot(f.body, id, s)) return true;
  return false;
}

void subtree_ids(const Stmt& s, std::vector<int>& out) {
  out.push_back(s.id);
  for (const auto& b : s.blocks)
    for (const auto& c : b) subtree_ids(c, out);
}

int max_line(const Stmt& s) {
  int m = s.line;
  for (const auto& b : s.blocks)
    for (const auto& c : b) m = std::max(m, max_line(c));
  return m;
}

}  // namespace

lang::Program apply_patch(const lang::Program& program, const Patch& patch) {
  using Kind = ApplyError::Kind;
  if (patch.edits.empty()) throw ApplyError(Kind::IllFormed, -1, "patch has no edits");
  lang::ProgramIndex index(program);

  struct Resolved {
    int id;
    int last_id;
    std::size_t order;
  };
  std::vector<Resolved> resolved;
  std::map<int, std::size_t> touched_by;
  for (std::size_t i = 0; i < patch.edits.size(); ++i) {
    const Edit& e = patch.edits[i];
    const int ei = static_cast<int>(i);
    int id = index.resolve(e.target);
    if (id < 0)
      throw ApplyError(Kind::TargetNotFound, ei, "edit target " + lang::to_string(e.target) + " not found");
    const Stmt& s = index.stmt(id);
    std::vector<int> touched;
    int last_id = id;
    switch (e.action) {
      case EditAction::ReplaceExpr:
        if (!expr_at(s, e.path))
          throw ApplyError(Kind::IllFormed, ei, "expression path does not exist at " + lang::to_string(e.target));
        touched.push_back(id);
        break;
      case EditAction::ReplaceStmt:
      case EditAction::Delete: subtree_ids(s, touched); break;
      case EditAction::InsertBefore:
      case EditAction::InsertAfter: touched.push_back(id); break;
      case EditAction::WrapIf: {
        const lang::Block& block = index.containing_block(id);
        const int pos = index.info(id).position;
        if (e.span < 1 || pos + e.span > static_cast<int>(block.size()))
          throw ApplyError(Kind::IllFormed, ei, "wrap span leaves its block");
        for (int k = 0; k < e.span; ++k) touched.push_back(block[static_cast<std::size_t>(pos + k)].id);
        last_id = touched.back();
        break;
      }
    }
    for (int t : touched) {
      auto [it, fresh] = touched_by.emplace(t, i);
      if (!fresh && it->second != i && !patch.co_targeting)
        throw ApplyError(Kind::ConflictingEdits, ei,
                         "edits " + std::to_string(it->second) + " and " + std::to_string(i) +
                             " touch the same statement");
    }
    resolved.push_back({id, last_id, i});
  }

  std::stable_sort(resolved.begin(), resolved.end(),
                   [](const Resolved& a, const Resolved& b) { return a.id > b.id; });

  lang::Program out = program;
  for (const Resolved& r : resolved) {
    const Edit& e = patch.edits[r.order];
    Slot slot;
    if (!locate_slot(out, r.id, slot))
      throw ApplyError(Kind::ConflictingEdits, static_cast<int>(r.order),
                       "target " + lang::to_string(e.target) + " was removed by another edit");
    Stmt& s = (*slot.block)[slot.pos];
    switch (e.action) {
      case EditAction::ReplaceExpr: *expr_at(s, e.path) = e.expr; break;
      case EditAction::ReplaceStmt: {
        Stmt repl = make_synthetic(e.stmt, s.line);
        repl.synthetic = s.synthetic;
        // Later edits on the same target still find it.
        repl.id = s.id;
        s = std::move(repl);
        break;
      }
      case EditAction::InsertBefore:
        slot.block->insert(slot.block->begin() + static_cast<long>(slot.pos), make_synthetic(e.stmt, s.line));
        break;
      case EditAction::InsertAfter: {
        int line = max_line(s);
        slot.block->insert(slot.block->begin() + static_cast<long>(slot.pos) + 1,
                           make_synthetic(e.stmt, line));
        break;
      }
      case EditAction::Delete: slot.block->erase(slot.block->begin() + static_cast<long>(slot.pos)); break;
      case EditAction::WrapIf: {
        std::size_t end = slot.pos;
        while (end < slot.block->size() && (*slot.block)[end].id != r.last_id) ++end;
        if (end == slot.block->size())
          throw ApplyError(Kind::IllFormed, static_cast<int>(r.order), "wrap span was split by another edit");
        Stmt wrap;
        wrap.kind = lang::StmtKind::If;
        wrap.line = s.line;
        wrap.synthetic = true;
        wrap.exprs.push_back(e.expr);
        lang::Block body(std::make_move_iterator(slot.block->begin() + static_cast<long>(slot.pos)),
                         std::make_move_iterator(slot.block->begin() + static_cast<long>(end) + 1));
        slot.block->erase(slot.block->begin() + static_cast<long>(slot.pos),
                          slot.block->begin() + static_cast<long>(end) + 1);
        wrap.blocks.push_back(std::move(body));
        slot.block->insert(slot.block->begin() + static_cast<long>(slot.pos), std::move(wrap));
        break;
      }
    }
  }
  lang::assign_ids(out);
  try {
    lang::check(out);
  } catch (const lang::LangError& err) {
    throw ApplyError(Kind::IllFormed, -1, std::string("patched program is ill-formed: ") + err.what());
  }
  out.source_hash = lang::content_digest(lang::pretty_print(out));
  return out;
}

}  // namespace tracefix::patch
