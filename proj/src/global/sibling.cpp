#include <algorithm>
#include <set>

#include "tracefix/global/global.hpp"
#include "tracefix/lang/lexer.hpp"
#include "tracefix/lang/printer.hpp"
#include "tracefix/lang/program_index.hpp"
#include "tracefix/patch/local.hpp"

namespace tracefix::global {

namespace {

struct AbstractTokens {
  std::vector<std::string> abstract;
  // Original spelling of identifier tokens, empty for the rest.
  std::vector<std::string> ident;
};

AbstractTokens abstract_tokens(const lang::Stmt& s) {
  AbstractTokens out;
  std::map<std::string, int> numbering;
  for (const auto& t : lang::tokenize(lang::header_text(s))) {
    if (t.kind == lang::TokenKind::End) break;
    if (t.kind == lang::TokenKind::Ident) {
      int k = numbering.emplace(t.text, static_cast<int>(numbering.size())).first->second;
      out.abstract.push_back("$" + std::to_string(k));
      out.ident.push_back(t.text);
    } else {
      out.abstract.push_back(t.kind == lang::TokenKind::Str ? "\"" + t.text : t.text);
      out.ident.emplace_back();
    }
  }
  return out;
}

using Table = std::vector<std::vector<int>>;

Table edit_table(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  Table d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d;
}

double similarity_of(const Table& d, std::size_t n, std::size_t m) {
  if (n == 0 && m == 0) return 1.0;
  return 1.0 - static_cast<double>(d[n][m]) / static_cast<double>(std::max(n, m));
}

// Identifier pairs on the diagonal steps of one optimal alignment.
std::map<std::string, std::string> aligned_identifiers(const Table& d, const AbstractTokens& a,
                                                       const AbstractTokens& b) {
  std::map<std::string, std::string> out;
  std::size_t i = a.abstract.size(), j = b.abstract.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (i > 0 && j > 0) {
    int diag = d[i - 1][j - 1] + (a.abstract[i - 1] == b.abstract[j - 1] ? 0 : 1);
    if (d[i][j] == diag) {
      pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (d[i][j] == d[i - 1][j] + 1) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  for (auto [x, y] : pairs)
    if (!a.ident[x].empty() && !b.ident[y].empty()) out.emplace(a.ident[x], b.ident[y]);
  return out;
}

}  // namespace

double statement_similarity(const lang::Stmt& a, const lang::Stmt& b) {
  auto ta = abstract_tokens(a), tb = abstract_tokens(b);
  return similarity_of(edit_table(ta.abstract, tb.abstract), ta.abstract.size(), tb.abstract.size());
}

std::vector<Sibling> sibling_locations(const lang::Program& program, const faultloc::RepairLocation& seed,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must be in (0, 1]");
  int seed_id = patch::location_stmt(program, seed);
  if (seed_id < 0) return {};
  lang::ProgramIndex index(program);
  auto ts = abstract_tokens(index.stmt(seed_id));
  std::vector<Sibling> out;
  for (int id = 0; id < index.size(); ++id) {
    const lang::Stmt& s = index.stmt(id);
    if (id == seed_id || s.synthetic) continue;
    auto tt = abstract_tokens(s);
    auto table = edit_table(ts.abstract, tt.abstract);
    double sim = similarity_of(table, ts.abstract.size(), tt.abstract.size());
    if (sim < threshold) continue;
    Sibling sib;
    sib.location.function = index.info(id).function;
    sib.location.line = s.line;
    sib.location.stmt_id = id;
    sib.location.suspiciousness = sim;
    sib.similarity = sim;
    sib.mapping = aligned_identifiers(table, ts, tt);
    out.push_back(std::move(sib));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Sibling& a, const Sibling& b) { return a.similarity > b.similarity; });
  return out;
}

namespace {

struct Renamer {
  const std::map<std::string, std::string>& mapping;
  const std::set<std::string>& scope;

  std::string name(const std::string& n) const {
    auto it = mapping.find(n);
    if (it != mapping.end()) return it->second;
    if (scope.count(n)) return n;
    throw TransplantFailed("no counterpart for '" + n + "' at the sibling");
  }
  void expr(lang::Expr& e) const {
    if (e.kind == lang::ExprKind::Var && e.text != "unit") e.text = name(e.text);
    for (auto& c : e.children) expr(c);
  }
  void stmt(lang::Stmt& s, std::set<std::string>& declared) const {
    for (auto& e : s.exprs) expr(e);
    if (s.kind == lang::StmtKind::Let) {
      declared.insert(s.name);
    } else if (!s.name.empty() && !declared.count(s.name)) {
      s.name = name(s.name);
    }
    for (auto& b : s.blocks)
      for (auto& c : b) stmt(c, declared);
  }
};

}  // namespace

patch::Edit transplant_edit(const lang::Program& program, const patch::Edit& edit, const Sibling& sibling) {
  lang::ProgramIndex index(program);
  int id = sibling.location.stmt_id;
  if (!index.contains(id) || index.stmt(id).synthetic) throw TransplantFailed("sibling does not resolve");
  auto scope_list = index.variables_in_scope(id);
  std::set<std::string> scope(scope_list.begin(), scope_list.end());
  Renamer rename{sibling.mapping, scope};
  patch::Edit out = edit;
  out.target = index.ref_of(id);
  std::set<std::string> declared;
  switch (edit.action) {
    case patch::EditAction::ReplaceExpr:
      if (!patch::expr_at(index.stmt(id), edit.path)) throw TransplantFailed("sibling has no matching subexpression");
      rename.expr(out.expr);
      break;
    case patch::EditAction::WrapIf: rename.expr(out.expr); break;
    case patch::EditAction::ReplaceStmt:
    case patch::EditAction::InsertBefore:
    case patch::EditAction::InsertAfter: rename.stmt(out.stmt, declared); break;
    case patch::EditAction::Delete: break;
  }
  patch::Patch probe;
  probe.edits.push_back(out);
  try {
    patch::apply_patch(program, probe);
  } catch (const patch::ApplyError& e) {
    throw TransplantFailed(std::string("transplant does not apply: ") + e.what());
  }
  return out;
}

SimultaneousResult simultaneous_repair(const lang::Program& program, const patch::Patch& seed_patch,
                                       const std::vector<Sibling>& siblings) {
  if (seed_patch.edits.size() != 1) throw std::invalid_argument("seed patch must have exactly one edit");
  SimultaneousResult out;
  patch::Patch combined;
  combined.edits.push_back(seed_patch.edits[0]);
  combined.strategy = "simultaneous";
  combined.relationship = patch::Relationship::RIF;
  lang::ProgramIndex index(program);
  for (const auto& sib : siblings) {
    lang::StmtRef where{sib.location.function, sib.location.line, 0};
    if (index.contains(sib.location.stmt_id) && !index.stmt(sib.location.stmt_id).synthetic)
      where = index.ref_of(sib.location.stmt_id);
    try {
      patch::Edit e = transplant_edit(program, seed_patch.edits[0], sib);
      if (e.target == seed_patch.edits[0].target) throw TransplantFailed("sibling is the seed");
      patch::Patch trial = combined;
      trial.edits.push_back(e);
      try {
        patch::apply_patch(program, trial);
      } catch (const patch::ApplyError& err) {
        throw TransplantFailed(std::string("conflicts with earlier edits: ") + err.what());
      }
      combined = std::move(trial);
    } catch (const TransplantFailed& f) {
      out.failures.push_back({where, f.what()});
    }
  }
  if (combined.edits.size() >= 2) {
    combined.provenance = "co-change of " + std::to_string(combined.edits.size()) + " similar statements";
    out.patches.push_back(std::move(combined));
  }
  return out;
}

}  // namespace tracefix::global
