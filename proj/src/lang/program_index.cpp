#include "tracefix/lang/program_index.hpp"

namespace tracefix::lang {

std::string to_string(const StmtRef& ref) {
  return ref.function + ":" + std::to_string(ref.line) + "#" + std::to_string(ref.index);
}

ProgramIndex::ProgramIndex(const Program& program) : program_(&program) {
  int n = program.statement_count();
  infos_.resize(static_cast<std::size_t>(n));
  containing_.resize(static_cast<std::size_t>(n), nullptr);
  for (const auto& f : program.functions) index_block(f.body, f, -1, 0, 0);
}

void ProgramIndex::index_block(const Block& block, const FunctionDecl& f, int parent,
                               int parent_block, int depth) {
  for (std::size_t i = 0; i < block.size(); ++i) {
    const Stmt& s = block[i];
    if (s.id < 0 || s.id >= size())
      throw std::logic_error("program statement ids are not dense; call assign_ids");
    StmtInfo& info = infos_[static_cast<std::size_t>(s.id)];
    info.stmt = &s;
    info.function = f.name;
    info.parent = parent;
    info.parent_block = parent_block;
    info.position = static_cast<int>(i);
    info.depth = depth;
    containing_[static_cast<std::size_t>(s.id)] = &block;
    for (std::size_t b = 0; b < s.blocks.size(); ++b)
      index_block(s.blocks[b], f, s.id, static_cast<int>(b), depth + 1);
  }
}

std::vector<int> ProgramIndex::locate(const std::string& function, int line) const {
  const FunctionDecl* f = program_->find_function(function);
  if (!f) throw UnknownFunction(function);
  std::vector<int> out;
  for_each_stmt(f->body, f->name, [&](const Stmt& s, const std::string&) {
    if (s.line == line) out.push_back(s.id);
  });
  return out;
}

int ProgramIndex::resolve(const StmtRef& ref) const {
  const FunctionDecl* f = program_->find_function(ref.function);
  if (!f) return -1;
  int seen = 0;
  int found = -1;
  for_each_stmt(f->body, f->name, [&](const Stmt& s, const std::string&) {
    if (found >= 0 || s.synthetic || s.line != ref.line) return;
    if (seen++ == ref.index) found = s.id;
  });
  return found;
}

StmtRef ProgramIndex::ref_of(int stmt_id) const {
  const StmtInfo& in = info(stmt_id);
  if (in.stmt->synthetic) throw std::invalid_argument("synthetic statement has no stable reference");
  const FunctionDecl* f = program_->find_function(in.function);
  int index = 0;
  bool done = false;
  for_each_stmt(f->body, f->name, [&](const Stmt& s, const std::string&) {
    if (done) return;
    if (s.id == stmt_id) {
      done = true;
      return;
    }
    if (!s.synthetic && s.line == in.stmt->line) ++index;
  });
  return StmtRef{in.function, in.stmt->line, index};
}

const Block& ProgramIndex::containing_block(int stmt_id) const {
  return *containing_.at(static_cast<std::size_t>(stmt_id));
}

std::vector<std::string> ProgramIndex::variables_in_scope(int stmt_id) const {
  // Walk from the statement outward: earlier siblings' lets and loop
  // variables of enclosing for-loops, then the parameters.
  std::vector<std::vector<std::string>> layers;
  int cur = stmt_id;
  while (cur >= 0) {
    const StmtInfo& in = info(cur);
    const Block& block = containing_block(cur);
    std::vector<std::string> layer;
    for (int i = 0; i < in.position; ++i)
      if (block[static_cast<std::size_t>(i)].kind == StmtKind::Let)
        layer.push_back(block[static_cast<std::size_t>(i)].name);
    layers.push_back(std::move(layer));
    if (in.parent >= 0 && stmt(in.parent).kind == StmtKind::ForRange)
      layers.push_back({stmt(in.parent).name});
    cur = in.parent;
  }
  std::vector<std::string> out = program_->find_function(info(stmt_id).function)->params;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    out.insert(out.end(), it->begin(), it->end());
  return out;
}

bool ProgramIndex::is_descendant(int descendant, int ancestor) const {
  int cur = info(descendant).parent;
  while (cur >= 0) {
    if (cur == ancestor) return true;
    cur = info(cur).parent;
  }
  return false;
}

std::vector<int> locate(const Program& program, const std::string& function, int line) {
  return ProgramIndex(program).locate(function, line);
}

std::set<std::string> expr_vars(const Expr& expr) {
  std::set<std::string> out;
  for_each_expr(expr, [&](const Expr& e) {
    if (e.kind == ExprKind::Var) out.insert(e.text);
  });
  return out;
}

std::set<std::string> header_reads(const Stmt& stmt) {
  std::set<std::string> out;
  for (const Expr& e : stmt.exprs) {
    auto vs = expr_vars(e);
    out.insert(vs.begin(), vs.end());
  }
  if (stmt.kind == StmtKind::IndexAssign) out.insert(stmt.name);
  return out;
}

bool header_has_call(const Stmt& stmt) {
  bool found = false;
  for (const Expr& e : stmt.exprs)
    for_each_expr(e, [&](const Expr& x) {
      if (x.kind == ExprKind::Call) found = true;
    });
  return found;
}

}  // namespace tracefix::lang
