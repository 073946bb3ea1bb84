#pragma once

#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "loam/kernel.hpp"

namespace loam::ir {

namespace detail {

inline bool expr_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
  case ExprNode::Kind::Literal: {
    // bitwise comparison so -0.0 and 0.0 stay distinct
    return std::memcmp(&a.value, &b.value, sizeof(Real)) == 0;
  }
  case ExprNode::Kind::Ref: return a.name == b.name;
  case ExprNode::Kind::Access:
    if (a.name != b.name || a.args.size() != b.args.size()) return false;
    break;
  case ExprNode::Kind::Unary:
    if (a.un != b.un) return false;
    break;
  case ExprNode::Kind::Binary:
    if (a.bin != b.bin) return false;
    break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (size_t k = 0; k < a.args.size(); ++k)
    if (!expr_equal(*a.args[k], *b.args[k])) return false;
  return true;
}

inline void free_names(const ExprNode& e, std::set<std::string>& out) {
  if (e.kind == ExprNode::Kind::Ref || e.kind == ExprNode::Kind::Access) out.insert(e.name);
  for (const auto& a : e.args) free_names(*a, out);
}

/// Names assigned or declared anywhere inside the statement list.
inline void modified_names(const std::vector<StmtPtr>& stmts, std::set<std::string>& out) {
  for (const auto& s : stmts) {
    switch (s->kind) {
    case Stmt::Kind::Decl: out.insert(s->name); break;
    case Stmt::Kind::Assign: out.insert(s->name); break;
    case Stmt::Kind::For: modified_names(s->body, out); break;
    }
  }
}

inline bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return false;
  return true;
}

struct HoistCtx {
  int counter = 0;
  std::set<std::string> taken;

  std::string fresh() {
    std::string name;
    do {
      name = "t" + std::to_string(counter++);
    } while (taken.count(name));
    taken.insert(name);
    return name;
  }
};

inline void collect_names(const std::vector<StmtPtr>& stmts, std::set<std::string>& out) {
  for (const auto& s : stmts) {
    out.insert(s->name);
    if (s->kind == Stmt::Kind::For) collect_names(s->body, out);
  }
}

/// Replaces maximal loop-invariant compound subexpressions of a value
/// expression with references to hoisted temporaries. Index argument lists are
/// never entered: indices must remain integer expressions.
inline ExprPtr extract_invariants(const ExprPtr& e, const std::set<std::string>& forbidden,
                                  std::vector<std::pair<std::string, ExprPtr>>& hoisted,
                                  HoistCtx& ctx) {
  bool compound = e->kind == ExprNode::Kind::Unary || e->kind == ExprNode::Kind::Binary;
  if (compound) {
    std::set<std::string> free;
    free_names(*e, free);
    if (disjoint(free, forbidden)) {
      for (auto& [name, expr] : hoisted)
        if (expr_equal(*expr, *e)) return loam::ir::ref(name).node;
      std::string name = ctx.fresh();
      hoisted.emplace_back(name, e);
      return loam::ir::ref(name).node;
    }
    auto n = std::make_shared<ExprNode>(*e);
    for (auto& a : n->args) a = extract_invariants(a, forbidden, hoisted, ctx);
    return n;
  }
  return e; // leaves and indexed accesses stay put
}

inline std::vector<StmtPtr> hoist_in(const std::vector<StmtPtr>& stmts, HoistCtx& ctx);

inline StmtPtr hoist_loop(const Stmt& loop_stmt, std::vector<StmtPtr>& before, HoistCtx& ctx) {
  // Innermost first: rewrite the body, then hoist out of this loop.
  std::vector<StmtPtr> body = hoist_in(loop_stmt.body, ctx);

  std::set<std::string> forbidden;
  forbidden.insert(loop_stmt.name);
  modified_names(body, forbidden);

  std::vector<std::pair<std::string, ExprPtr>> hoisted;
  std::vector<StmtPtr> new_body;
  for (const auto& sp : body) {
    if (sp->kind == Stmt::Kind::Assign) {
      ExprPtr rhs = extract_invariants(sp->rhs, forbidden, hoisted, ctx);
      if (rhs != sp->rhs) {
        auto s = std::make_shared<Stmt>(*sp);
        s->rhs = rhs;
        new_body.push_back(s);
        continue;
      }
    }
    new_body.push_back(sp);
  }
  for (auto& [name, expr] : hoisted) before.push_back(decl_scalar(name, Expr(expr)));

  // Whole-statement motion: declarations whose init no longer depends on this
  // loop move out in front of it, as long as nothing in the loop writes them.
  std::set<std::string> still_modified;
  bool moved = true;
  while (moved) {
    moved = false;
    still_modified.clear();
    modified_names(new_body, still_modified);
    for (size_t k = 0; k < new_body.size(); ++k) {
      const Stmt& s = *new_body[k];
      if (s.kind != Stmt::Kind::Decl || !s.init) continue;
      bool reassigned = false;
      for (const auto& other : new_body)
        if (other != new_body[k] && other->kind != Stmt::Kind::Decl) {
          std::set<std::string> m;
          modified_names({other}, m);
          if (m.count(s.name)) reassigned = true;
        }
      if (reassigned) continue;
      std::set<std::string> free;
      free_names(*s.init, free);
      std::set<std::string> deps = still_modified;
      deps.erase(s.name);
      deps.insert(loop_stmt.name);
      if (!disjoint(free, deps)) continue;
      before.push_back(new_body[k]);
      new_body.erase(new_body.begin() + k);
      moved = true;
      break;
    }
  }

  auto out = std::make_shared<Stmt>(loop_stmt);
  out->body = std::move(new_body);
  return out;
}

inline std::vector<StmtPtr> hoist_in(const std::vector<StmtPtr>& stmts, HoistCtx& ctx) {
  std::vector<StmtPtr> out;
  for (const auto& sp : stmts) {
    if (sp->kind == Stmt::Kind::For)
      out.push_back(hoist_loop(*sp, out, ctx));
    else
      out.push_back(sp);
  }
  return out;
}

} // namespace detail

/// Loop-invariant code motion: pure compound subexpressions whose free
/// variables exclude a loop's variable are bound to fresh locals declared
/// immediately before that loop, innermost loops first.
inline KernelAst hoist_invariants(const KernelAst& ast) {
  detail::HoistCtx ctx;
  for (const auto& p : ast.params) ctx.taken.insert(p.name);
  detail::collect_names(ast.body, ctx.taken);
  KernelAst out;
  out.name = ast.name;
  out.params = ast.params;
  out.body = detail::hoist_in(ast.body, ctx);
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline ExprPtr fold_expr(const ExprPtr& e) {
  switch (e->kind) {
  case ExprNode::Kind::Literal:
  case ExprNode::Kind::Ref: return e;
  default: break;
  }
  auto n = std::make_shared<ExprNode>(*e);
  for (auto& a : n->args) a = fold_expr(a);

  auto is_lit = [](const ExprPtr& x, Real v) {
    return x->kind == ExprNode::Kind::Literal && x->value == v;
  };
  auto all_lit = [&]() {
    for (const auto& a : n->args)
      if (a->kind != ExprNode::Kind::Literal) return false;
    return true;
  };

  if (n->kind == ExprNode::Kind::Unary && all_lit()) {
    Real v = n->args[0]->value;
    switch (n->un) {
    case UnOp::Neg: v = -v; break;
    case UnOp::Sqrt: v = std::sqrt(v); break;
    case UnOp::Sin: v = std::sin(v); break;
    case UnOp::Cos: v = std::cos(v); break;
    }
    return Expr::literal(v);
  }
  if (n->kind == ExprNode::Kind::Binary) {
    if (all_lit()) {
      Real a = n->args[0]->value, b = n->args[1]->value, v = 0.0;
      switch (n->bin) {
      case BinOp::Add: v = a + b; break;
      case BinOp::Sub: v = a - b; break;
      case BinOp::Mul: v = a * b; break;
      case BinOp::Div: v = a / b; break;
      }
      return Expr::literal(v);
    }
    if (n->bin == BinOp::Mul) {
      if (is_lit(n->args[0], 1.0)) return n->args[1];
      if (is_lit(n->args[1], 1.0)) return n->args[0];
    }
    if (n->bin == BinOp::Add) {
      if (is_lit(n->args[0], 0.0)) return n->args[1];
      if (is_lit(n->args[1], 0.0)) return n->args[0];
    }
  }
  return n;
}

inline StmtPtr fold_stmt(const StmtPtr& sp) {
  auto s = std::make_shared<Stmt>(*sp);
  switch (s->kind) {
  case Stmt::Kind::Decl:
    if (s->init) s->init = fold_expr(s->init);
    break;
  case Stmt::Kind::Assign:
    for (auto& i : s->indices) i = fold_expr(i);
    s->rhs = fold_expr(s->rhs);
    break;
  case Stmt::Kind::For:
    for (auto& b : s->body) b = fold_stmt(b);
    break;
  }
  return s;
}

} // namespace detail

/// Replaces literal-only subexpressions by their value and simplifies
/// multiplications by one and additions of zero.
inline KernelAst fold_constants(const KernelAst& ast) {
  KernelAst out;
  out.name = ast.name;
  out.params = ast.params;
  for (const auto& s : ast.body) out.body.push_back(detail::fold_stmt(s));
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline ExprPtr subst_expr(const ExprPtr& e, const std::string& name, const ExprPtr& repl) {
  if (e->kind == ExprNode::Kind::Ref && e->name == name) return repl;
  if (e->args.empty()) return e;
  auto n = std::make_shared<ExprNode>(*e);
  for (auto& a : n->args) a = subst_expr(a, name, repl);
  return n;
}

inline StmtPtr subst_stmt(const StmtPtr& sp, const std::string& name, const ExprPtr& repl) {
  auto s = std::make_shared<Stmt>(*sp);
  switch (s->kind) {
  case Stmt::Kind::Decl:
    if (s->init) s->init = subst_expr(s->init, name, repl);
    break;
  case Stmt::Kind::Assign:
    for (auto& i : s->indices) i = subst_expr(i, name, repl);
    s->rhs = subst_expr(s->rhs, name, repl);
    break;
  case Stmt::Kind::For:
    for (auto& b : s->body) b = subst_stmt(b, name, repl);
    break;
  }
  return s;
}

inline ExprPtr rename_expr(const ExprPtr& e, const std::map<std::string, std::string>& names) {
  auto n = std::make_shared<ExprNode>(*e);
  if (e->kind == ExprNode::Kind::Ref || e->kind == ExprNode::Kind::Access) {
    auto it = names.find(e->name);
    if (it != names.end()) n->name = it->second;
  }
  for (auto& a : n->args) a = rename_expr(a, names);
  return n;
}

inline StmtPtr rename_stmt(const StmtPtr& sp, const std::map<std::string, std::string>& names) {
  auto s = std::make_shared<Stmt>(*sp);
  auto it = names.find(s->name);
  if (it != names.end()) s->name = it->second;
  if (s->init) s->init = rename_expr(s->init, names);
  for (auto& i : s->indices) i = rename_expr(i, names);
  if (s->rhs) s->rhs = rename_expr(s->rhs, names);
  for (auto& b : s->body) b = rename_stmt(b, names);
  return s;
}

inline void collect_introduced(const std::vector<StmtPtr>& stmts, std::set<std::string>& out) {
  for (const auto& s : stmts) {
    if (s->kind == Stmt::Kind::Decl) out.insert(s->name);
    if (s->kind == Stmt::Kind::For) {
      out.insert(s->name);
      collect_introduced(s->body, out);
    }
  }
}

/// Declarations and nested loop variables inside an unrolled body are renamed
/// per copy so that name uniqueness survives replication.
inline std::vector<StmtPtr> replicate_body(const std::vector<StmtPtr>& body,
                                           const std::string& loop_var, const ExprPtr& index,
                                           int copy, std::set<std::string>& taken) {
  std::set<std::string> introduced;
  collect_introduced(body, introduced);
  std::map<std::string, std::string> renames;
  for (const auto& name : introduced) {
    std::string fresh = name + "_u" + std::to_string(copy);
    while (taken.count(fresh)) fresh += "_";
    taken.insert(fresh);
    renames[name] = fresh;
  }
  std::vector<StmtPtr> out;
  for (const auto& b : body) {
    StmtPtr s = subst_stmt(b, loop_var, index);
    if (!renames.empty()) s = rename_stmt(s, renames);
    out.push_back(s);
  }
  return out;
}

inline std::vector<StmtPtr> unroll_stmts(const std::vector<StmtPtr>& stmts,
                                         const std::string& loop_var, int factor, bool& found,
                                         std::set<std::string>& taken);

inline std::vector<StmtPtr> unroll_one(const StmtPtr& sp, const std::string& loop_var, int factor,
                                       bool& found, std::set<std::string>& taken) {
  if (sp->kind != Stmt::Kind::For) return {sp};
  if (sp->name != loop_var) {
    auto s = std::make_shared<Stmt>(*sp);
    s->body = unroll_stmts(sp->body, loop_var, factor, found, taken);
    return {StmtPtr(s)};
  }
  found = true;
  require(factor > 0 && sp->extent % factor == 0, ErrorKind::NonDividingFactor,
          "unroll factor " + std::to_string(factor) + " does not divide trip count " +
              std::to_string(sp->extent));
  if (factor == sp->extent) {
    // loop eliminated, fully straight-line
    std::vector<StmtPtr> out;
    for (int j = 0; j < factor; ++j) {
      ExprPtr index = Expr::literal(static_cast<Real>(j));
      auto copies = replicate_body(sp->body, loop_var, index, j, taken);
      out.insert(out.end(), copies.begin(), copies.end());
    }
    return out;
  }
  auto s = std::make_shared<Stmt>(*sp);
  s->extent = sp->extent / factor;
  s->body.clear();
  for (int j = 0; j < factor; ++j) {
    ExprPtr index =
        (lit(static_cast<Real>(factor)) * loam::ir::ref(loop_var) + lit(static_cast<Real>(j))).node;
    auto copies = replicate_body(sp->body, loop_var, index, j, taken);
    s->body.insert(s->body.end(), copies.begin(), copies.end());
  }
  return {StmtPtr(s)};
}

inline std::vector<StmtPtr> unroll_stmts(const std::vector<StmtPtr>& stmts,
                                         const std::string& loop_var, int factor, bool& found,
                                         std::set<std::string>& taken) {
  std::vector<StmtPtr> out;
  for (const auto& s : stmts) {
    auto expanded = unroll_one(s, loop_var, factor, found, taken);
    out.insert(out.end(), expanded.begin(), expanded.end());
  }
  return out;
}

} // namespace detail

/// Unrolls the loop identified by its (kernel-unique) loop variable by the
/// given factor. The factor must divide the trip count; replication preserves
/// the original statement order, so results are bitwise identical.
inline KernelAst unroll(const KernelAst& ast, const std::string& loop_var, int factor) {
  KernelAst out;
  out.name = ast.name;
  out.params = ast.params;
  std::set<std::string> taken;
  for (const auto& p : ast.params) taken.insert(p.name);
  detail::collect_names(ast.body, taken);
  bool found = false;
  out.body = detail::unroll_stmts(ast.body, loop_var, factor, found, taken);
  require(found, ErrorKind::UnboundIdentifier, "no loop with variable " + loop_var);
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline StmtPtr pad_stmt(const StmtPtr& sp, int width) {
  auto s = std::make_shared<Stmt>(*sp);
  if (s->kind == Stmt::Kind::For) {
    for (auto& b : s->body) b = pad_stmt(b, width);
    return s;
  }
  if (s->kind != Stmt::Kind::Decl || s->extents.empty()) return s;
  std::vector<int> padded = s->storage_extents;
  int last = static_cast<int>(padded.size()) - 1;
  padded[last] = ((s->extents[last] + width - 1) / width) * width;
  if (padded == s->storage_extents) return s;
  if (s->has_table) {
    // relayout the constant table into the padded storage
    size_t rows = 1;
    for (size_t k = 0; k + 1 < s->extents.size(); ++k) rows *= s->extents[k];
    size_t old_stride = s->storage_extents[last];
    size_t new_stride = padded[last];
    std::vector<Real> table(rows * new_stride, 0.0);
    for (size_t r = 0; r < rows; ++r)
      for (int c = 0; c < s->extents[last]; ++c)
        table[r * new_stride + c] = s->table[r * old_stride + c];
    s->table = std::move(table);
  }
  s->storage_extents = std::move(padded);
  return s;
}

} // namespace detail

/// Rounds the innermost storage extent of every local array up to a multiple
/// of the vector width. Logical extents and loop bounds are unchanged; the
/// declaration records both.
inline KernelAst pad_extents(const KernelAst& ast, int vector_width) {
  require(vector_width == 2 || vector_width == 4 || vector_width == 8,
          ErrorKind::InvalidArgument, "vector width must be 2, 4 or 8");
  KernelAst out;
  out.name = ast.name;
  out.params = ast.params;
  for (const auto& s : ast.body) out.body.push_back(detail::pad_stmt(s, vector_width));
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline void format_real(std::string& out, Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
  // make integral literals read as doubles
  if (std::strpbrk(buf, ".eEni") == nullptr) out += ".0";
}

inline int precedence(const ExprNode& e) {
  if (e.kind == ExprNode::Kind::Binary)
    return (e.bin == BinOp::Add || e.bin == BinOp::Sub) ? 1 : 2;
  if (e.kind == ExprNode::Kind::Unary && e.un == UnOp::Neg) return 3;
  return 4;
}

inline void emit_expr(std::string& out, const ExprNode& e, int parent_prec) {
  int prec = precedence(e);
  switch (e.kind) {
  case ExprNode::Kind::Literal: format_real(out, e.value); return;
  case ExprNode::Kind::Ref: out += e.name; return;
  case ExprNode::Kind::Access:
    out += e.name;
    for (const auto& a : e.args) {
      out += '[';
      emit_expr(out, *a, 0);
      out += ']';
    }
    return;
  case ExprNode::Kind::Unary: {
    if (e.un == UnOp::Neg) {
      if (prec < parent_prec) out += '(';
      out += '-';
      emit_expr(out, *e.args[0], prec + 1);
      if (prec < parent_prec) out += ')';
    } else {
      out += e.un == UnOp::Sqrt ? "sqrt" : (e.un == UnOp::Sin ? "sin" : "cos");
      out += '(';
      emit_expr(out, *e.args[0], 0);
      out += ')';
    }
    return;
  }
  case ExprNode::Kind::Binary: {
    const char* op = e.bin == BinOp::Add   ? " + "
                     : e.bin == BinOp::Sub ? " - "
                     : e.bin == BinOp::Mul ? " * "
                                           : " / ";
    if (prec < parent_prec) out += '(';
    emit_expr(out, *e.args[0], prec);
    out += op;
    // right operand needs a strictly higher binding for - and /
    emit_expr(out, *e.args[1],
              (e.bin == BinOp::Sub || e.bin == BinOp::Div) ? prec + 1 : prec);
    if (prec < parent_prec) out += ')';
    return;
  }
  }
}

inline void emit_stmts(std::string& out, const std::vector<StmtPtr>& stmts, int depth) {
  auto indent = [&]() { out.append(static_cast<size_t>(depth) * 2, ' '); };
  for (const auto& sp : stmts) {
    const Stmt& s = *sp;
    switch (s.kind) {
    case Stmt::Kind::Decl: {
      indent();
      if (s.extents.empty()) {
        out += "double " + s.name;
        if (s.init) {
          out += " = ";
          emit_expr(out, *s.init, 0);
        }
        out += ";\n";
      } else {
        out += s.has_table ? "static const double " : "double ";
        out += s.name;
        for (int e : s.storage_extents) out += "[" + std::to_string(e) + "]";
        if (s.has_table) {
          out += " = {";
          for (size_t k = 0; k < s.table.size(); ++k) {
            if (k) out += ", ";
            format_real(out, s.table[k]);
          }
          out += "}";
        }
        out += ";\n";
      }
      break;
    }
    case Stmt::Kind::Assign: {
      indent();
      out += s.name;
      for (const auto& i : s.indices) {
        out += '[';
        emit_expr(out, *i, 0);
        out += ']';
      }
      out += s.accumulate ? " += " : " = ";
      emit_expr(out, *s.rhs, 0);
      out += ";\n";
      break;
    }
    case Stmt::Kind::For: {
      indent();
      out += "for (int " + s.name + " = 0; " + s.name + " < " + std::to_string(s.extent) +
             "; ++" + s.name + ") {\n";
      emit_stmts(out, s.body, depth + 1);
      indent();
      out += "}\n";
      break;
    }
    }
  }
}

} // namespace detail

/// Deterministic C-like rendering for inspection and debugging. Not parsed
/// back; parameters appear in declaration order, indentation is two spaces.
inline std::string emit_source(const KernelAst& ast) {
  std::string out = "void " + ast.name + "(";
  for (size_t k = 0; k < ast.params.size(); ++k) {
    if (k) out += ", ";
    out += "double " + ast.params[k].name;
    for (int e : ast.params[k].extents) out += "[" + std::to_string(e) + "]";
  }
  out += ") {\n";
  detail::emit_stmts(out, ast.body, 1);
  out += "}\n";
  return out;
}

/// Structural equality of two kernels (used to check pass idempotence).
inline bool ast_equal(const KernelAst& a, const KernelAst& b) {
  return emit_source(a) == emit_source(b);
}

} // namespace loam::ir
