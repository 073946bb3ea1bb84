#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loam/common.hpp"

namespace loam::ir {

enum class BinOp { Add, Sub, Mul, Div };
enum class UnOp { Neg, Sqrt, Sin, Cos };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression node. Kinds:
///   Literal        value
///   Ref            name (parameter, local or loop variable)
///   Access         name[args...] indexed read of a parameter/local array
///   Unary, Binary  operator applied to args
struct ExprNode {
  enum class Kind { Literal, Ref, Access, Unary, Binary };
  Kind kind;
  Real value = 0.0;
  std::string name;
  BinOp bin = BinOp::Add;
  UnOp un = UnOp::Neg;
  std::vector<ExprPtr> args;
};

/// Lightweight handle with operator sugar for building expressions.
struct Expr {
  ExprPtr node;
  Expr() = default;
  Expr(ExprPtr n) : node(std::move(n)) {}
  Expr(double v) : node(literal(v)) {}
  Expr(int v) : node(literal(static_cast<Real>(v))) {}

  static ExprPtr literal(Real v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Literal;
    n->value = v;
    return n;
  }
};

inline Expr lit(Real v) { return Expr(Expr::literal(v)); }

inline Expr ref(const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Ref;
  n->name = name;
  return Expr(n);
}

inline Expr idx(const std::string& name, std::vector<Expr> indices) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Access;
  n->name = name;
  for (auto& i : indices) n->args.push_back(i.node);
  return Expr(n);
}

inline Expr binary(BinOp op, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->bin = op;
  n->args = {a.node, b.node};
  return Expr(n);
}

inline Expr unary(UnOp op, Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->un = op;
  n->args = {a.node};
  return Expr(n);
}

inline Expr operator+(Expr a, Expr b) { return binary(BinOp::Add, a, b); }
inline Expr operator-(Expr a, Expr b) { return binary(BinOp::Sub, a, b); }
inline Expr operator*(Expr a, Expr b) { return binary(BinOp::Mul, a, b); }
inline Expr operator/(Expr a, Expr b) { return binary(BinOp::Div, a, b); }
inline Expr operator-(Expr a) { return unary(UnOp::Neg, a); }
inline Expr sqrt_of(Expr a) { return unary(UnOp::Sqrt, a); }
inline Expr sin_of(Expr a) { return unary(UnOp::Sin, a); }
inline Expr cos_of(Expr a) { return unary(UnOp::Cos, a); }

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// Immutable statement node. Kinds:
///   Decl    local scalar (optional init expr) or local array (optional
///           constant table). Arrays carry logical extents plus storage
///           extents, which differ only after pad_extents.
///   Assign  name[indices] = rhs, or += rhs when accumulate is set
///   For     unit-stride loop over [0, extent) with a constant trip count
struct Stmt {
  enum class Kind { Decl, Assign, For };
  Kind kind;

  std::string name; // Decl local name / Assign target / For loop variable
  std::vector<int> extents;
  std::vector<int> storage_extents;
  std::vector<Real> table;
  bool has_table = false;
  ExprPtr init;

  std::vector<ExprPtr> indices;
  ExprPtr rhs;
  bool accumulate = false;

  int extent = 0;
  std::vector<StmtPtr> body;
};

inline StmtPtr decl_scalar(const std::string& name, std::optional<Expr> init = std::nullopt) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Decl;
  s->name = name;
  if (init) s->init = init->node;
  return s;
}

inline StmtPtr decl_table(const std::string& name, std::vector<int> extents,
                          std::vector<Real> table) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Decl;
  s->name = name;
  s->extents = extents;
  s->storage_extents = std::move(extents);
  s->table = std::move(table);
  s->has_table = true;
  return s;
}

inline StmtPtr decl_array(const std::string& name, std::vector<int> extents) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Decl;
  s->name = name;
  s->extents = extents;
  s->storage_extents = std::move(extents);
  return s;
}

inline StmtPtr assign(const std::string& name, std::vector<Expr> indices, Expr rhs,
                      bool accumulate = false) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Assign;
  s->name = name;
  for (auto& i : indices) s->indices.push_back(i.node);
  s->rhs = rhs.node;
  s->accumulate = accumulate;
  return s;
}

inline StmtPtr accum(const std::string& name, std::vector<Expr> indices, Expr rhs) {
  return assign(name, std::move(indices), rhs, true);
}

inline StmtPtr loop(const std::string& var, int extent, std::vector<StmtPtr> body) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::For;
  s->name = var;
  s->extent = extent;
  s->body = std::move(body);
  return s;
}

/// Kernel parameter: rank is implied by the extents (scalar / vector / matrix).
struct Param {
  std::string name;
  std::vector<int> extents;

  size_t size() const {
    size_t n = 1;
    for (int e : extents) n *= e;
    return n;
  }
};

struct KernelAst {
  std::string name;
  std::vector<Param> params;
  std::vector<StmtPtr> body;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

struct SymbolInfo {
  enum class Kind { Param, Local, LoopVar } kind;
  int rank = 0;
};

inline void validate_expr(const ExprNode& e,
                          const std::vector<std::pair<std::string, SymbolInfo>>& scope) {
  auto lookup = [&](const std::string& name) -> const SymbolInfo* {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  };
  switch (e.kind) {
  case ExprNode::Kind::Literal: return;
  case ExprNode::Kind::Ref: {
    const auto* info = lookup(e.name);
    require(info != nullptr, ErrorKind::UnboundIdentifier, "unbound identifier " + e.name);
    require(info->rank == 0 || info->kind == SymbolInfo::Kind::LoopVar,
            ErrorKind::ShapeMismatch, e.name + " referenced without indices");
    return;
  }
  case ExprNode::Kind::Access: {
    const auto* info = lookup(e.name);
    require(info != nullptr, ErrorKind::UnboundIdentifier, "unbound identifier " + e.name);
    require(info->kind != SymbolInfo::Kind::LoopVar, ErrorKind::ShapeMismatch,
            "cannot index loop variable " + e.name);
    require(static_cast<int>(e.args.size()) == info->rank, ErrorKind::ShapeMismatch,
            e.name + " indexed with wrong rank");
    for (const auto& a : e.args) validate_expr(*a, scope);
    return;
  }
  default:
    for (const auto& a : e.args) validate_expr(*a, scope);
  }
}

inline void validate_stmts(const std::vector<StmtPtr>& stmts,
                           std::vector<std::pair<std::string, SymbolInfo>>& scope,
                           std::vector<std::string>& loop_vars) {
  auto bound = [&](const std::string& name) {
    for (auto& [n, info] : scope)
      if (n == name) return true;
    return false;
  };
  size_t scope_mark = scope.size();
  for (const auto& sp : stmts) {
    const Stmt& s = *sp;
    switch (s.kind) {
    case Stmt::Kind::Decl: {
      require(!bound(s.name), ErrorKind::InvalidArgument, "redeclaration of " + s.name);
      for (int e : s.extents)
        require(e > 0, ErrorKind::InvalidArgument, "non-positive extent in " + s.name);
      require(s.extents.size() == s.storage_extents.size(), ErrorKind::ShapeMismatch,
              "storage rank mismatch in " + s.name);
      for (size_t k = 0; k < s.extents.size(); ++k)
        require(s.storage_extents[k] >= s.extents[k], ErrorKind::ShapeMismatch,
                "storage extent below logical extent in " + s.name);
      if (s.has_table) {
        size_t n = 1;
        for (int e : s.storage_extents) n *= e;
        require(s.table.size() == n, ErrorKind::ShapeMismatch,
                "table size does not match extents of " + s.name);
      }
      if (s.init) {
        require(s.extents.empty(), ErrorKind::ShapeMismatch,
                "init expression on array declaration " + s.name);
        validate_expr(*s.init, scope);
      }
      scope.push_back({s.name, {SymbolInfo::Kind::Local, static_cast<int>(s.extents.size())}});
      break;
    }
    case Stmt::Kind::Assign: {
      SymbolInfo* info = nullptr;
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (it->first == s.name) {
          info = &it->second;
          break;
        }
      require(info != nullptr, ErrorKind::UnboundIdentifier, "assignment to unbound " + s.name);
      require(info->kind != SymbolInfo::Kind::LoopVar, ErrorKind::InvalidArgument,
              "assignment to loop variable " + s.name);
      require(static_cast<int>(s.indices.size()) == info->rank, ErrorKind::ShapeMismatch,
              "assignment to " + s.name + " with wrong index rank");
      for (const auto& i : s.indices) validate_expr(*i, scope);
      validate_expr(*s.rhs, scope);
      break;
    }
    case Stmt::Kind::For: {
      require(!bound(s.name), ErrorKind::InvalidArgument,
              "loop variable " + s.name + " shadows an existing symbol");
      for (const auto& v : loop_vars)
        require(v != s.name, ErrorKind::InvalidArgument,
                "duplicate loop variable name " + s.name);
      loop_vars.push_back(s.name);
      require(s.extent >= 0, ErrorKind::InvalidArgument, "negative loop extent");
      scope.push_back({s.name, {SymbolInfo::Kind::LoopVar, 0}});
      validate_stmts(s.body, scope, loop_vars);
      scope.pop_back();
      break;
    }
    }
  }
  scope.resize(scope_mark);
}

} // namespace detail

/// Checks identifier binding, shapes and loop-variable uniqueness.
inline void validate(const KernelAst& ast) {
  std::vector<std::pair<std::string, detail::SymbolInfo>> scope;
  for (const auto& p : ast.params) {
    for (auto& [n, info] : scope)
      require(n != p.name, ErrorKind::InvalidArgument, "duplicate parameter " + p.name);
    scope.push_back({p.name, {detail::SymbolInfo::Kind::Param, static_cast<int>(p.extents.size())}});
  }
  std::vector<std::string> loop_vars;
  detail::validate_stmts(ast.body, scope, loop_vars);
}

// ---------------------------------------------------------------------------
// Interpreter: sequential big-step evaluation, loops ascending, floating-point
// operations applied in source order. This is the semantic reference that the
// optimization passes are checked against.

namespace detail {

struct Binding {
  Real* data = nullptr;
  const std::vector<int>* extents = nullptr;         // logical
  const std::vector<int>* storage_extents = nullptr; // physical layout
  bool loop_var = false;
  long loop_value = 0;
};

class Env {
public:
  void push(const std::string& name, Binding b) { entries_.emplace_back(name, b); }
  void pop() { entries_.pop_back(); }
  Binding* find(const std::string& name) {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

private:
  std::vector<std::pair<std::string, Binding>> entries_;
};

inline Real eval(const ExprNode& e, Env& env);

inline long eval_index(const ExprNode& e, Env& env) {
  switch (e.kind) {
  case ExprNode::Kind::Literal: {
    long v = static_cast<long>(e.value);
    require(static_cast<Real>(v) == e.value, ErrorKind::ShapeMismatch,
            "non-integral literal used as index");
    return v;
  }
  case ExprNode::Kind::Ref: {
    Binding* b = env.find(e.name);
    require(b && b->loop_var, ErrorKind::ShapeMismatch,
            "index expression must be built from loop variables and literals");
    return b->loop_value;
  }
  case ExprNode::Kind::Binary: {
    long a = eval_index(*e.args[0], env);
    long c = eval_index(*e.args[1], env);
    switch (e.bin) {
    case BinOp::Add: return a + c;
    case BinOp::Sub: return a - c;
    case BinOp::Mul: return a * c;
    default: fail(ErrorKind::ShapeMismatch, "division in index expression");
    }
  }
  default: fail(ErrorKind::ShapeMismatch, "unsupported index expression");
  }
}

inline Real* element_ptr(Binding& b, const std::vector<ExprPtr>& indices, Env& env,
                         const std::string& name) {
  long offset = 0;
  for (size_t k = 0; k < indices.size(); ++k) {
    long i = eval_index(*indices[k], env);
    require(i >= 0 && i < (*b.extents)[k], ErrorKind::IndexOutOfRange,
            "index out of range on " + name);
    offset = offset * (*b.storage_extents)[k] + i;
  }
  return b.data + offset;
}

inline Real eval(const ExprNode& e, Env& env) {
  switch (e.kind) {
  case ExprNode::Kind::Literal: return e.value;
  case ExprNode::Kind::Ref: {
    Binding* b = env.find(e.name);
    require(b != nullptr, ErrorKind::UnboundIdentifier, "unbound identifier " + e.name);
    if (b->loop_var) return static_cast<Real>(b->loop_value);
    return *b->data;
  }
  case ExprNode::Kind::Access: {
    Binding* b = env.find(e.name);
    require(b != nullptr, ErrorKind::UnboundIdentifier, "unbound identifier " + e.name);
    return *element_ptr(*b, e.args, env, e.name);
  }
  case ExprNode::Kind::Unary: {
    Real v = eval(*e.args[0], env);
    switch (e.un) {
    case UnOp::Neg: return -v;
    case UnOp::Sqrt: return std::sqrt(v);
    case UnOp::Sin: return std::sin(v);
    default: return std::cos(v);
    }
  }
  default: {
    Real a = eval(*e.args[0], env);
    Real b = eval(*e.args[1], env);
    switch (e.bin) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    default: return a / b;
    }
  }
  }
}

struct LocalStore {
  std::vector<std::vector<Real>> buffers;
  std::vector<std::vector<int>> extent_store;
};

inline void exec_stmts(const std::vector<StmtPtr>& stmts, Env& env, LocalStore& store) {
  size_t pushed = 0;
  for (const auto& sp : stmts) {
    const Stmt& s = *sp;
    switch (s.kind) {
    case Stmt::Kind::Decl: {
      size_t n = 1;
      for (int e : s.storage_extents) n *= e;
      store.buffers.emplace_back(n, 0.0);
      auto& buf = store.buffers.back();
      if (s.has_table) std::copy(s.table.begin(), s.table.end(), buf.begin());
      Binding b;
      b.data = buf.data();
      b.extents = &s.extents;
      b.storage_extents = &s.storage_extents;
      env.push(s.name, b);
      ++pushed;
      if (s.init) buf[0] = eval(*s.init, env);
      break;
    }
    case Stmt::Kind::Assign: {
      Binding* b = env.find(s.name);
      require(b != nullptr, ErrorKind::UnboundIdentifier, "unbound identifier " + s.name);
      Real* target = element_ptr(*b, s.indices, env, s.name);
      Real v = eval(*s.rhs, env);
      if (s.accumulate)
        *target += v;
      else
        *target = v;
      break;
    }
    case Stmt::Kind::For: {
      Binding b;
      b.loop_var = true;
      env.push(s.name, b);
      for (long i = 0; i < s.extent; ++i) {
        env.find(s.name)->loop_value = i;
        exec_stmts(s.body, env, store);
      }
      env.pop();
      break;
    }
    }
  }
  for (size_t k = 0; k < pushed; ++k) env.pop();
  // Buffers stay alive in the store for the remainder of the call; scoping of
  // names is what matters for correctness here.
}

} // namespace detail

/// Executes the kernel on the staged buffers, one per parameter, laid out
/// contiguously with the parameter's extents.
inline void interpret(const KernelAst& ast, std::span<Real* const> args) {
  require(args.size() == ast.params.size(), ErrorKind::ShapeMismatch,
          ast.name + ": argument count does not match parameters");
  detail::Env env;
  for (size_t k = 0; k < ast.params.size(); ++k) {
    detail::Binding b;
    b.data = args[k];
    b.extents = &ast.params[k].extents;
    b.storage_extents = &ast.params[k].extents;
    env.push(ast.params[k].name, b);
  }
  detail::LocalStore store;
  detail::exec_stmts(ast.body, env, store);
}

// ---------------------------------------------------------------------------

/// Host-language kernel body: receives one buffer pointer per parameter.
using HostFn = std::function<void(Real* const*)>;

/// The executable unit of a parloop: an AST, a host callable, or both.
/// When both exist they must agree to 1e-12 relative on identical inputs.
struct Kernel {
  std::string name;
  std::optional<KernelAst> ast;
  HostFn host;
  std::vector<Param> host_params; // staged signature when no AST is present

  const std::vector<Param>& params() const { return ast ? ast->params : host_params; }
};

using KernelPtr = std::shared_ptr<const Kernel>;

inline KernelPtr make_kernel(KernelAst ast) {
  auto k = std::make_shared<Kernel>();
  k->name = ast.name;
  validate(ast);
  k->ast = std::move(ast);
  return k;
}

inline KernelPtr make_host_kernel(std::string name, std::vector<Param> params, HostFn fn) {
  auto k = std::make_shared<Kernel>();
  k->name = std::move(name);
  k->host_params = std::move(params);
  k->host = std::move(fn);
  return k;
}

inline void invoke(const Kernel& kernel, std::span<Real* const> args) {
  if (kernel.host) {
    kernel.host(args.data());
    return;
  }
  require(kernel.ast.has_value(), ErrorKind::InvalidArgument,
          kernel.name + " has neither AST nor host function");
  interpret(*kernel.ast, args);
}

} // namespace loam::ir
