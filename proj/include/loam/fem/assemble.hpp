#pragma once

#include <functional>
#include <variant>

#include "loam/fem/bc.hpp"
#include "loam/fem/form.hpp"
#include "loam/parloop.hpp"
#include "loam/passes.hpp"
#include "loam/solver.hpp"

namespace loam::fem {

namespace detail {

inline ir::KernelPtr optimized_kernel(const Form& form) {
  auto ast = compile_local_kernel(form);
  return ir::make_kernel(ir::fold_constants(ir::hoist_invariants(ast)));
}

/// Iteration structures for a marked facet subset.
struct FacetSubset {
  SetPtr set;
  MapPtr node_map;
  MapPtr vertex_map;
};

inline FacetSubset marked_facets(const FunctionSpace& space, int marker) {
  const auto& mesh = *space.mesh;
  std::vector<int> facets;
  for (int f = 0; f < mesh.exterior_facets->size(); ++f)
    if (mesh.facet_markers[f] == marker) facets.push_back(f);

  FacetSubset subset;
  subset.set = make_set(static_cast<int>(facets.size()), "marked_facets");
  std::vector<int> nodes, verts;
  for (int f : facets) {
    const int* fn = space.facet_node_map->row(f);
    nodes.insert(nodes.end(), fn, fn + space.facet_node_map->arity());
    const int* fv = mesh.facet_vertex_map->row(f);
    verts.insert(verts.end(), fv, fv + mesh.facet_vertex_map->arity());
  }
  subset.node_map = make_map(subset.set, space.node_set, space.facet_node_map->arity(),
                             std::move(nodes), "marked_facet_node");
  subset.vertex_map = make_map(subset.set, mesh.vertices, mesh.facet_vertex_map->arity(),
                               std::move(verts), "marked_facet_vertex");
  return subset;
}

} // namespace detail

/// Zero row r within its sparsity, set the diagonal to one, and prescribe the
/// right-hand side. Symmetry of A is not preserved.
inline void apply_dirichlet(Mat& A, Dat& b, const DirichletBC& bc) {
  require(A.nrows() == A.ncols() && A.nrows() == bc.space->node_set->size(),
          ErrorKind::ShapeMismatch, "matrix is not square on the bc space");
  const auto& sp = *A.sparsity();
  auto& values = A.values();
  auto rhs = b.mutable_view();
  for (int r : bc.nodes) {
    for (long k = sp.row_offsets()[r]; k < sp.row_offsets()[r + 1]; ++k) values[k] = 0.0;
    long diag = sp.find(r, r);
    require(diag >= 0, ErrorKind::MissingDiagonal,
            "diagonal (" + std::to_string(r) + ", " + std::to_string(r) + ") outside sparsity");
    values[diag] = 1.0;
    rhs[r] = bc.value_at(r);
  }
}

/// Matrix-only variant used right after assembling the left-hand side.
inline void apply_dirichlet_rows(Mat& A, const DirichletBC& bc) {
  const auto& sp = *A.sparsity();
  auto& values = A.values();
  for (int r : bc.nodes) {
    for (long k = sp.row_offsets()[r]; k < sp.row_offsets()[r + 1]; ++k) values[k] = 0.0;
    long diag = sp.find(r, r);
    require(diag >= 0, ErrorKind::MissingDiagonal,
            "diagonal (" + std::to_string(r) + ", " + std::to_string(r) + ") outside sparsity");
    values[diag] = 1.0;
  }
}

/// Assembles a bilinear form into a sparse matrix; boundary rows are zeroed
/// with a unit diagonal for every bc.
inline MatPtr assemble_matrix(const Form& form, const std::vector<DirichletBC>& bcs = {},
                              int threads = 1) {
  require(form.bilinear(), ErrorKind::UnsupportedForm, "matrix assembly needs a bilinear form");
  auto sparsity = build_sparsity(form.test->cell_node_map, form.trial->cell_node_map);
  auto mat = make_mat(std::move(sparsity), "assembled");

  Parloop loop;
  loop.kernel = detail::optimized_kernel(form);
  loop.iterset = form.test->mesh->cells;
  loop.args.push_back(arg(mat, Access::INC, form.test->cell_node_map, form.trial->cell_node_map));
  loop.args.push_back(arg(form.test->mesh->coordinates, Access::READ,
                          form.test->mesh->cell_vertex_map));
  if (form.coefficient)
    loop.args.push_back(arg(form.coefficient->dat, Access::READ,
                            form.coefficient->space->cell_node_map));
  execute(loop, threads);

  for (const auto& bc : bcs) apply_dirichlet_rows(*mat, bc);
  return mat;
}

/// Assembles a linear form into a node vector; bc nodes are overwritten with
/// their prescribed values.
inline DatPtr assemble_vector(const Form& form, const std::vector<DirichletBC>& bcs = {},
                              int threads = 1) {
  require(!form.bilinear(), ErrorKind::UnsupportedForm, "vector assembly needs a linear form");
  auto out = make_dat(form.test->node_set, 1, "assembled");

  Parloop loop;
  loop.kernel = detail::optimized_kernel(form);
  if (form.kind == FormKind::FacetSource) {
    auto subset = detail::marked_facets(*form.test, form.marker);
    loop.iterset = subset.set;
    loop.args.push_back(arg(out, Access::INC, subset.node_map));
    loop.args.push_back(
        arg(form.test->mesh->coordinates, Access::READ, subset.vertex_map));
    if (form.coefficient) loop.args.push_back(arg(form.coefficient->dat, Access::READ, subset.node_map));
  } else {
    loop.iterset = form.test->mesh->cells;
    loop.args.push_back(arg(out, Access::INC, form.test->cell_node_map));
    loop.args.push_back(arg(form.test->mesh->coordinates, Access::READ,
                            form.test->mesh->cell_vertex_map));
    if (form.coefficient)
      loop.args.push_back(arg(form.coefficient->dat, Access::READ,
                              form.coefficient->space->cell_node_map));
  }
  execute(loop, threads);

  for (const auto& bc : bcs) bc.apply(*out);
  return out;
}

inline std::variant<MatPtr, DatPtr> assemble(const Form& form,
                                             const std::vector<DirichletBC>& bcs = {},
                                             int threads = 1) {
  if (form.bilinear()) return assemble_matrix(form, bcs, threads);
  return assemble_vector(form, bcs, threads);
}

/// Vector of integrals of every test function: the lumped mass diagonal.
inline DatPtr lumped_mass(const FunctionSpacePtr& space, int threads = 1) {
  require(space->dim == 1, ErrorKind::UnsupportedForm, "lumped mass expects a scalar space");
  return assemble_vector(source(space, 1.0), {}, threads);
}

// ---------------------------------------------------------------------------
// Pointwise expressions: assignments over node data, lowered to a direct
// parloop kernel.

struct PwNode;
using PwNodePtr = std::shared_ptr<const PwNode>;

struct PwNode {
  enum class Kind { Const, Field, Add, Sub, Mul, Div, Neg };
  Kind kind = Kind::Const;
  Real value = 0.0;
  DatPtr field;
  PwNodePtr a, b;
};

struct Pw {
  PwNodePtr node;
};

inline Pw pw(Real value) {
  auto n = std::make_shared<PwNode>();
  n->kind = PwNode::Kind::Const;
  n->value = value;
  return {n};
}

inline Pw pw(const DatPtr& dat) {
  auto n = std::make_shared<PwNode>();
  n->kind = PwNode::Kind::Field;
  n->field = dat;
  return {n};
}

inline Pw pw(const FunctionPtr& f) { return pw(f->dat); }
inline Pw pw(const Function& f) { return pw(f.dat); }

namespace detail {

inline Pw pw_binary(PwNode::Kind kind, Pw a, Pw b) {
  auto n = std::make_shared<PwNode>();
  n->kind = kind;
  n->a = a.node;
  n->b = b.node;
  return {n};
}

} // namespace detail

inline Pw operator+(Pw a, Pw b) { return detail::pw_binary(PwNode::Kind::Add, a, b); }
inline Pw operator-(Pw a, Pw b) { return detail::pw_binary(PwNode::Kind::Sub, a, b); }
inline Pw operator*(Pw a, Pw b) { return detail::pw_binary(PwNode::Kind::Mul, a, b); }
inline Pw operator/(Pw a, Pw b) { return detail::pw_binary(PwNode::Kind::Div, a, b); }
inline Pw operator*(Real a, Pw b) { return pw(a) * b; }
inline Pw operator-(Pw a) {
  auto n = std::make_shared<PwNode>();
  n->kind = PwNode::Kind::Neg;
  n->a = a.node;
  return {n};
}

enum class PwOp { Assign, Add, Sub };

namespace detail {

inline void collect_fields(const PwNodePtr& node, std::vector<DatPtr>& fields) {
  if (!node) return;
  if (node->kind == PwNode::Kind::Field) {
    for (const auto& f : fields)
      if (f == node->field) return;
    fields.push_back(node->field);
    return;
  }
  collect_fields(node->a, fields);
  collect_fields(node->b, fields);
}

inline ir::Expr lower_pw(const PwNodePtr& node, const std::vector<DatPtr>& fields,
                         const std::vector<std::string>& names, const ir::Expr& component) {
  switch (node->kind) {
  case PwNode::Kind::Const: return ir::lit(node->value);
  case PwNode::Kind::Field: {
    for (size_t k = 0; k < fields.size(); ++k)
      if (fields[k] == node->field) return ir::idx(names[k], {component});
    fail(ErrorKind::InvalidArgument, "field not collected");
  }
  case PwNode::Kind::Neg: return -lower_pw(node->a, fields, names, component);
  default: {
    auto a = lower_pw(node->a, fields, names, component);
    auto b = lower_pw(node->b, fields, names, component);
    switch (node->kind) {
    case PwNode::Kind::Add: return a + b;
    case PwNode::Kind::Sub: return a - b;
    case PwNode::Kind::Mul: return a * b;
    default: return a / b;
    }
  }
  }
}

} // namespace detail

/// out (=|+=|-=) expr, applied at every node of the output's set. All fields
/// must live on that same set with the same component count.
inline void pointwise(const DatPtr& out, PwOp op, Pw expr, int threads = 1) {
  std::vector<DatPtr> fields;
  detail::collect_fields(expr.node, fields);

  bool reads_out = false;
  for (const auto& f : fields) reads_out = reads_out || f == out;
  for (const auto& f : fields) {
    require(f->set() == out->set(), ErrorKind::SpaceMismatch,
            "pointwise fields must share the output's set");
    require(f->dim() == out->dim(), ErrorKind::SpaceMismatch,
            "pointwise fields must share the output's component count");
  }

  const int dim = out->dim();
  ir::KernelAst ast;
  ast.name = "pointwise";
  ast.params.push_back({"OUT", {dim}});
  std::vector<DatPtr> inputs;
  std::vector<std::string> names(fields.size());
  std::vector<std::string> input_names;
  for (size_t k = 0; k < fields.size(); ++k) {
    if (fields[k] == out) {
      names[k] = "OUT";
      continue;
    }
    names[k] = "F" + std::to_string(inputs.size());
    inputs.push_back(fields[k]);
    input_names.push_back(names[k]);
    ast.params.push_back({names[k], {dim}});
  }

  // When the expression reads the output, stage it RW and fold the update into
  // a plain assignment; otherwise = lowers to WRITE and +=/-= to INC.
  Access out_access;
  std::vector<ir::StmtPtr> body;
  auto emit = [&](const ir::Expr& component) {
    ir::Expr rhs = detail::lower_pw(expr.node, fields, names, component);
    if (reads_out) {
      ir::Expr current = ir::idx("OUT", {component});
      if (op == PwOp::Add) rhs = current + rhs;
      if (op == PwOp::Sub) rhs = current - rhs;
      body.push_back(ir::assign("OUT", {component}, rhs));
    } else if (op == PwOp::Assign) {
      body.push_back(ir::assign("OUT", {component}, rhs));
    } else {
      body.push_back(ir::accum("OUT", {component}, op == PwOp::Sub ? -rhs : rhs));
    }
  };
  if (dim == 1) {
    emit(ir::lit(0.0));
  } else {
    std::vector<ir::StmtPtr> inner;
    std::swap(body, inner);
    emit(ir::ref("d"));
    std::swap(body, inner);
    body.push_back(ir::loop("d", dim, std::move(inner)));
  }
  ast.body = std::move(body);
  out_access = reads_out ? Access::RW : (op == PwOp::Assign ? Access::WRITE : Access::INC);

  Parloop loop;
  loop.kernel = ir::make_kernel(std::move(ast));
  loop.iterset = out->set();
  loop.args.push_back(arg(out, out_access));
  for (const auto& in : inputs) loop.args.push_back(arg(in, Access::READ));
  execute(loop, threads);
}

inline void pointwise(const FunctionPtr& out, PwOp op, Pw expr, int threads = 1) {
  pointwise(out->dat, op, expr, threads);
}

// ---------------------------------------------------------------------------

enum class Iterate { Nodes, Cells };

struct CustomArg {
  FunctionPtr function;
  GlobalPtr global;
  Access access = Access::READ;
};

inline CustomArg custom(FunctionPtr f, Access access) { return {std::move(f), nullptr, access}; }
inline CustomArg custom(GlobalPtr g, Access access) { return {nullptr, std::move(g), access}; }

/// Escape hatch: run a user kernel over the node set (direct) or the cells
/// (indirect through each function's cell-node map), with the maps and Dats
/// extracted automatically.
inline void custom_parloop(const ir::KernelPtr& kernel, Iterate iterate,
                           const std::vector<CustomArg>& args, int threads = 1) {
  Parloop loop;
  loop.kernel = kernel;
  SetPtr nodes;
  MeshPtr mesh;
  for (const auto& a : args)
    if (a.function) {
      nodes = a.function->space->node_set;
      mesh = a.function->space->mesh;
      break;
    }
  require(nodes != nullptr, ErrorKind::InvalidArgument,
          "custom parloop needs at least one Function argument");
  loop.iterset = iterate == Iterate::Nodes ? nodes : mesh->cells;
  for (const auto& a : args) {
    if (a.function) {
      if (iterate == Iterate::Nodes) {
        require(a.function->space->node_set == nodes, ErrorKind::SpaceMismatch,
                "custom parloop functions must share one node set");
        loop.args.push_back(arg(a.function->dat, a.access));
      } else {
        loop.args.push_back(arg(a.function->dat, a.access, a.function->space->cell_node_map));
      }
    } else {
      loop.args.push_back(arg(a.global, a.access));
    }
  }
  execute(loop, threads);
}

// ---------------------------------------------------------------------------

/// sqrt of the integral of (u - exact)^2, by cell quadrature of degree
/// 2*degree + 2 (clamped to the tabulated range) accumulated into a SUM
/// Global.
inline Real l2_error(const Function& u, const std::function<Real(const Real*)>& exact,
                     int threads = 1) {
  require(u.space->dim == 1, ErrorKind::UnsupportedForm, "l2_error expects a scalar space");
  const auto& space = *u.space;
  const auto& mesh = *space.mesh;
  const int gdim = mesh.dim;
  const int nv = gdim + 1;

  auto rule = quadrature_rule(space.element.cell, 2 * space.element.degree + 2);
  auto tab = tabulate(space.element, rule);
  auto geometry = tabulate(reference_element(space.element.cell, 1), rule);
  const int m = tab.nbf;
  const int nq = rule.size();

  std::vector<ir::Param> params{{"G", {1}},
                                {"U", {m}},
                                {"X", {nv, gdim}}};
  auto kernel = ir::make_host_kernel(
      "l2_error_cell", params, [=](Real* const* buffers) {
        Real* contribution = buffers[0];
        const Real* uh = buffers[1];
        const Real* x = buffers[2];
        Real jac[9];
        for (int a = 0; a < gdim; ++a)
          for (int b = 0; b < gdim; ++b)
            jac[a * gdim + b] = x[(b + 1) * gdim + a] - x[a];
        Real det;
        if (gdim == 2)
          det = jac[0] * jac[3] - jac[1] * jac[2];
        else
          det = jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) -
                jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
                jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
        Real adet = std::abs(det);
        Real acc = 0.0;
        for (int q = 0; q < nq; ++q) {
          Real xq[3] = {0, 0, 0};
          for (int v = 0; v < nv; ++v)
            for (int d = 0; d < gdim; ++d) xq[d] += geometry.value(q, v) * x[v * gdim + d];
          Real uq = 0.0;
          for (int k = 0; k < m; ++k) uq += uh[k] * tab.value(q, k);
          Real e = uq - exact(xq);
          acc += rule.weights[q] * adet * e * e;
        }
        contribution[0] += acc;
      });

  auto total = make_global(1, "error_sq");
  Parloop loop;
  loop.kernel = kernel;
  loop.iterset = mesh.cells;
  loop.args.push_back(arg(total, Access::SUM));
  loop.args.push_back(arg(u.dat, Access::READ, space.cell_node_map));
  loop.args.push_back(arg(mesh.coordinates, Access::READ, mesh.cell_vertex_map));
  execute(loop, threads);
  return std::sqrt(std::max(0.0, total->view()[0]));
}

// ---------------------------------------------------------------------------
// Mixed-space assembly: blockwise into a nested table, or monolithically on
// the concatenated numbering.

inline BlockMat assemble_blocks(const MixedForm& mixed, int threads = 1) {
  auto blocks = split_mixed(mixed);
  BlockMat out;
  for (int i = 0; i < 2; ++i) out.row_sizes[i] = mixed.test[i]->node_set->size();
  for (int j = 0; j < 2; ++j) out.col_sizes[j] = mixed.trial[j]->node_set->size();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (blocks[i][j]) out.blocks[i][j] = assemble_matrix(*blocks[i][j], {}, threads);
  return out;
}

inline MatPtr assemble_monolithic(const MixedForm& mixed, int threads = 1) {
  auto blocks = split_mixed(mixed);
  std::array<int, 2> row_off{0, mixed.test[0]->node_set->size()};
  std::array<int, 2> col_off{0, mixed.trial[0]->node_set->size()};
  const int nrows = row_off[1] + mixed.test[1]->node_set->size();
  const int ncols = col_off[1] + mixed.trial[1]->node_set->size();
  auto row_space = make_set(nrows, "mixed_rows");
  auto col_space = make_set(ncols, "mixed_cols");

  // shifted copies of the cell-node maps per block
  auto shift = [](const MapPtr& map, const SetPtr& target, int offset) {
    std::vector<int> values = map->values();
    for (int& v : values) v += offset;
    return make_map(map->source(), target, map->arity(), std::move(values), "shifted");
  };

  struct BlockPlan {
    const Form* form;
    MapPtr rows, cols;
  };
  std::vector<BlockPlan> plans;
  std::vector<std::vector<int>> pattern(nrows);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (!blocks[i][j]) continue;
      const Form& f = *blocks[i][j];
      auto rows = shift(f.test->cell_node_map, row_space, row_off[i]);
      auto cols = shift(f.trial->cell_node_map, col_space, col_off[j]);
      for (int e = 0; e < rows->source()->size(); ++e)
        for (int a = 0; a < rows->arity(); ++a)
          for (int b = 0; b < cols->arity(); ++b)
            pattern[rows->row(e)[a]].push_back(cols->row(e)[b]);
      plans.push_back({&f, std::move(rows), std::move(cols)});
    }

  std::vector<long> offsets(nrows + 1, 0);
  for (int r = 0; r < nrows; ++r) {
    auto& row = pattern[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    offsets[r + 1] = offsets[r] + static_cast<long>(row.size());
  }
  std::vector<int> cols(offsets[nrows]);
  for (int r = 0; r < nrows; ++r)
    std::copy(pattern[r].begin(), pattern[r].end(), cols.begin() + offsets[r]);
  auto mat = make_mat(
      std::make_shared<const Sparsity>(nrows, ncols, std::move(offsets), std::move(cols)),
      "monolithic");

  for (const auto& plan : plans) {
    Parloop loop;
    loop.kernel = detail::optimized_kernel(*plan.form);
    loop.iterset = plan.form->test->mesh->cells;
    loop.args.push_back(arg(mat, Access::INC, plan.rows, plan.cols));
    loop.args.push_back(arg(plan.form->test->mesh->coordinates, Access::READ,
                            plan.form->test->mesh->cell_vertex_map));
    if (plan.form->coefficient)
      loop.args.push_back(arg(plan.form->coefficient->dat, Access::READ,
                              plan.form->coefficient->space->cell_node_map));
    execute(loop, threads);
  }
  return mat;
}

} // namespace loam::fem
