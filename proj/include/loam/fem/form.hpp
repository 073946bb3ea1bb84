#pragma once

#include <array>
#include <string>

#include "loam/fem/space.hpp"
#include "loam/kernel.hpp"

namespace loam::fem {

enum class FormKind { Mass, Stiffness, Helmholtz, Source, FacetSource };

/// Symbolic description of an integral from the fixed catalogue. A present
/// trial space makes the form bilinear; without one the form is linear: either
/// a plain source or the action of mass/stiffness on the coefficient.
struct Form {
  FormKind kind;
  FunctionSpacePtr test;
  FunctionSpacePtr trial;  // null for linear forms
  FunctionPtr coefficient; // action coefficient / source density
  Real constant = 0.0;     // helmholtz kappa, or the constant density
  bool constant_density = false;
  int marker = 0;          // facet_source only

  bool bilinear() const { return trial != nullptr; }
};

namespace detail {

inline void check_cell_form_spaces(const Form& form) {
  require(form.test && form.test->dim == 1, ErrorKind::UnsupportedForm,
          "forms are supported on scalar spaces only");
  if (form.trial) {
    require(form.trial->dim == 1, ErrorKind::UnsupportedForm,
            "forms are supported on scalar spaces only");
    require(form.trial->mesh == form.test->mesh, ErrorKind::SpaceMismatch,
            "test and trial spaces live on different meshes");
  }
  if (form.coefficient) {
    require(form.coefficient->space->mesh == form.test->mesh, ErrorKind::SpaceMismatch,
            "coefficient lives on a different mesh");
    require(form.coefficient->space->dim == 1, ErrorKind::UnsupportedForm,
            "coefficients must be scalar");
  }
}

} // namespace detail

inline Form mass(FunctionSpacePtr test, FunctionSpacePtr trial) {
  Form f{FormKind::Mass, std::move(test), std::move(trial), nullptr};
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form mass_action(FunctionSpacePtr test, FunctionPtr coefficient) {
  Form f{FormKind::Mass, std::move(test), nullptr, std::move(coefficient)};
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form stiffness(FunctionSpacePtr test, FunctionSpacePtr trial) {
  Form f{FormKind::Stiffness, std::move(test), std::move(trial), nullptr};
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form stiffness_action(FunctionSpacePtr test, FunctionPtr coefficient) {
  Form f{FormKind::Stiffness, std::move(test), nullptr, std::move(coefficient)};
  detail::check_cell_form_spaces(f);
  require(f.coefficient != nullptr, ErrorKind::UnsupportedForm,
          "stiffness action requires a coefficient");
  return f;
}

inline Form helmholtz(FunctionSpacePtr test, FunctionSpacePtr trial, Real kappa) {
  Form f{FormKind::Helmholtz, std::move(test), std::move(trial), nullptr, kappa};
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form source(FunctionSpacePtr test, FunctionPtr density) {
  Form f{FormKind::Source, std::move(test), nullptr, std::move(density)};
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form source(FunctionSpacePtr test, Real density) {
  Form f{FormKind::Source, std::move(test), nullptr, nullptr, density};
  f.constant_density = true;
  detail::check_cell_form_spaces(f);
  return f;
}

inline Form facet_source(FunctionSpacePtr test, FunctionPtr density, int marker) {
  Form f{FormKind::FacetSource, std::move(test), nullptr, std::move(density)};
  f.marker = marker;
  detail::check_cell_form_spaces(f);
  require(!f.coefficient || f.coefficient->space->node_set == f.test->node_set,
          ErrorKind::SpaceMismatch, "facet source density must live on the test space");
  return f;
}

inline Form facet_source(FunctionSpacePtr test, Real density, int marker) {
  Form f{FormKind::FacetSource, std::move(test), nullptr, nullptr, density};
  f.constant_density = true;
  f.marker = marker;
  detail::check_cell_form_spaces(f);
  return f;
}

// ---------------------------------------------------------------------------
// Local kernel generation. The emitted AST computes the affine Jacobian from
// the cell vertex coordinates, its determinant and inverse transpose, then
// accumulates the form's integrand over a fixed quadrature loop nest:
// unoptimised, in the same shape for every form in the catalogue.

inline int form_quadrature_degree(const Form& form) {
  int p = form.test->element.degree;
  if (form.kind == FormKind::Stiffness) return std::max(1, 2 * (p - 1));
  return 2 * p;
}

namespace detail {

using ir::Expr;
using ir::idx;
using ir::lit;
using ir::StmtPtr;

inline Expr rf(const std::string& name) { return ir::ref(name); }

struct GeometryNames {
  int gdim;
  bool with_gradients;
};

/// Jacobian, determinant and (when needed) inverse-transpose entries K[a][b]
/// such that the physical gradient is G_a = sum_b K_ab * dphi/dxhat_b.
inline void emit_geometry(std::vector<StmtPtr>& body, const GeometryNames& geo) {
  auto X = [&](int v, int d) { return idx("X", {lit(v), lit(d)}); };
  auto J = [&](int a, int b) { return rf("J" + std::to_string(a) + std::to_string(b)); };

  for (int a = 0; a < geo.gdim; ++a)
    for (int b = 0; b < geo.gdim; ++b)
      body.push_back(ir::decl_scalar("J" + std::to_string(a) + std::to_string(b),
                                     X(b + 1, a) - X(0, a)));

  if (geo.gdim == 2) {
    body.push_back(ir::decl_scalar("detJ", J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0)));
  } else {
    body.push_back(ir::decl_scalar("c00", J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1)));
    body.push_back(ir::decl_scalar("c01", -(J(1, 0) * J(2, 2) - J(1, 2) * J(2, 0))));
    body.push_back(ir::decl_scalar("c02", J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0)));
    body.push_back(ir::decl_scalar(
        "detJ", J(0, 0) * rf("c00") + J(0, 1) * rf("c01") + J(0, 2) * rf("c02")));
  }
  body.push_back(ir::decl_scalar("adetJ", ir::sqrt_of(rf("detJ") * rf("detJ"))));

  if (!geo.with_gradients) return;
  if (geo.gdim == 2) {
    body.push_back(ir::decl_scalar("K00", J(1, 1) / rf("detJ")));
    body.push_back(ir::decl_scalar("K01", -(J(1, 0) / rf("detJ"))));
    body.push_back(ir::decl_scalar("K10", -(J(0, 1) / rf("detJ"))));
    body.push_back(ir::decl_scalar("K11", J(0, 0) / rf("detJ")));
  } else {
    body.push_back(ir::decl_scalar("c10", -(J(0, 1) * J(2, 2) - J(0, 2) * J(2, 1))));
    body.push_back(ir::decl_scalar("c11", J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0)));
    body.push_back(ir::decl_scalar("c12", -(J(0, 0) * J(2, 1) - J(0, 1) * J(2, 0))));
    body.push_back(ir::decl_scalar("c20", J(0, 1) * J(1, 2) - J(0, 2) * J(1, 1)));
    body.push_back(ir::decl_scalar("c21", -(J(0, 0) * J(1, 2) - J(0, 2) * J(1, 0))));
    body.push_back(ir::decl_scalar("c22", J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0)));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        body.push_back(ir::decl_scalar("K" + std::to_string(a) + std::to_string(b),
                                       rf("c" + std::to_string(a) + std::to_string(b)) /
                                           rf("detJ")));
  }
}

inline ir::StmtPtr basis_table(const std::string& name, const Tabulation& tab) {
  return ir::decl_table(name, {tab.nq, tab.nbf}, tab.values);
}

inline ir::StmtPtr grad_table(const std::string& name, const Tabulation& tab, int direction) {
  std::vector<Real> data(static_cast<size_t>(tab.nq) * tab.nbf);
  for (int q = 0; q < tab.nq; ++q)
    for (int i = 0; i < tab.nbf; ++i) data[q * tab.nbf + i] = tab.grad(q, i, direction);
  return ir::decl_table(name, {tab.nq, tab.nbf}, data);
}

/// Physical gradient component a of basis function `index` of table family
/// `prefix` at quadrature point q.
inline Expr physical_grad(const std::string& prefix, int gdim, int a, Expr q, Expr index) {
  Expr acc = rf("K" + std::to_string(a) + "0") * idx(prefix + "0", {q, index});
  for (int b = 1; b < gdim; ++b)
    acc = acc + rf("K" + std::to_string(a) + std::to_string(b)) *
                    idx(prefix + std::to_string(b), {q, index});
  return acc;
}

inline ir::KernelAst compile_cell_kernel(const Form& form) {
  const auto& mesh = *form.test->mesh;
  const int gdim = mesh.dim;
  const int nv = gdim + 1;
  const bool gradients =
      form.kind == FormKind::Stiffness || form.kind == FormKind::Helmholtz;

  auto rule = quadrature_rule(form.test->element.cell, form_quadrature_degree(form));
  auto test_tab = tabulate(form.test->element, rule);
  const int m = test_tab.nbf;
  const int nq = rule.size();

  ir::KernelAst ast;
  std::string suffix = std::string("_p") + std::to_string(form.test->element.degree) +
                       (gdim == 2 ? "_tri" : "_tet");
  switch (form.kind) {
  case FormKind::Mass: ast.name = form.bilinear() ? "mass" : "mass_action"; break;
  case FormKind::Stiffness: ast.name = form.bilinear() ? "stiffness" : "stiffness_action"; break;
  case FormKind::Helmholtz: ast.name = "helmholtz"; break;
  default: ast.name = "source"; break;
  }
  ast.name += suffix;

  Tabulation trial_tab, coeff_tab;
  int mt = 0, mc = 0;
  if (form.bilinear()) {
    trial_tab = tabulate(form.trial->element, rule);
    mt = trial_tab.nbf;
    ast.params.push_back({"A", {m, mt}});
  } else {
    ast.params.push_back({"A", {m}});
  }
  ast.params.push_back({"X", {nv, gdim}});
  if (form.coefficient) {
    coeff_tab = tabulate(form.coefficient->space->element, rule);
    mc = coeff_tab.nbf;
    ast.params.push_back({"C", {mc}});
  }

  auto& body = ast.body;
  emit_geometry(body, {gdim, gradients || (form.kind == FormKind::Stiffness)});

  body.push_back(ir::decl_table("W", {nq}, rule.weights));
  body.push_back(basis_table("P", test_tab));
  if (gradients)
    for (int d = 0; d < gdim; ++d) body.push_back(grad_table("D" + std::to_string(d), test_tab, d));
  if (form.bilinear()) {
    body.push_back(basis_table("PT", trial_tab));
    if (gradients)
      for (int d = 0; d < gdim; ++d)
        body.push_back(grad_table("DT" + std::to_string(d), trial_tab, d));
  }
  if (form.coefficient) {
    body.push_back(basis_table("PC", coeff_tab));
    if (form.kind == FormKind::Stiffness)
      for (int d = 0; d < gdim; ++d)
        body.push_back(grad_table("DC" + std::to_string(d), coeff_tab, d));
  }

  Expr q = rf("q"), i = rf("i"), j = rf("j"), k = rf("k");
  Expr scale = idx("W", {q}) * rf("adetJ");

  if (form.bilinear()) {
    Expr integrand;
    switch (form.kind) {
    case FormKind::Mass: integrand = idx("P", {q, i}) * idx("PT", {q, j}); break;
    case FormKind::Stiffness:
    case FormKind::Helmholtz: {
      integrand = physical_grad("D", gdim, 0, q, i) * physical_grad("DT", gdim, 0, q, j);
      for (int a = 1; a < gdim; ++a)
        integrand = integrand + physical_grad("D", gdim, a, q, i) *
                                    physical_grad("DT", gdim, a, q, j);
      if (form.kind == FormKind::Helmholtz)
        integrand = integrand + lit(form.constant) * idx("P", {q, i}) * idx("PT", {q, j});
      break;
    }
    default: fail(ErrorKind::UnsupportedForm, "facet forms are linear");
    }
    body.push_back(ir::loop(
        "q", nq,
        {ir::loop("i", m,
                  {ir::loop("j", mt, {ir::accum("A", {i, j}, scale * integrand)})})}));
    return ast;
  }

  // Linear forms: plain source (constant or interpolated density = mass
  // action) and the stiffness action.
  if (form.kind == FormKind::Stiffness) {
    for (int a = 0; a < gdim; ++a) body.push_back(ir::decl_scalar("g" + std::to_string(a)));
    std::vector<StmtPtr> per_q;
    for (int a = 0; a < gdim; ++a)
      per_q.push_back(ir::assign("g" + std::to_string(a), {}, lit(0.0)));
    std::vector<StmtPtr> contract;
    for (int a = 0; a < gdim; ++a)
      contract.push_back(ir::accum("g" + std::to_string(a), {},
                                   idx("C", {k}) * physical_grad("DC", gdim, a, q, k)));
    per_q.push_back(ir::loop("k", mc, std::move(contract)));
    Expr integrand = physical_grad("D", gdim, 0, q, i) * rf("g0");
    for (int a = 1; a < gdim; ++a)
      integrand = integrand + physical_grad("D", gdim, a, q, i) * rf("g" + std::to_string(a));
    per_q.push_back(ir::loop("i", m, {ir::accum("A", {i}, scale * integrand)}));
    body.push_back(ir::loop("q", nq, std::move(per_q)));
    return ast;
  }

  if (form.coefficient) {
    body.push_back(ir::decl_scalar("fq"));
    std::vector<StmtPtr> per_q;
    per_q.push_back(ir::assign("fq", {}, lit(0.0)));
    per_q.push_back(ir::loop("k", mc, {ir::accum("fq", {}, idx("C", {k}) * idx("PC", {q, k}))}));
    per_q.push_back(ir::loop("i", m, {ir::accum("A", {i}, scale * rf("fq") * idx("P", {q, i}))}));
    body.push_back(ir::loop("q", nq, std::move(per_q)));
  } else {
    body.push_back(ir::loop(
        "q", nq,
        {ir::loop("i", m,
                  {ir::accum("A", {i}, scale * lit(form.constant) * idx("P", {q, i}))})}));
  }
  return ast;
}

inline ir::KernelAst compile_facet_kernel(const Form& form) {
  const auto& mesh = *form.test->mesh;
  const int gdim = mesh.dim;
  const int p = form.test->element.degree;

  ir::KernelAst ast;
  ast.name = "facet_source_p" + std::to_string(p) + (gdim == 2 ? "_edge" : "_face");

  if (gdim == 2) {
    auto facet_elem = reference_element(Cell::Interval, p);
    auto rule = quadrature_rule(Cell::Interval, 2 * p);
    auto tab = tabulate(facet_elem, rule);
    const int fn = tab.nbf, nq = rule.size();

    ast.params.push_back({"A", {fn}});
    ast.params.push_back({"X", {2, 2}});
    if (form.coefficient) ast.params.push_back({"C", {fn}});

    auto& body = ast.body;
    auto X = [&](int v, int d) { return idx("X", {lit(v), lit(d)}); };
    body.push_back(ir::decl_scalar("E0", X(1, 0) - X(0, 0)));
    body.push_back(ir::decl_scalar("E1", X(1, 1) - X(0, 1)));
    body.push_back(ir::decl_scalar("L", ir::sqrt_of(rf("E0") * rf("E0") + rf("E1") * rf("E1"))));
    body.push_back(ir::decl_table("W", {nq}, rule.weights));
    body.push_back(basis_table("P", tab));

    Expr q = rf("q"), i = rf("i"), k = rf("k");
    Expr scale = idx("W", {q}) * rf("L");
    if (form.coefficient) {
      body.push_back(ir::decl_scalar("gq"));
      std::vector<StmtPtr> per_q;
      per_q.push_back(ir::assign("gq", {}, lit(0.0)));
      per_q.push_back(ir::loop("k", fn, {ir::accum("gq", {}, idx("C", {k}) * idx("P", {q, k}))}));
      per_q.push_back(
          ir::loop("i", fn, {ir::accum("A", {i}, scale * rf("gq") * idx("P", {q, i}))}));
      body.push_back(ir::loop("q", nq, std::move(per_q)));
    } else {
      body.push_back(ir::loop(
          "q", nq,
          {ir::loop("i", fn,
                    {ir::accum("A", {i}, scale * lit(form.constant) * idx("P", {q, i}))})}));
    }
    return ast;
  }

  require(p == 1, ErrorKind::UnsupportedForm, "3D facet sources require degree 1");
  auto facet_elem = reference_element(Cell::Triangle, 1);
  auto rule = quadrature_rule(Cell::Triangle, 2);
  auto tab = tabulate(facet_elem, rule);
  const int fn = 3, nq = rule.size();

  ast.params.push_back({"A", {fn}});
  ast.params.push_back({"X", {3, 3}});
  if (form.coefficient) ast.params.push_back({"C", {fn}});

  auto& body = ast.body;
  auto X = [&](int v, int d) { return idx("X", {lit(v), lit(d)}); };
  for (int d = 0; d < 3; ++d) {
    body.push_back(ir::decl_scalar("E1" + std::to_string(d), X(1, d) - X(0, d)));
    body.push_back(ir::decl_scalar("E2" + std::to_string(d), X(2, d) - X(0, d)));
  }
  body.push_back(
      ir::decl_scalar("N0", rf("E11") * rf("E22") - rf("E12") * rf("E21")));
  body.push_back(
      ir::decl_scalar("N1", rf("E12") * rf("E20") - rf("E10") * rf("E22")));
  body.push_back(
      ir::decl_scalar("N2", rf("E10") * rf("E21") - rf("E11") * rf("E20")));
  body.push_back(ir::decl_scalar(
      "twoA", ir::sqrt_of(rf("N0") * rf("N0") + rf("N1") * rf("N1") + rf("N2") * rf("N2"))));
  body.push_back(ir::decl_table("W", {nq}, rule.weights));
  body.push_back(basis_table("P", tab));

  Expr q = rf("q"), i = rf("i"), k = rf("k");
  Expr scale = idx("W", {q}) * rf("twoA");
  if (form.coefficient) {
    body.push_back(ir::decl_scalar("gq"));
    std::vector<StmtPtr> per_q;
    per_q.push_back(ir::assign("gq", {}, lit(0.0)));
    per_q.push_back(ir::loop("k", fn, {ir::accum("gq", {}, idx("C", {k}) * idx("P", {q, k}))}));
    per_q.push_back(ir::loop("i", fn, {ir::accum("A", {i}, scale * rf("gq") * idx("P", {q, i}))}));
    body.push_back(ir::loop("q", nq, std::move(per_q)));
  } else {
    body.push_back(ir::loop(
        "q", nq,
        {ir::loop("i", fn,
                  {ir::accum("A", {i}, scale * lit(form.constant) * idx("P", {q, i}))})}));
  }
  return ast;
}

} // namespace detail

/// Un-optimised local assembly AST for a catalogue form. Signature: the local
/// output block, the local vertex coordinates, then one block per coefficient.
inline ir::KernelAst compile_local_kernel(const Form& form) {
  ir::KernelAst ast = form.kind == FormKind::FacetSource ? detail::compile_facet_kernel(form)
                                                         : detail::compile_cell_kernel(form);
  ir::validate(ast);
  return ast;
}

// ---------------------------------------------------------------------------

/// A form over a 2-field mixed space: one sub-form per test/trial block,
/// absent blocks meaning zero.
struct MixedForm {
  std::array<FunctionSpacePtr, 2> test;
  std::array<FunctionSpacePtr, 2> trial;
  std::array<std::array<std::shared_ptr<const Form>, 2>, 2> blocks;
};

/// Normalizes a mixed form into its block table, checking that every declared
/// block matches the spaces of its row and column.
inline std::array<std::array<std::shared_ptr<const Form>, 2>, 2> split_mixed(const MixedForm& mixed) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto& block = mixed.blocks[i][j];
      if (!block) continue;
      require(block->bilinear(), ErrorKind::UnsupportedForm, "mixed blocks must be bilinear");
      require(block->test == mixed.test[i] && block->trial == mixed.trial[j],
              ErrorKind::SpaceMismatch, "block spaces do not match the mixed layout");
    }
  return mixed.blocks;
}

} // namespace loam::fem
