#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "loam/common.hpp"

namespace loam::fem {

enum class Cell { Triangle, Tetrahedron, Interval };

inline int cell_dim(Cell cell) {
  switch (cell) {
  case Cell::Triangle: return 2;
  case Cell::Tetrahedron: return 3;
  default: return 1;
  }
}

/// Reference-cell measure: triangle 1/2, tetrahedron 1/6, interval 1.
inline Real cell_measure(Cell cell) {
  switch (cell) {
  case Cell::Triangle: return 0.5;
  case Cell::Tetrahedron: return 1.0 / 6.0;
  default: return 1.0;
  }
}

// ---------------------------------------------------------------------------
// Quadrature. Positive-weight symmetric rules; weights sum to the
// reference-cell measure and are exact for polynomials up to `degree`.

struct QuadratureRule {
  Cell cell;
  int degree = 0; // polynomial exactness
  std::vector<Real> points; // nq x dim, reference coordinates
  std::vector<Real> weights;

  int size() const { return static_cast<int>(weights.size()); }
  const Real* point(int q) const { return points.data() + q * cell_dim(cell); }
};

namespace detail {

// barycentric orbit (a,b,b) and permutations; reference coords are the
// last dim barycentrics
inline void tri_orbit(QuadratureRule& rule, Real a, Real b, Real w) {
  const Real bary[3][3] = {{a, b, b}, {b, a, b}, {b, b, a}};
  for (auto& p : bary) {
    rule.points.insert(rule.points.end(), {p[1], p[2]});
    rule.weights.push_back(w);
  }
}

inline void tri_point(QuadratureRule& rule, Real l0, Real l1, Real l2, Real w) {
  (void)l0;
  rule.points.insert(rule.points.end(), {l1, l2});
  rule.weights.push_back(w);
}

inline void tet_orbit(QuadratureRule& rule, Real a, Real b, Real w) {
  const Real bary[4][4] = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
  for (auto& p : bary) {
    rule.points.insert(rule.points.end(), {p[1], p[2], p[3]});
    rule.weights.push_back(w);
  }
}

} // namespace detail

/// Smallest tabulated rule exact to at least the requested degree; requests
/// beyond the tabulated range are clamped to the strongest rule available
/// (triangle: 6, tetrahedron: 3, interval: 5).
inline QuadratureRule quadrature_rule(Cell cell, int degree) {
  require(degree >= 0, ErrorKind::InvalidArgument, "negative quadrature degree");
  QuadratureRule rule;
  rule.cell = cell;

  if (cell == Cell::Triangle) {
    if (degree <= 1) {
      rule.degree = 1;
      detail::tri_point(rule, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.5);
    } else if (degree == 2) {
      rule.degree = 2;
      detail::tri_orbit(rule, 2.0 / 3, 1.0 / 6, 1.0 / 6);
    } else if (degree == 3) {
      // rational positive rule: edge midpoints plus the degree-2 orbit
      rule.degree = 3;
      detail::tri_orbit(rule, 0.0, 0.5, 1.0 / 60);
      detail::tri_orbit(rule, 2.0 / 3, 1.0 / 6, 3.0 / 20);
    } else if (degree == 4) {
      rule.degree = 4;
      detail::tri_orbit(rule, 0.108103018168070, 0.445948490915965, 0.223381589678011 / 2);
      detail::tri_orbit(rule, 0.816847572980459, 0.091576213509771, 0.109951743655322 / 2);
    } else if (degree == 5) {
      rule.degree = 5;
      detail::tri_point(rule, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225 / 2);
      detail::tri_orbit(rule, 0.059715871789770, 0.470142064105115, 0.132394152788506 / 2);
      detail::tri_orbit(rule, 0.797426985353087, 0.101286507323456, 0.125939180544827 / 2);
    } else {
      rule.degree = 6;
      detail::tri_orbit(rule, 0.873821971016996, 0.063089014491502, 0.050844906370207 / 2);
      detail::tri_orbit(rule, 0.501426509658179, 0.249286745170910, 0.116786275726379 / 2);
      const Real a = 0.053145049844816, b = 0.310352451033785, c = 0.636502499121399;
      const Real w = 0.082851075618374 / 2;
      const Real perms[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
      for (auto& p : perms) detail::tri_point(rule, p[0], p[1], p[2], w);
    }
    return rule;
  }

  if (cell == Cell::Tetrahedron) {
    if (degree <= 1) {
      rule.degree = 1;
      rule.points = {0.25, 0.25, 0.25};
      rule.weights = {1.0 / 6};
    } else if (degree == 2) {
      rule.degree = 2;
      const Real a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
      const Real b = (5.0 - std::sqrt(5.0)) / 20.0;
      detail::tet_orbit(rule, a, b, 1.0 / 24);
    } else {
      // rational positive rule: face centroids plus a (5/8, 1/8, 1/8, 1/8) orbit
      rule.degree = 3;
      detail::tet_orbit(rule, 0.0, 1.0 / 3, 3.0 / 200);
      detail::tet_orbit(rule, 5.0 / 8, 1.0 / 8, 2.0 / 75);
    }
    return rule;
  }

  // Gauss-Legendre on [0, 1]
  if (degree <= 1) {
    rule.degree = 1;
    rule.points = {0.5};
    rule.weights = {1.0};
  } else if (degree <= 3) {
    rule.degree = 3;
    const Real h = 0.5 / std::sqrt(3.0);
    rule.points = {0.5 - h, 0.5 + h};
    rule.weights = {0.5, 0.5};
  } else {
    rule.degree = 5;
    const Real h = 0.5 * std::sqrt(3.0 / 5.0);
    rule.points = {0.5 - h, 0.5, 0.5 + h};
    rule.weights = {5.0 / 18, 8.0 / 18, 5.0 / 18};
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Lagrange reference elements. Reference cells: triangle (0,0),(1,0),(0,1);
// tetrahedron (0,0,0),(1,0,0),(0,1,0),(0,0,1). P2 triangle nodes are the
// three vertices followed by the edge midpoints ordered by opposite-vertex
// index. Degree 2 is available on triangles only.

struct ReferenceElement {
  Cell cell;
  int degree;
  int node_count;
  std::vector<Real> nodes; // node_count x dim reference coordinates
};

inline ReferenceElement reference_element(Cell cell, int degree) {
  require(degree == 1 || degree == 2, ErrorKind::UnsupportedForm,
          "only degree 1 and 2 Lagrange elements are supported");
  ReferenceElement elem;
  elem.cell = cell;
  elem.degree = degree;
  if (cell == Cell::Triangle) {
    if (degree == 1) {
      elem.node_count = 3;
      elem.nodes = {0, 0, 1, 0, 0, 1};
    } else {
      elem.node_count = 6;
      elem.nodes = {0, 0, 1, 0, 0, 1, 0.5, 0.5, 0, 0.5, 0.5, 0};
    }
  } else if (cell == Cell::Tetrahedron) {
    require(degree == 1, ErrorKind::UnsupportedForm,
            "degree 2 is not supported on tetrahedra");
    elem.node_count = 4;
    elem.nodes = {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
  } else {
    elem.node_count = degree + 1;
    if (degree == 1)
      elem.nodes = {0, 1};
    else
      elem.nodes = {0, 1, 0.5};
  }
  return elem;
}

namespace detail {

/// Barycentric coordinates and their (constant) reference gradients.
inline void barycentric(Cell cell, const Real* x, Real* lambda) {
  int d = cell_dim(cell);
  lambda[0] = 1.0;
  for (int k = 0; k < d; ++k) {
    lambda[0] -= x[k];
    lambda[k + 1] = x[k];
  }
}

inline Real bary_grad(int lambda_index, int direction) {
  return lambda_index == 0 ? -1.0 : (lambda_index == direction + 1 ? 1.0 : 0.0);
}

} // namespace detail

/// phi_i at a reference point.
inline Real eval_basis(const ReferenceElement& elem, int i, const Real* x) {
  Real lambda[4];
  detail::barycentric(elem.cell, x, lambda);
  int nv = cell_dim(elem.cell) + 1;
  if (elem.degree == 1) return lambda[i];
  if (i < nv) return lambda[i] * (2.0 * lambda[i] - 1.0);
  // edge node opposite vertex i - nv: product of the other two barycentrics
  int opposite = i - nv;
  int j = (opposite + 1) % nv, k = (opposite + 2) % nv;
  return 4.0 * lambda[j] * lambda[k];
}

/// d(phi_i)/dx_d at a reference point.
inline Real eval_basis_grad(const ReferenceElement& elem, int i, const Real* x, int direction) {
  Real lambda[4];
  detail::barycentric(elem.cell, x, lambda);
  int nv = cell_dim(elem.cell) + 1;
  if (elem.degree == 1) return detail::bary_grad(i, direction);
  if (i < nv) return (4.0 * lambda[i] - 1.0) * detail::bary_grad(i, direction);
  int opposite = i - nv;
  int j = (opposite + 1) % nv, k = (opposite + 2) % nv;
  return 4.0 * (lambda[k] * detail::bary_grad(j, direction) +
                lambda[j] * detail::bary_grad(k, direction));
}

/// Basis values and reference gradients at the quadrature points.
struct Tabulation {
  int nq = 0, nbf = 0, dim = 0;
  std::vector<Real> values; // nq x nbf
  std::vector<Real> grads;  // nq x nbf x dim

  Real value(int q, int i) const { return values[q * nbf + i]; }
  Real grad(int q, int i, int d) const { return grads[(q * nbf + i) * dim + d]; }
};

inline Tabulation tabulate(const ReferenceElement& elem, const QuadratureRule& rule) {
  require(elem.cell == rule.cell, ErrorKind::CellMismatch,
          "element and quadrature rule live on different cells");
  Tabulation tab;
  tab.nq = rule.size();
  tab.nbf = elem.node_count;
  tab.dim = cell_dim(elem.cell);
  tab.values.resize(static_cast<size_t>(tab.nq) * tab.nbf);
  tab.grads.resize(static_cast<size_t>(tab.nq) * tab.nbf * tab.dim);
  for (int q = 0; q < tab.nq; ++q)
    for (int i = 0; i < tab.nbf; ++i) {
      tab.values[q * tab.nbf + i] = eval_basis(elem, i, rule.point(q));
      for (int d = 0; d < tab.dim; ++d)
        tab.grads[(q * tab.nbf + i) * tab.dim + d] =
            eval_basis_grad(elem, i, rule.point(q), d);
    }
  return tab;
}

} // namespace loam::fem
