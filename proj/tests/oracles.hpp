// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "loam/topology.hpp"

namespace oracle {

/// Exhaustive pairwise conflict check of a coloring: two entities with the
/// same color must have disjoint images under every conflict map.
inline bool coloring_valid(const loam::Coloring& coloring,
                           const std::vector<loam::MapPtr>& conflict_maps) {
  const int n = static_cast<int>(coloring.colors.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (coloring.colors[a] != coloring.colors[b]) continue;
      for (const auto& m : conflict_maps) {
        const int* ra = m->row(a);
        const int* rb = m->row(b);
        for (int i = 0; i < m->arity(); ++i)
          for (int j = 0; j < m->arity(); ++j)
            if (ra[i] == rb[j]) return false;
      }
    }
  return true;
}

/// Dense boolean accumulation of the coupling pattern of two maps.
inline std::vector<std::vector<bool>> dense_pattern(const loam::Map& row_map,
                                                    const loam::Map& col_map, int row_dim,
                                                    int col_dim) {
  int nrows = row_map.target()->size() * row_dim;
  int ncols = col_map.target()->size() * col_dim;
  std::vector<std::vector<bool>> dense(nrows, std::vector<bool>(ncols, false));
  for (int e = 0; e < row_map.source()->size(); ++e)
    for (int a = 0; a < row_map.arity(); ++a)
      for (int rd = 0; rd < row_dim; ++rd)
        for (int b = 0; b < col_map.arity(); ++b)
          for (int cd = 0; cd < col_dim; ++cd)
            dense[row_map.row(e)[a] * row_dim + rd][col_map.row(e)[b] * col_dim + cd] = true;
  return dense;
}

/// Dense LU solve with partial pivoting (row-major n x n matrix).
inline std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[pivot * n + k])) pivot = i;
    if (pivot != k) {
      for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      std::swap(b[k], b[pivot]);
    }
    for (int i = k + 1; i < n; ++i) {
      double f = a[i * n + k] / a[k * n + k];
      a[i * n + k] = 0.0;
      for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a[i * n + j] * x[j];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

} // namespace oracle
