#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loam/data.hpp"
#include "loam/topology.hpp"

namespace loam {

/// Simplicial mesh: entity sets, cell-vertex incidence, exterior facets with
/// integer markers, and coordinates held as an ordinary Dat on the vertices.
///
/// Reference-cell facet numbering: facet k is opposite local vertex k.
/// Facet vertex tuples are stored in ascending global index.
struct Mesh {
  int dim = 2;
  SetPtr cells;
  SetPtr vertices;
  SetPtr exterior_facets;
  MapPtr cell_vertex_map;
  MapPtr facet_vertex_map;
  std::vector<int> facet_markers;               // one id per exterior facet
  std::vector<std::pair<int, int>> facet_cell;  // (cell, local facet)
  DatPtr coordinates;                           // dim components per vertex
};

using MeshPtr = std::shared_ptr<Mesh>;

namespace detail {

inline std::vector<int> facet_local_vertices(int cell_dim, int local_facet) {
  std::vector<int> out;
  for (int v = 0; v <= cell_dim; ++v)
    if (v != local_facet) out.push_back(v);
  return out;
}

/// Finds facets incident to exactly one cell and fills the facet fields of the
/// mesh. Markers are matched from `marked` (sorted facet vertices -> id) when
/// provided, and default to 0.
inline void derive_exterior_facets(Mesh& mesh, const std::map<std::vector<int>, int>* marked) {
  const int d = mesh.dim;
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> incidence;
  for (int c = 0; c < mesh.cells->size(); ++c) {
    const int* cv = mesh.cell_vertex_map->row(c);
    for (int f = 0; f <= d; ++f) {
      std::vector<int> key;
      for (int lv : facet_local_vertices(d, f)) key.push_back(cv[lv]);
      std::sort(key.begin(), key.end());
      auto& list = incidence[key];
      list.emplace_back(c, f);
      require(list.size() <= 2, ErrorKind::NonManifold,
              "facet shared by more than two cells");
    }
  }

  std::vector<int> facet_vertices;
  mesh.facet_markers.clear();
  mesh.facet_cell.clear();
  // deterministic facet order: discovery by (cell, local facet)
  for (int c = 0; c < mesh.cells->size(); ++c) {
    const int* cv = mesh.cell_vertex_map->row(c);
    for (int f = 0; f <= d; ++f) {
      std::vector<int> key;
      for (int lv : facet_local_vertices(d, f)) key.push_back(cv[lv]);
      std::sort(key.begin(), key.end());
      const auto& list = incidence[key];
      if (list.size() != 1 || list[0] != std::make_pair(c, f)) continue;
      facet_vertices.insert(facet_vertices.end(), key.begin(), key.end());
      mesh.facet_cell.emplace_back(c, f);
      int marker = 0;
      if (marked) {
        auto it = marked->find(key);
        if (it != marked->end()) marker = it->second;
      }
      mesh.facet_markers.push_back(marker);
    }
  }
  mesh.exterior_facets = make_set(static_cast<int>(mesh.facet_cell.size()), "exterior_facets");
  mesh.facet_vertex_map = make_map(mesh.exterior_facets, mesh.vertices, d,
                                   std::move(facet_vertices), "facet_vertex");
}

} // namespace detail

/// Structured unit-square triangulation: (n+1)^2 vertices, 2n^2 triangles,
/// each grid square split along its SW-NE diagonal. Boundary markers:
/// 1: x=0, 2: x=1, 3: y=0, 4: y=1.
inline MeshPtr unit_square_mesh(int n) {
  require(n >= 1, ErrorKind::InvalidSubdivision, "unit_square_mesh requires n >= 1");
  auto mesh = std::make_shared<Mesh>();
  mesh->dim = 2;
  const int nv = (n + 1) * (n + 1);
  mesh->vertices = make_set(nv, "vertices");
  mesh->cells = make_set(2 * n * n, "cells");

  mesh->coordinates = make_dat(mesh->vertices, 2, "coordinates");
  {
    auto x = mesh->coordinates->mutable_view();
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        int v = j * (n + 1) + i;
        x[2 * v] = static_cast<Real>(i) / n;
        x[2 * v + 1] = static_cast<Real>(j) / n;
      }
  }

  std::vector<int> cv;
  cv.reserve(6 * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int a = j * (n + 1) + i;
      int b = a + 1;
      int c = a + n + 2;
      int d = a + n + 1;
      cv.insert(cv.end(), {a, b, c}); // positively oriented
      cv.insert(cv.end(), {a, c, d});
    }
  mesh->cell_vertex_map = make_map(mesh->cells, mesh->vertices, 3, std::move(cv), "cell_vertex");

  detail::derive_exterior_facets(*mesh, nullptr);
  for (size_t f = 0; f < mesh->facet_cell.size(); ++f) {
    const int* fv = mesh->facet_vertex_map->row(static_cast<int>(f));
    auto gi = [&](int v) { return v % (n + 1); };
    auto gj = [&](int v) { return v / (n + 1); };
    if (gi(fv[0]) == 0 && gi(fv[1]) == 0)
      mesh->facet_markers[f] = 1;
    else if (gi(fv[0]) == n && gi(fv[1]) == n)
      mesh->facet_markers[f] = 2;
    else if (gj(fv[0]) == 0 && gj(fv[1]) == 0)
      mesh->facet_markers[f] = 3;
    else
      mesh->facet_markers[f] = 4;
  }
  return mesh;
}

/// Structured unit-cube triangulation: (n+1)^3 vertices, 6n^3 tetrahedra per
/// the Kuhn subdivision of each grid cube. Boundary markers 1..6 for the
/// faces x=0, x=1, y=0, y=1, z=0, z=1.
inline MeshPtr unit_cube_mesh(int n) {
  require(n >= 1, ErrorKind::InvalidSubdivision, "unit_cube_mesh requires n >= 1");
  auto mesh = std::make_shared<Mesh>();
  mesh->dim = 3;
  const int s = n + 1;
  mesh->vertices = make_set(s * s * s, "vertices");
  mesh->cells = make_set(6 * n * n * n, "cells");

  mesh->coordinates = make_dat(mesh->vertices, 3, "coordinates");
  {
    auto x = mesh->coordinates->mutable_view();
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
          int v = (k * s + j) * s + i;
          x[3 * v] = static_cast<Real>(i) / n;
          x[3 * v + 1] = static_cast<Real>(j) / n;
          x[3 * v + 2] = static_cast<Real>(k) / n;
        }
  }

  // Kuhn subdivision: one tet per vertex permutation path from the cube's
  // low corner to its high corner. Odd permutations get two vertices swapped
  // so every tet is positively oriented.
  const std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  const std::array<bool, 6> odd{{false, true, true, false, false, true}};

  std::vector<int> cv;
  cv.reserve(24 * n * n * n);
  auto vid = [&](int i, int j, int k) { return (k * s + j) * s + i; };
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < 6; ++p) {
          int ijk[3] = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(ijk[0], ijk[1], ijk[2]);
          for (int step = 0; step < 3; ++step) {
            ijk[perms[p][step]] += 1;
            tet[step + 1] = vid(ijk[0], ijk[1], ijk[2]);
          }
          if (odd[p]) std::swap(tet[2], tet[3]);
          cv.insert(cv.end(), tet.begin(), tet.end());
        }
  mesh->cell_vertex_map = make_map(mesh->cells, mesh->vertices, 4, std::move(cv), "cell_vertex");

  detail::derive_exterior_facets(*mesh, nullptr);
  for (size_t f = 0; f < mesh->facet_cell.size(); ++f) {
    const int* fv = mesh->facet_vertex_map->row(static_cast<int>(f));
    auto gi = [&](int v) { return v % s; };
    auto gj = [&](int v) { return (v / s) % s; };
    auto gk = [&](int v) { return v / (s * s); };
    auto all = [&](auto coord, int value) {
      return coord(fv[0]) == value && coord(fv[1]) == value && coord(fv[2]) == value;
    };
    int marker = 0;
    if (all(gi, 0)) marker = 1;
    else if (all(gi, n)) marker = 2;
    else if (all(gj, 0)) marker = 3;
    else if (all(gj, n)) marker = 4;
    else if (all(gk, 0)) marker = 5;
    else if (all(gk, n)) marker = 6;
    mesh->facet_markers[f] = marker;
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Text format: line 1 "dim nv nc"; nv coordinate lines; nc cell lines of
// dim+1 zero-based vertex indices; optional trailing "facets nf" block of
// marker + facet vertex indices. Whitespace separated, '#' starts a comment.

namespace detail {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  /// Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      out = std::istringstream(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail_here(const std::string& msg) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + msg);
  }
};

} // namespace detail

inline MeshPtr read_mesh_stream(std::istream& in) {
  detail::LineReader reader{in};
  std::istringstream line;

  require(reader.next(line), ErrorKind::ParseError, "empty mesh file");
  int dim = 0, nv = 0, nc = 0;
  if (!(line >> dim >> nv >> nc)) reader.fail_here("expected 'dim nv nc'");
  if (dim != 2 && dim != 3) reader.fail_here("dimension must be 2 or 3");
  if (nv < dim + 1 || nc < 1) reader.fail_here("implausible vertex or cell count");

  auto mesh = std::make_shared<Mesh>();
  mesh->dim = dim;
  mesh->vertices = make_set(nv, "vertices");
  mesh->cells = make_set(nc, "cells");
  mesh->coordinates = make_dat(mesh->vertices, dim, "coordinates");
  {
    auto x = mesh->coordinates->mutable_view();
    for (int v = 0; v < nv; ++v) {
      if (!reader.next(line)) reader.fail_here("unexpected end of file in vertex block");
      for (int d = 0; d < dim; ++d)
        if (!(line >> x[v * dim + d])) reader.fail_here("malformed vertex coordinates");
    }
  }

  std::vector<int> cv(static_cast<size_t>(nc) * (dim + 1));
  for (int c = 0; c < nc; ++c) {
    if (!reader.next(line)) reader.fail_here("unexpected end of file in cell block");
    for (int k = 0; k <= dim; ++k) {
      int v;
      if (!(line >> v)) reader.fail_here("malformed cell line");
      if (v < 0 || v >= nv)
        reader.fail_here("vertex index " + std::to_string(v) + " outside [0, " +
                         std::to_string(nv) + ")");
      cv[c * (dim + 1) + k] = v;
    }
  }
  mesh->cell_vertex_map = make_map(mesh->cells, mesh->vertices, dim + 1, std::move(cv),
                                   "cell_vertex");

  std::map<std::vector<int>, int> marked;
  if (reader.next(line)) {
    std::string word;
    int nf = 0;
    if (!(line >> word >> nf) || word != "facets") reader.fail_here("expected 'facets nf'");
    for (int f = 0; f < nf; ++f) {
      if (!reader.next(line)) reader.fail_here("unexpected end of file in facet block");
      int marker;
      if (!(line >> marker)) reader.fail_here("malformed facet line");
      std::vector<int> key(dim);
      for (int k = 0; k < dim; ++k) {
        if (!(line >> key[k])) reader.fail_here("malformed facet line");
        if (key[k] < 0 || key[k] >= nv) reader.fail_here("facet vertex index out of range");
      }
      std::sort(key.begin(), key.end());
      marked[key] = marker;
    }
  }

  detail::derive_exterior_facets(*mesh, marked.empty() ? nullptr : &marked);
  return mesh;
}

inline MeshPtr read_mesh(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ParseError, "cannot open mesh file " + path);
  return read_mesh_stream(in);
}

inline void write_mesh_stream(const Mesh& mesh, std::ostream& out) {
  out << mesh.dim << " " << mesh.vertices->size() << " " << mesh.cells->size() << "\n";
  char buf[40];
  auto x = mesh.coordinates->view();
  for (int v = 0; v < mesh.vertices->size(); ++v) {
    for (int d = 0; d < mesh.dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[v * mesh.dim + d]);
      out << (d ? " " : "") << buf;
    }
    out << "\n";
  }
  for (int c = 0; c < mesh.cells->size(); ++c) {
    const int* cv = mesh.cell_vertex_map->row(c);
    for (int k = 0; k <= mesh.dim; ++k) out << (k ? " " : "") << cv[k];
    out << "\n";
  }
  out << "facets " << mesh.exterior_facets->size() << "\n";
  for (int f = 0; f < mesh.exterior_facets->size(); ++f) {
    out << mesh.facet_markers[f];
    const int* fv = mesh.facet_vertex_map->row(f);
    for (int k = 0; k < mesh.dim; ++k) out << " " << fv[k];
    out << "\n";
  }
}

inline void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::ParseError, "cannot open " + path + " for writing");
  write_mesh_stream(mesh, out);
}

// ---------------------------------------------------------------------------

/// Vertex adjacency induced by shared cells.
inline std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh) {
  std::vector<std::set<int>> nbrs(mesh.vertices->size());
  const int arity = mesh.cell_vertex_map->arity();
  for (int c = 0; c < mesh.cells->size(); ++c) {
    const int* cv = mesh.cell_vertex_map->row(c);
    for (int a = 0; a < arity; ++a)
      for (int b = 0; b < arity; ++b)
        if (a != b) nbrs[cv[a]].insert(cv[b]);
  }
  std::vector<std::vector<int>> adjacency(mesh.vertices->size());
  for (size_t v = 0; v < nbrs.size(); ++v) adjacency[v].assign(nbrs[v].begin(), nbrs[v].end());
  return adjacency;
}

/// Renumbers the vertices by reverse Cuthill-McKee over the vertex adjacency;
/// all maps and the coordinate field are permuted consistently. Returns the
/// new mesh and the permutation (new_mesh, perm) with perm[new] = old.
inline std::pair<MeshPtr, std::vector<int>> reorder(const Mesh& mesh) {
  auto perm = rcm_order(mesh.vertices->size(), vertex_adjacency(mesh));
  std::vector<int> new_of(perm.size());
  for (size_t k = 0; k < perm.size(); ++k) new_of[perm[k]] = static_cast<int>(k);

  auto out = std::make_shared<Mesh>();
  out->dim = mesh.dim;
  out->vertices = make_set(mesh.vertices->size(), "vertices");
  out->cells = make_set(mesh.cells->size(), "cells");
  out->coordinates = make_dat(out->vertices, mesh.dim, "coordinates");
  {
    auto dst = out->coordinates->mutable_view();
    auto src = mesh.coordinates->view();
    for (size_t v = 0; v < perm.size(); ++v)
      for (int d = 0; d < mesh.dim; ++d) dst[v * mesh.dim + d] = src[perm[v] * mesh.dim + d];
  }
  std::vector<int> cv(mesh.cell_vertex_map->values().size());
  for (size_t k = 0; k < cv.size(); ++k) cv[k] = new_of[mesh.cell_vertex_map->values()[k]];
  out->cell_vertex_map = make_map(out->cells, out->vertices, mesh.dim + 1, std::move(cv),
                                  "cell_vertex");

  // facet order is preserved (derivation walks cells in unchanged order), so
  // markers carry over positionally
  auto markers = mesh.facet_markers;
  detail::derive_exterior_facets(*out, nullptr);
  require(out->facet_cell == mesh.facet_cell, ErrorKind::InvalidArgument,
          "facet derivation changed under renumbering");
  out->facet_markers = std::move(markers);
  return {out, perm};
}

} // namespace loam
