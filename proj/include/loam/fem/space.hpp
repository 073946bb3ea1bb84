#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>

#include "loam/data.hpp"
#include "loam/fem/element.hpp"
#include "loam/mesh.hpp"

namespace loam::fem {

/// Scalar- or vector-valued Lagrange space: the indirections from the mesh to
/// the degrees of freedom. P1 nodes are the mesh vertices; P2 adds one node
/// per unique edge, edges keyed by their sorted vertex pair and numbered in
/// lexicographic order.
struct FunctionSpace {
  MeshPtr mesh;
  ReferenceElement element;
  int dim = 1; // components per node
  SetPtr node_set;
  MapPtr cell_node_map;
  MapPtr facet_node_map; // exterior facets -> incident nodes
  std::map<std::pair<int, int>, int> edge_nodes; // P2 only
};

using FunctionSpacePtr = std::shared_ptr<const FunctionSpace>;

inline FunctionSpacePtr make_function_space(MeshPtr mesh, int degree, int dim = 1) {
  require(dim >= 1, ErrorKind::InvalidArgument, "component count must be positive");
  auto space = std::make_shared<FunctionSpace>();
  space->mesh = mesh;
  space->dim = dim;
  Cell cell = mesh->dim == 2 ? Cell::Triangle : Cell::Tetrahedron;
  space->element = reference_element(cell, degree);

  const int nv = mesh->vertices->size();
  const int arity = mesh->cell_vertex_map->arity();

  if (degree == 1) {
    space->node_set = mesh->vertices;
    space->cell_node_map = mesh->cell_vertex_map;
    space->facet_node_map = mesh->facet_vertex_map;
    return space;
  }

  // P2 (triangles): enumerate unique edges lexicographically
  std::set<std::pair<int, int>> edges;
  for (int c = 0; c < mesh->cells->size(); ++c) {
    const int* cv = mesh->cell_vertex_map->row(c);
    for (int a = 0; a < arity; ++a)
      for (int b = a + 1; b < arity; ++b)
        edges.insert({std::min(cv[a], cv[b]), std::max(cv[a], cv[b])});
  }
  int next = nv;
  for (const auto& e : edges) space->edge_nodes[e] = next++;
  space->node_set = make_set(next, "p2_nodes");

  auto edge_node = [&](int a, int b) {
    return space->edge_nodes.at({std::min(a, b), std::max(a, b)});
  };

  std::vector<int> cn;
  cn.reserve(static_cast<size_t>(mesh->cells->size()) * 6);
  for (int c = 0; c < mesh->cells->size(); ++c) {
    const int* cv = mesh->cell_vertex_map->row(c);
    // vertices, then edge midpoints ordered by opposite-vertex index
    cn.insert(cn.end(), {cv[0], cv[1], cv[2], edge_node(cv[1], cv[2]), edge_node(cv[0], cv[2]),
                         edge_node(cv[0], cv[1])});
  }
  space->cell_node_map = make_map(mesh->cells, space->node_set, 6, std::move(cn), "cell_node");

  std::vector<int> fn;
  for (int f = 0; f < mesh->exterior_facets->size(); ++f) {
    const int* fv = mesh->facet_vertex_map->row(f);
    fn.insert(fn.end(), {fv[0], fv[1], edge_node(fv[0], fv[1])});
  }
  space->facet_node_map =
      make_map(mesh->exterior_facets, space->node_set, 3, std::move(fn), "facet_node");
  return space;
}

/// Geometric coordinates of every node (P2 edge nodes sit at edge midpoints).
inline std::vector<Real> node_coordinates(const FunctionSpace& space) {
  const auto& mesh = *space.mesh;
  const int gdim = mesh.dim;
  std::vector<Real> coords(static_cast<size_t>(space.node_set->size()) * gdim);
  auto x = mesh.coordinates->view();
  std::copy(x.begin(), x.end(), coords.begin());
  for (const auto& [edge, node] : space.edge_nodes)
    for (int d = 0; d < gdim; ++d)
      coords[node * gdim + d] = 0.5 * (x[edge.first * gdim + d] + x[edge.second * gdim + d]);
  return coords;
}

/// Sorted unique nodes lying on exterior facets with one of the markers.
inline std::vector<int> boundary_nodes(const FunctionSpace& space, const std::vector<int>& markers) {
  std::set<int> nodes;
  const auto& mesh = *space.mesh;
  for (int f = 0; f < mesh.exterior_facets->size(); ++f) {
    bool match = false;
    for (int m : markers) match = match || mesh.facet_markers[f] == m;
    if (!match) continue;
    const int* fn = space.facet_node_map->row(f);
    for (int k = 0; k < space.facet_node_map->arity(); ++k) nodes.insert(fn[k]);
  }
  return {nodes.begin(), nodes.end()};
}

/// A field: coefficient values over the space's node set.
struct Function {
  FunctionSpacePtr space;
  DatPtr dat;
};

using FunctionPtr = std::shared_ptr<Function>;

inline FunctionPtr make_function(FunctionSpacePtr space, std::string name = "function") {
  auto f = std::make_shared<Function>();
  f->dat = make_dat(space->node_set, space->dim, std::move(name));
  f->space = std::move(space);
  return f;
}

/// Nodal interpolation of a scalar callable on the coordinates.
inline void interpolate(Function& f, const std::function<Real(const Real*)>& value) {
  require(f.space->dim == 1, ErrorKind::UnsupportedForm, "interpolate expects a scalar space");
  auto coords = node_coordinates(*f.space);
  const int gdim = f.space->mesh->dim;
  auto data = f.dat->mutable_view();
  for (int n = 0; n < f.space->node_set->size(); ++n) data[n] = value(&coords[n * gdim]);
}

inline void set_constant(Function& f, Real value) {
  auto data = f.dat->mutable_view();
  std::fill(data.begin(), data.end(), value);
}

} // namespace loam::fem
