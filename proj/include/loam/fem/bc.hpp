#pragma once

#include "loam/fem/space.hpp"

namespace loam::fem {

/// Strong Dirichlet condition on the nodes lying on the marked facets.
struct DirichletBC {
  FunctionSpacePtr space;
  Real constant = 0.0;
  FunctionPtr function; // used instead of the constant when set
  std::vector<int> markers;
  std::vector<int> nodes; // derived, sorted

  Real value_at(int node) const {
    return function ? function->dat->view()[node] : constant;
  }

  /// Overwrite the prescribed values in a node vector (listing-style
  /// "bc.apply(b)").
  void apply(Dat& dat) const {
    require(dat.set() == space->node_set, ErrorKind::SpaceMismatch,
            "bc applied to a vector on a different node set");
    auto data = dat.mutable_view();
    for (int n : nodes) data[n] = value_at(n);
  }
};

inline DirichletBC dirichlet_bc(FunctionSpacePtr space, Real value, std::vector<int> markers) {
  DirichletBC bc;
  bc.space = std::move(space);
  bc.constant = value;
  bc.markers = std::move(markers);
  bc.nodes = boundary_nodes(*bc.space, bc.markers);
  return bc;
}

inline DirichletBC dirichlet_bc(FunctionSpacePtr space, FunctionPtr value,
                                std::vector<int> markers) {
  require(value && value->space->node_set == space->node_set, ErrorKind::SpaceMismatch,
          "bc value must live on the constrained space");
  DirichletBC bc;
  bc.space = std::move(space);
  bc.function = std::move(value);
  bc.markers = std::move(markers);
  bc.nodes = boundary_nodes(*bc.space, bc.markers);
  return bc;
}

} // namespace loam::fem
