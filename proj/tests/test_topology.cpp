#include <catch2/catch_amalgamated.hpp>

#include "loam/topology.hpp"
#include "oracles.hpp"

using namespace loam;

namespace {

// Two triangles sharing edge 1-2: the smallest shared-edge mesh.
MapPtr two_triangle_map(SetPtr& cells, SetPtr& vertices) {
  cells = make_set(2, "cells");
  vertices = make_set(4, "vertices");
  return make_map(cells, vertices, 3, {0, 1, 2, 1, 3, 2}, "cell_vertex");
}

} // namespace

TEST_CASE("sets store only a count", "[topology]") {
  auto s = make_set(7, "cells");
  CHECK(s->size() == 7);
  CHECK(s->name() == "cells");
  CHECK_THROWS_AS(Set(-1), Error);
}

TEST_CASE("map construction validates entries", "[topology]") {
  SetPtr cells, vertices;
  auto map = two_triangle_map(cells, vertices);
  CHECK(map->arity() == 3);
  CHECK(map->row(1)[0] == 1);
  CHECK(map->row(1)[2] == 2);

  // out-of-range value
  try {
    make_map(cells, vertices, 3, {0, 1, 2, 1, 4, 2});
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndexOutOfRange);
  }

  // wrong table length
  try {
    make_map(cells, vertices, 3, {0, 1, 2});
    FAIL("expected ArityMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ArityMismatch);
  }

  // identity map
  auto s5 = make_set(5);
  auto identity = make_map(s5, s5, 1, {0, 1, 2, 3, 4});
  CHECK(identity->arity() == 1);
}

TEST_CASE("greedy coloring on shared-edge and fan meshes", "[topology]") {
  SetPtr cells, vertices;
  auto map = two_triangle_map(cells, vertices);

  auto coloring = color_iteration(cells, {map});
  CHECK(coloring.colors == std::vector<int>{0, 1});
  CHECK(coloring.num_colors == 2);
  CHECK(oracle::coloring_valid(coloring, {map}));

  // direct loop: no conflicts, everything color 0
  auto direct = color_iteration(cells, {});
  CHECK(direct.colors == std::vector<int>{0, 0});
  CHECK(direct.num_colors == 1);

  // fan: 4 cells all containing vertex 0 form a clique
  auto fan_cells = make_set(4);
  auto fan_verts = make_set(9);
  auto fan = make_map(fan_cells, fan_verts, 3, {0, 1, 2, 0, 3, 4, 0, 5, 6, 0, 7, 8});
  auto fan_coloring = color_iteration(fan_cells, {fan});
  CHECK(fan_coloring.colors == std::vector<int>{0, 1, 2, 3});
  CHECK(oracle::coloring_valid(fan_coloring, {fan}));

  // source mismatch
  try {
    color_iteration(fan_cells, {map});
    FAIL("expected SourceMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SourceMismatch);
  }
}

TEST_CASE("coloring is deterministic and valid on random meshes", "[topology]") {
  auto gen = oracle::rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int ncells = 1 + static_cast<int>(gen() % 40);
    int nverts = 3 + static_cast<int>(gen() % 30);
    auto cells = make_set(ncells);
    auto verts = make_set(nverts);
    std::vector<int> table;
    for (int k = 0; k < 3 * ncells; ++k) table.push_back(static_cast<int>(gen() % nverts));
    auto map = make_map(cells, verts, 3, table);

    auto c1 = color_iteration(cells, {map});
    auto c2 = color_iteration(cells, {map});
    CHECK(c1.colors == c2.colors);
    CHECK(oracle::coloring_valid(c1, {map}));
  }
}

TEST_CASE("rcm ordering of a path, a singleton and a star", "[topology]") {
  // path 0-1-2: BFS from endpoint 0, then reversed
  auto path = rcm_order(3, {{1}, {0, 2}, {1}});
  CHECK(path == std::vector<int>{2, 1, 0});
  CHECK(graph_bandwidth(path, {{1}, {0, 2}, {1}}) == 1);

  CHECK(rcm_order(1, {{}}) == std::vector<int>{0});

  // star, center 0: seeded from the lowest-index minimum-degree leaf
  std::vector<std::vector<int>> star{{1, 2, 3}, {0}, {0}, {0}};
  auto order = rcm_order(4, star);
  CHECK(order == std::vector<int>{3, 2, 0, 1});
  // exhaustive check: no ordering of the star does better than bandwidth 2
  std::vector<int> candidate{0, 1, 2, 3};
  int best = 99;
  do {
    best = std::min(best, graph_bandwidth(candidate, star));
  } while (std::next_permutation(candidate.begin(), candidate.end()));
  CHECK(best == 2);
  CHECK(graph_bandwidth(order, star) == best);

  try {
    rcm_order(2, {{1}, {}});
    FAIL("expected AsymmetricAdjacency");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AsymmetricAdjacency);
  }
}

TEST_CASE("rcm output is a bijection and handles disconnected graphs", "[topology]") {
  auto gen = oracle::rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(gen() % 30);
    std::vector<std::set<int>> adj_sets(n);
    int nedges = static_cast<int>(gen() % (2 * n));
    for (int k = 0; k < nedges; ++k) {
      int u = static_cast<int>(gen() % n), v = static_cast<int>(gen() % n);
      if (u == v) continue;
      adj_sets[u].insert(v);
      adj_sets[v].insert(u);
    }
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u) adj[u].assign(adj_sets[u].begin(), adj_sets[u].end());

    auto order = rcm_order(n, adj);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) REQUIRE(sorted[i] == i);
  }

  // two path components
  auto order = rcm_order(6, {{1}, {0, 2}, {1}, {4}, {3, 5}, {4}});
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
}
