#include <catch2/catch_amalgamated.hpp>

#include "loam/data.hpp"
#include "oracles.hpp"

using namespace loam;

TEST_CASE("dat version counter tracks mutable access only", "[data]") {
  auto set = make_set(3);
  auto dat = make_dat(set, 2);
  CHECK(dat->view().size() == 6);
  auto v0 = dat->version();
  (void)dat->view();
  CHECK(dat->version() == v0);
  auto w = dat->mutable_view();
  w[0] = 1.0;
  CHECK(dat->version() == v0 + 1);
  (void)dat->mutable_view();
  CHECK(dat->version() == v0 + 2);
}

TEST_CASE("sparsity of the two-triangle mesh", "[data]") {
  auto cells = make_set(2);
  auto vertices = make_set(4);
  auto map = make_map(cells, vertices, 3, {0, 1, 2, 1, 3, 2});

  auto sp = build_sparsity(map, map);
  CHECK(sp->nrows() == 4);
  CHECK(sp->ncols() == 4);
  CHECK(sp->nnz() == 14); // rows 1,2 have 4 entries, rows 0,3 have 3

  auto dense = oracle::dense_pattern(*map, *map, 1, 1);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK((sp->find(r, c) >= 0) == dense[r][c]);

  // strictly increasing column indices within each row
  for (int r = 0; r < 4; ++r)
    for (long k = sp->row_offsets()[r] + 1; k < sp->row_offsets()[r + 1]; ++k)
      CHECK(sp->col_indices()[k - 1] < sp->col_indices()[k]);
}

TEST_CASE("sparsity trivia: single cell and identity map", "[data]") {
  auto one = make_set(1);
  auto verts = make_set(3);
  auto map = make_map(one, verts, 3, {0, 1, 2});
  CHECK(build_sparsity(map, map)->nnz() == 9);

  auto s5 = make_set(5);
  auto identity = make_map(s5, s5, 1, {0, 1, 2, 3, 4});
  auto sp = build_sparsity(identity, identity);
  CHECK(sp->nnz() == 5);
  for (int i = 0; i < 5; ++i) CHECK(sp->find(i, i) == i);

  auto other = make_set(4);
  auto wrong = make_map(other, verts, 3, {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2});
  try {
    build_sparsity(map, wrong);
    FAIL("expected SourceMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SourceMismatch);
  }
}

TEST_CASE("sparsity matches the dense oracle on random map pairs", "[data]") {
  auto gen = oracle::rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    int ncells = 1 + static_cast<int>(gen() % 50);
    int nrt = 2 + static_cast<int>(gen() % 12);
    int nct = 2 + static_cast<int>(gen() % 12);
    auto cells = make_set(ncells);
    auto rt = make_set(nrt);
    auto ct = make_set(nct);
    std::vector<int> rv, cv;
    for (int k = 0; k < 3 * ncells; ++k) rv.push_back(static_cast<int>(gen() % nrt));
    for (int k = 0; k < 2 * ncells; ++k) cv.push_back(static_cast<int>(gen() % nct));
    auto rmap = make_map(cells, rt, 3, rv);
    auto cmap = make_map(cells, ct, 2, cv);
    int rdim = 1 + static_cast<int>(gen() % 2);
    int cdim = 1 + static_cast<int>(gen() % 2);

    auto sp = build_sparsity(rmap, cmap, rdim, cdim);
    auto dense = oracle::dense_pattern(*rmap, *cmap, rdim, cdim);
    long nnz = 0;
    for (int r = 0; r < sp->nrows(); ++r)
      for (int c = 0; c < sp->ncols(); ++c) {
        REQUIRE((sp->find(r, c) >= 0) == dense[r][c]);
        nnz += dense[r][c] ? 1 : 0;
      }
    REQUIRE(sp->nnz() == nnz);
  }
}

TEST_CASE("mat addto semantics", "[data]") {
  auto cells = make_set(1);
  auto verts = make_set(4);
  auto map = make_map(cells, verts, 3, {0, 1, 2});
  auto mat = make_mat(build_sparsity(map, map));

  int r0[] = {0};
  double one[] = {1.0};
  mat->addto({r0, 1}, {r0, 1}, {one, 1}, Access::INC);
  mat->addto({r0, 1}, {r0, 1}, {one, 1}, Access::INC);
  CHECK(mat->at(0, 0) == 2.0);

  double five[] = {5.0};
  mat->addto({r0, 1}, {r0, 1}, {five, 1}, Access::WRITE);
  CHECK(mat->at(0, 0) == 5.0);

  int r3[] = {3};
  try {
    mat->addto({r0, 1}, {r3, 1}, {one, 1}, Access::INC);
    FAIL("expected OutsideSparsity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutsideSparsity);
    CHECK(std::string(e.what()).find("(0, 3)") != std::string::npos);
  }

  try {
    mat->addto({r0, 1}, {r0, 1}, {one, 1}, Access::READ);
    FAIL("expected IllegalAccess");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllegalAccess);
  }
}

TEST_CASE("mat addto INC is order independent for disjoint targets", "[data]") {
  auto cells = make_set(2);
  auto verts = make_set(4);
  auto map = make_map(cells, verts, 3, {0, 1, 2, 1, 3, 2});
  auto gen = oracle::rng(5);

  // a set of non-overlapping single-entry updates, applied in two orders
  std::vector<std::pair<int, int>> targets{{0, 0}, {1, 2}, {2, 1}, {3, 3}, {0, 1}};
  std::vector<double> values;
  for (size_t k = 0; k < targets.size(); ++k) values.push_back(oracle::uniform(gen));

  auto apply = [&](const std::vector<size_t>& order) {
    auto mat = make_mat(build_sparsity(map, map));
    for (size_t k : order) {
      int r[] = {targets[k].first}, c[] = {targets[k].second};
      double v[] = {values[k]};
      mat->addto({r, 1}, {c, 1}, {v, 1}, Access::INC);
    }
    return mat->values();
  };

  auto forward = apply({0, 1, 2, 3, 4});
  auto shuffled = apply({4, 2, 0, 3, 1});
  CHECK(forward == shuffled);
}

TEST_CASE("global reduce folds in order", "[data]") {
  std::vector<Real> partials{1, 2, 3};
  CHECK(global_reduce(Access::SUM, partials) == std::vector<Real>{6});
  std::vector<Real> mins{3, 1, 2};
  CHECK(global_reduce(Access::MIN, mins) == std::vector<Real>{1});
  std::vector<Real> single{7};
  CHECK(global_reduce(Access::MAX, single) == std::vector<Real>{7});

  try {
    global_reduce(Access::SUM, std::span<const Real>{});
    FAIL("expected EmptyPartials");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyPartials);
  }

  // bitwise determinism across repeated folds of the same order
  auto gen = oracle::rng(11);
  std::vector<Real> xs;
  for (int k = 0; k < 100; ++k) xs.push_back(oracle::uniform(gen));
  auto a = global_reduce(Access::SUM, xs);
  auto b = global_reduce(Access::SUM, xs);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(Real)) == 0);
}

TEST_CASE("spmv by CSR traversal", "[data]") {
  auto s2 = make_set(2);
  auto identity2 = make_map(s2, s2, 1, {0, 1});
  auto diag = make_mat(build_sparsity(identity2, identity2));
  int idx0[] = {0}, idx1[] = {1};
  double two[] = {2.0}, three[] = {3.0};
  diag->addto({idx0, 1}, {idx0, 1}, {two, 1});
  diag->addto({idx1, 1}, {idx1, 1}, {three, 1});
  std::vector<Real> x{1.0, 1.0};
  CHECK(mat_spmv(*diag, x) == std::vector<Real>{2.0, 3.0});

  // dense 2x2 [[4,1],[1,3]] against hand multiplication
  auto one = make_set(1);
  auto both = make_map(one, s2, 2, {0, 1});
  auto full = make_mat(build_sparsity(both, both));
  int rows[] = {0, 1};
  double block[] = {4, 1, 1, 3};
  full->addto({rows, 2}, {rows, 2}, {block, 4});
  std::vector<Real> x2{1.0, 2.0};
  CHECK(mat_spmv(*full, x2) == std::vector<Real>{6.0, 7.0});

  auto zero = make_mat(build_sparsity(both, both));
  CHECK(mat_spmv(*zero, x2) == std::vector<Real>{0.0, 0.0});

  std::vector<Real> bad{1.0, 2.0, 3.0};
  try {
    mat_spmv(*full, bad);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}
