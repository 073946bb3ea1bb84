// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances and time budgets are pinned in code.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "exact_fem.hpp"
#include "loam/bench.hpp"
#include "loam/loam.hpp"
#include "oracles.hpp"

using namespace loam;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// --------------------------------------------------------------------------
// criterion 1: Poisson 2D convergence rates

void poisson_2d_convergence(Check& check) {
  auto p1 = bench::run_poisson(2, 1, {8, 16, 32}, 1);
  for (const auto& r : p1) check.expect(r.converged, "P1 n=" + std::to_string(r.n) + " diverged");
  double rate1 = p1.back().rate.value_or(0.0);
  check.expect(rate1 >= 1.9 && rate1 <= 2.1, "P1 rate " + fmt(rate1) + " outside [1.9, 2.1]");

  auto p2 = bench::run_poisson(2, 2, {8, 16, 32}, 1);
  for (const auto& r : p2) check.expect(r.converged, "P2 n=" + std::to_string(r.n) + " diverged");
  double rate2 = p2.back().rate.value_or(0.0);
  check.expect(rate2 >= 2.9 && rate2 <= 3.1, "P2 rate " + fmt(rate2) + " outside [2.9, 3.1]");
  check.note("P1 rate " + fmt(rate1) + ", P2 rate " + fmt(rate2));

  // independent oracle at n=8: dense LU against the CG path
  auto mesh = unit_square_mesh(8);
  auto V = fem::make_function_space(mesh, 1);
  auto bc = fem::dirichlet_bc(V, 0.0, {1, 2, 3, 4});
  auto A = fem::assemble_matrix(fem::stiffness(V, V), {bc});
  const Real pi = std::acos(-1.0);
  auto f = fem::make_function(V);
  fem::interpolate(*f, [pi](const Real* x) {
    return 2 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
  });
  auto b = fem::assemble_vector(fem::source(V, f), {bc});

  const int n = A->nrows();
  std::vector<double> dense(static_cast<size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) dense[r * n + c] = A->at(r, c);
  auto bv = b->view();
  auto direct = oracle::lu_solve(dense, {bv.begin(), bv.end()});
  auto [x, report] =
      cg_solve(*A, {bv.data(), bv.size()}, {}, 1e-10, 1e-15, 10 * n, Preconditioner::Jacobi);
  check.expect(report.converged, "oracle solve did not converge");
  double max_diff = 0.0;
  for (int k = 0; k < n; ++k) max_diff = std::max(max_diff, std::abs(x[k] - direct[k]));
  check.expect(max_diff <= 1e-8, "CG vs dense LU differ by " + fmt(max_diff));
}

// --------------------------------------------------------------------------
// criterion 2: Poisson 3D with the known analytical solution

void poisson_3d(Check& check) {
  auto reports = bench::run_poisson(3, 1, {4, 8}, 1);
  for (const auto& r : reports)
    check.expect(r.converged, "n=" + std::to_string(r.n) + " did not reach rtol 1e-8");
  double factor = reports[0].l2_error / reports[1].l2_error;
  check.expect(factor >= 3.2 && factor <= 4.8,
               "error reduction factor " + fmt(factor) + " outside [3.2, 4.8]");
  check.note("e(4)=" + fmt(reports[0].l2_error) + " e(8)=" + fmt(reports[1].l2_error) +
             " factor=" + fmt(factor));
}

// --------------------------------------------------------------------------
// criterion 3: bitwise determinism across thread counts

void parloop_determinism(Check& check) {
  auto mesh = unit_square_mesh(16);
  auto V1 = fem::make_function_space(mesh, 1);
  auto V2 = fem::make_function_space(mesh, 2);

  auto cell_field = make_dat(mesh->cells, 1);
  auto gen = oracle::rng(901);
  {
    auto w = cell_field->mutable_view();
    for (auto& v : w) v = oracle::uniform(gen);
  }
  auto vertex_field = make_dat(mesh->vertices, 1);
  {
    auto w = vertex_field->mutable_view();
    for (auto& v : w) v = oracle::uniform(gen);
  }

  using ir::accum;
  using ir::assign;
  using ir::idx;
  using ir::lit;
  using ir::loop;
  using ir::ref;

  auto direct_write = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "dw";
    ast.params = {{"A", {1}}, {"B", {1}}};
    ast.body = {assign("A", {lit(0.0)}, lit(3.0) * idx("B", {lit(0.0)}))};
    auto out = make_dat(mesh->cells, 1);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::WRITE), arg(cell_field, Access::READ)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto direct_rw = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "drw";
    ast.params = {{"A", {1}}, {"B", {1}}};
    ast.body = {assign("A", {lit(0.0)},
                       idx("A", {lit(0.0)}) + lit(0.5) * idx("B", {lit(0.0)}))};
    auto out = make_dat(mesh->cells, 1);
    std::fill(out->mutable_view().begin(), out->mutable_view().end(), 1.0);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::RW), arg(cell_field, Access::READ)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto direct_inc = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "dinc";
    ast.params = {{"A", {1}}, {"B", {1}}};
    ast.body = {accum("A", {lit(0.0)}, idx("B", {lit(0.0)}) * idx("B", {lit(0.0)}))};
    auto out = make_dat(mesh->cells, 1);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::INC), arg(cell_field, Access::READ)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto gather_write = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "gw";
    ast.params = {{"A", {1}}, {"V", {3}}};
    ast.body = {assign("A", {lit(0.0)},
                       idx("V", {lit(0.0)}) + idx("V", {lit(1.0)}) + idx("V", {lit(2.0)}))};
    auto out = make_dat(mesh->cells, 1);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::WRITE), arg(vertex_field, Access::READ, mesh->cell_vertex_map)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto indirect_inc = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "iinc";
    ast.params = {{"V", {3}}, {"C", {1}}};
    ast.body = {loop("i", 3, {accum("V", {ref("i")}, (ref("i") + lit(1.0)) * idx("C", {lit(0.0)}))})};
    auto out = make_dat(mesh->vertices, 1);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::INC, mesh->cell_vertex_map), arg(cell_field, Access::READ)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto indirect_inc_vec = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "iincv";
    ast.params = {{"V", {3, 2}}, {"C", {1}}};
    ast.body = {loop("i", 3,
                     {accum("V", {ref("i"), lit(0.0)}, idx("C", {lit(0.0)})),
                      accum("V", {ref("i"), lit(1.0)}, lit(2.0) * idx("C", {lit(0.0)}))})};
    auto out = make_dat(mesh->vertices, 2);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(out, Access::INC, mesh->cell_vertex_map), arg(cell_field, Access::READ)}},
            threads);
    auto v = out->view();
    return std::vector<Real>(v.begin(), v.end());
  };
  auto mat_mass_p1 = [&](int threads) {
    auto mat = fem::assemble_matrix(fem::mass(V1, V1), {}, threads);
    return mat->values();
  };
  auto mat_stiffness_p2 = [&](int threads) {
    auto mat = fem::assemble_matrix(fem::stiffness(V2, V2), {}, threads);
    return mat->values();
  };
  auto global_sum = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "gsum";
    ast.params = {{"G", {1}}, {"B", {1}}, {"S", {1}}};
    ast.body = {accum("G", {lit(0.0)}, idx("B", {lit(0.0)}) * idx("S", {lit(0.0)}))};
    auto g = make_global(1);
    auto scale = make_global(1);
    scale->mutable_view()[0] = 1.25;
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(g, Access::SUM), arg(cell_field, Access::READ), arg(scale, Access::READ)}},
            threads);
    return std::vector<Real>{g->view()[0]};
  };
  auto global_minmax = [&](int threads) {
    ir::KernelAst ast;
    ast.name = "gmm";
    ast.params = {{"LO", {1}}, {"HI", {1}}, {"B", {1}}};
    ast.body = {assign("LO", {lit(0.0)}, idx("B", {lit(0.0)})),
                assign("HI", {lit(0.0)}, idx("B", {lit(0.0)}))};
    auto lo = make_global(1);
    auto hi = make_global(1);
    execute({ir::make_kernel(ast), mesh->cells,
             {arg(lo, Access::MIN), arg(hi, Access::MAX), arg(cell_field, Access::READ)}},
            threads);
    return std::vector<Real>{lo->view()[0], hi->view()[0]};
  };

  std::vector<std::pair<std::string, std::function<std::vector<Real>(int)>>> suite{
      {"direct WRITE", direct_write},   {"direct RW", direct_rw},
      {"direct INC", direct_inc},       {"indirect gather", gather_write},
      {"indirect INC", indirect_inc},   {"indirect INC dim 2", indirect_inc_vec},
      {"Mat mass P1", mat_mass_p1},     {"Mat stiffness P2", mat_stiffness_p2},
      {"Global SUM", global_sum},       {"Global MIN/MAX", global_minmax}};

  for (auto& [name, run] : suite) {
    auto reference = run(1);
    for (int threads : {2, 4, 8}) {
      auto result = run(threads);
      bool equal = result.size() == reference.size() &&
                   std::memcmp(result.data(), reference.data(),
                               result.size() * sizeof(Real)) == 0;
      check.expect(equal, name + " differs at threads=" + std::to_string(threads));
    }
  }
  check.note("10 loops x threads {2,4,8} bitwise equal to threads=1");
}

// --------------------------------------------------------------------------
// criterion 4: coloring validity and determinism

void coloring_validity(Check& check) {
  auto mesh = unit_square_mesh(32);
  auto first = color_iteration(mesh->cells, {mesh->cell_vertex_map});
  auto second = color_iteration(mesh->cells, {mesh->cell_vertex_map});
  check.expect(first.colors == second.colors, "repeated colorings differ");
  check.expect(oracle::coloring_valid(first, {mesh->cell_vertex_map}),
               "conflicting cells share a color");
  check.note(std::to_string(first.num_colors) + " colors over " +
             std::to_string(mesh->cells->size()) + " cells, exhaustive pairwise check");
}

// --------------------------------------------------------------------------
// criterion 5: optimizer equivalence on the full kernel catalogue

void optimizer_equivalence(Check& check) {
  auto mesh2 = unit_square_mesh(1);
  auto mesh3 = unit_cube_mesh(1);
  auto T1 = fem::make_function_space(mesh2, 1);
  auto T2 = fem::make_function_space(mesh2, 2);
  auto H1 = fem::make_function_space(mesh3, 1);
  auto c1 = fem::make_function(T1);
  auto c2 = fem::make_function(T2);
  auto c3 = fem::make_function(H1);

  std::vector<std::pair<std::string, fem::Form>> catalogue;
  for (auto& [V, c] : std::vector<std::pair<fem::FunctionSpacePtr, fem::FunctionPtr>>{
           {T1, c1}, {T2, c2}, {H1, c3}}) {
    std::string tag = (V->mesh->dim == 2 ? "tri P" : "tet P") + std::to_string(V->element.degree);
    catalogue.emplace_back("mass " + tag, fem::mass(V, V));
    catalogue.emplace_back("stiffness " + tag, fem::stiffness(V, V));
    catalogue.emplace_back("helmholtz " + tag, fem::helmholtz(V, V, 0.7));
    catalogue.emplace_back("source-const " + tag, fem::source(V, 2.0));
    catalogue.emplace_back("source " + tag, fem::source(V, c));
    catalogue.emplace_back("stiffness-action " + tag, fem::stiffness_action(V, c));
    catalogue.emplace_back("facet-source " + tag, fem::facet_source(V, c, 1));
  }

  auto gen = oracle::rng(6001);
  for (const auto& [name, form] : catalogue) {
    auto ast = fem::compile_local_kernel(form);
    struct Variant {
      std::string name;
      ir::KernelAst ast;
      bool bitwise;
    };
    std::vector<Variant> variants;
    variants.push_back({"hoist", ir::hoist_invariants(ast), false});
    variants.push_back({"fold", ir::fold_constants(ast), false});
    variants.push_back({"pad", ir::pad_extents(ast, 4), false});
    int trip = ast.params[0].extents[0];
    variants.push_back({"unroll-full", ir::unroll(ast, "i", trip), true});
    if (trip % 2 == 0) variants.push_back({"unroll-2", ir::unroll(ast, "i", 2), true});

    for (int trial = 0; trial < 100; ++trial) {
      // random but nondegenerate staged inputs
      std::vector<std::vector<Real>> buffers;
      for (const auto& p : ast.params) {
        std::vector<Real> b(p.size());
        for (auto& v : b) v = oracle::uniform(gen, 0.25, 2.0);
        buffers.push_back(std::move(b));
      }
      std::vector<std::vector<Real>> reference = buffers;
      {
        std::vector<Real*> ptrs;
        for (auto& b : reference) ptrs.push_back(b.data());
        ir::interpret(ast, ptrs);
      }
      for (const auto& variant : variants) {
        auto copy = buffers;
        std::vector<Real*> ptrs;
        for (auto& b : copy) ptrs.push_back(b.data());
        ir::interpret(variant.ast, ptrs);
        for (size_t k = 0; k < copy.size() && check.pass; ++k)
          for (size_t e = 0; e < copy[k].size(); ++e) {
            if (variant.bitwise) {
              if (std::memcmp(&copy[k][e], &reference[k][e], sizeof(Real)) != 0) {
                check.expect(false, name + " " + variant.name + " not bitwise equal");
                break;
              }
            } else {
              double scale = std::max(1.0, std::abs(reference[k][e]));
              if (std::abs(copy[k][e] - reference[k][e]) > 1e-12 * scale) {
                check.expect(false, name + " " + variant.name + " exceeds 1e-12");
                break;
              }
            }
          }
      }
      if (!check.pass) return;
    }
  }
  check.note(std::to_string(catalogue.size()) +
             " kernels x {hoist, fold, pad, unroll} x 100 inputs");
}

// --------------------------------------------------------------------------
// criterion 6: local kernels against exact symbolic integration

void local_kernel_oracle(Check& check) {
  auto gen = oracle::rng(7001);
  auto mesh2 = unit_square_mesh(1);
  auto mesh3 = unit_cube_mesh(1);

  struct Case {
    MeshPtr mesh;
    int dim, degree;
  };
  for (const auto& c : {Case{mesh2, 2, 1}, Case{mesh2, 2, 2}, Case{mesh3, 3, 1}}) {
    auto V = fem::make_function_space(c.mesh, c.degree);
    auto coeff = fem::make_function(V);
    const int m = V->element.node_count;
    const int gdim = c.dim;
    std::string tag =
        (gdim == 2 ? "tri P" : "tet P") + std::to_string(c.degree);

    auto run_kernel = [&](const fem::Form& form, const exact::Simplex& s,
                          const std::vector<Real>* coeffs, std::vector<Real>& out, int cols) {
      auto ast = fem::compile_local_kernel(form);
      out.assign(static_cast<size_t>(m) * cols, 0.0);
      std::vector<Real> X;
      for (const auto& v : s.vertices)
        for (int d = 0; d < gdim; ++d) X.push_back(v[d]);
      std::vector<Real*> args{out.data(), X.data()};
      std::vector<Real> C;
      if (coeffs) {
        C = *coeffs;
        args.push_back(C.data());
      }
      ir::interpret(ast, args);
    };

    for (int trial = 0; trial < 10 && check.pass; ++trial) {
      auto s = exact::random_simplex(gdim, gen);
      std::vector<Real> out;

      run_kernel(fem::mass(V, V), s, nullptr, out, m);
      auto M = exact::mass_matrix(s, c.degree);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double scale = std::max(1.0, std::abs(M[i][j]));
          check.expect(std::abs(out[i * m + j] - M[i][j]) <= 1e-12 * scale,
                       "mass " + tag + " off at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
        }

      run_kernel(fem::stiffness(V, V), s, nullptr, out, m);
      auto K = exact::stiffness_matrix(s, c.degree);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double scale = std::max(1.0, std::abs(K[i][j]));
          check.expect(std::abs(out[i * m + j] - K[i][j]) <= 1e-12 * scale,
                       "stiffness " + tag + " off");
        }

      std::vector<Real> nodal(m);
      for (auto& v : nodal) v = oracle::uniform(gen);
      run_kernel(fem::source(V, coeff), s, &nodal, out, 1);
      auto b = exact::source_vector(s, c.degree, nodal);
      for (int i = 0; i < m; ++i) {
        double scale = std::max(1.0, std::abs(b[i]));
        check.expect(std::abs(out[i] - b[i]) <= 1e-12 * scale, "source " + tag + " off");
      }
    }
  }
  check.note("mass/stiffness/source vs exact integration, 10 simplices per element");
}

// --------------------------------------------------------------------------
// criterion 7: mixed split equivalence

void mixed_split(Check& check) {
  for (int n : {1, 2, 4}) {
    auto report = bench::run_mixed_check(n, 1, 12345);
    check.expect(report.max_discrepancy <= 1e-12,
                 "n=" + std::to_string(n) + " discrepancy " + fmt(report.max_discrepancy));
    check.expect(report.spmv_bitwise_equal,
                 "n=" + std::to_string(n) + " block spmv not bitwise equal");
  }
  check.note("blockwise vs monolithic on n in {1,2,4}");
}

// --------------------------------------------------------------------------
// criterion 8: wave stability and energy band

void wave_stability(Check& check) {
  try {
    auto report = bench::run_wave(32, 1e-3, 1.0, 1);
    check.note("completed " + std::to_string(report.sample_times.size()) + " samples");
    size_t start = report.energy.size() / 2;
    double lo = report.energy[start], hi = report.energy[start];
    for (size_t k = start; k < report.energy.size(); ++k) {
      lo = std::min(lo, report.energy[k]);
      hi = std::max(hi, report.energy[k]);
    }
    check.expect(lo > 0.0 && hi / lo < 1.5,
                 "energy band max/min " + fmt(lo > 0 ? hi / lo : 0.0) + " >= 1.5");
    check.note("final-half energy band " + fmt(lo) + " .. " + fmt(hi));
  } catch (const Error& e) {
    check.expect(false, std::string("InstabilityDetected: ") + e.what());
  }
}

// --------------------------------------------------------------------------
// criterion 9: RCM soundness

void rcm_soundness(Check& check) {
  auto mesh = unit_square_mesh(8);
  auto [renumbered, perm] = reorder(*mesh);

  auto solve_poisson = [](const MeshPtr& m) {
    auto V = fem::make_function_space(m, 1);
    auto bc = fem::dirichlet_bc(V, 0.0, {3, 4});
    auto A = fem::assemble_matrix(fem::stiffness(V, V), {bc});
    auto b = fem::assemble_vector(fem::source(V, 1.0));
    bc.apply(*b);
    auto bv = b->view();
    std::vector<Real> x0(A->nrows(), 0.0);
    auto [x, report] = cg_solve(*A, {bv.data(), bv.size()}, x0, 1e-12, 1e-15, 10 * A->nrows(),
                                Preconditioner::Jacobi);
    return std::make_pair(x, report.converged);
  };

  auto [x_orig, ok1] = solve_poisson(mesh);
  auto [x_new, ok2] = solve_poisson(renumbered);
  check.expect(ok1 && ok2, "solves did not converge");
  double max_diff = 0.0;
  for (size_t v = 0; v < perm.size(); ++v)
    max_diff = std::max(max_diff, std::abs(x_new[v] - x_orig[perm[v]]));
  check.expect(max_diff <= 1e-12, "solutions differ by " + fmt(max_diff) + " after permutation");

  // strip mesh: bandwidth must not increase
  const int len = 16;
  std::ostringstream text;
  text << "2 " << 2 * (len + 1) << " " << 2 * len << "\n";
  for (int i = 0; i <= len; ++i) text << i << " 0\n";
  for (int i = 0; i <= len; ++i) text << i << " 1\n";
  for (int i = 0; i < len; ++i) {
    text << i << " " << (i + 1) << " " << (len + 2 + i) << "\n";
    text << i << " " << (len + 2 + i) << " " << (len + 1 + i) << "\n";
  }
  std::istringstream in(text.str());
  auto strip = read_mesh_stream(in);
  auto [reordered_strip, strip_perm] = reorder(*strip);

  auto csr_bandwidth = [](const MeshPtr& m) {
    auto V = fem::make_function_space(m, 1);
    auto sp = build_sparsity(V->cell_node_map, V->cell_node_map);
    int bw = 0;
    for (int r = 0; r < sp->nrows(); ++r)
      for (long k = sp->row_offsets()[r]; k < sp->row_offsets()[r + 1]; ++k)
        bw = std::max(bw, std::abs(sp->col_indices()[k] - r));
    return bw;
  };
  int before = csr_bandwidth(strip);
  int after = csr_bandwidth(reordered_strip);
  check.expect(after <= before, "bandwidth grew from " + std::to_string(before) + " to " +
                                    std::to_string(after));
  check.note("solution diff " + fmt(max_diff) + ", strip bandwidth " + std::to_string(before) +
             " -> " + std::to_string(after));
}

// --------------------------------------------------------------------------
// criterion 10: boundary values are carried bit-exactly

void boundary_conditions(Check& check) {
  for (Real value : {0.0, 2.5}) {
    auto mesh = unit_square_mesh(8);
    auto V = fem::make_function_space(mesh, 1);
    auto bc = fem::dirichlet_bc(V, value, {3, 4});
    auto A = fem::assemble_matrix(fem::stiffness(V, V), {bc});
    auto b = fem::assemble_vector(fem::source(V, 1.0));
    bc.apply(*b);

    std::vector<Real> x0(A->nrows(), 0.0);
    for (int node : bc.nodes) x0[node] = value;
    auto bv = b->view();
    auto [x, report] = cg_solve(*A, {bv.data(), bv.size()}, x0, 1e-10, 1e-15, 10 * A->nrows(),
                                Preconditioner::Jacobi);
    check.expect(report.converged, "solve did not converge");
    for (int node : bc.nodes) {
      if (std::memcmp(&x[node], &value, sizeof(Real)) != 0) {
        check.expect(false, "node " + std::to_string(node) + " lost its prescribed value");
        break;
      }
    }
  }
  check.note("prescribed values bit-exact after solve for 0.0 and 2.5");
}

} // namespace

int main() {
  struct Criterion {
    int id;
    std::string label;
    std::function<void(Check&)> run;
    double budget_seconds;
  };
  std::vector<Criterion> criteria{
      {1, "Poisson 2D convergence (P1 rate in [1.9,2.1], P2 in [2.9,3.1])",
       poisson_2d_convergence, 60.0},
      {2, "Poisson 3D analytic solution (factor in [3.2,4.8], CG+Jacobi rtol 1e-8)", poisson_3d,
       120.0},
      {3, "Parloop determinism (threads {2,4,8} bitwise equal to serial)", parloop_determinism,
       30.0},
      {4, "Coloring validity and determinism on unit_square_mesh(32)", coloring_validity, 10.0},
      {5, "Kernel-optimizer equivalence (hoist/fold/pad 1e-12, unroll bitwise)",
       optimizer_equivalence, 60.0},
      {6, "Local-kernel oracle (exact symbolic integration, 1e-12)", local_kernel_oracle, 10.0},
      {7, "Mixed split equivalence (1e-12 / bitwise spmv)", mixed_split, 10.0},
      {8, "Wave stability (no blow-up; energy band < 1.5 over final half)", wave_stability,
       120.0},
      {9, "RCM soundness (permutation-equal solve, strip bandwidth)", rcm_soundness, 10.0},
      {10, "Boundary conditions (prescribed values bit-exact after solve)", boundary_conditions,
       10.0},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(elapsed < criterion.budget_seconds,
                 "runtime " + fmt(elapsed) + "s over budget " + fmt(criterion.budget_seconds) +
                     "s");

    std::printf("[%s] %2d: %s (%s) [%.1fs]\n", check.pass ? "PASS" : "FAIL", criterion.id,
                criterion.label.c_str(), check.detail.str().c_str(), elapsed);
    std::fflush(stdout);
    if (!check.pass) ++failures;
  }
  if (failures > 0) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
