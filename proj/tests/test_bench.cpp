#include <catch2/catch_amalgamated.hpp>

#include "loam/bench.hpp"
#include "oracles.hpp"

using namespace loam;

TEST_CASE("poisson reports are deterministic and carry rates", "[bench]") {
  auto first = bench::run_poisson(2, 1, {4, 8}, 1);
  auto second = bench::run_poisson(2, 1, {4, 8}, 1);
  REQUIRE(first.size() == 2);
  CHECK(first[0].l2_error == second[0].l2_error);
  CHECK(first[1].l2_error == second[1].l2_error);
  CHECK(first[1].iterations == second[1].iterations);

  // rate = log(e_k / e_{k+1}) / log(h_k / h_{k+1}) with h = 1/n
  REQUIRE(first[1].rate.has_value());
  double expected = std::log(first[0].l2_error / first[1].l2_error) / std::log(2.0);
  CHECK(std::abs(*first[1].rate - expected) <= 1e-15);
  CHECK_FALSE(first[0].rate.has_value());

  // thread count does not change any reported value
  auto threaded = bench::run_poisson(2, 1, {4, 8}, 4);
  CHECK(threaded[0].l2_error == first[0].l2_error);
  CHECK(threaded[1].l2_error == first[1].l2_error);
  CHECK(threaded[1].iterations == first[1].iterations);

  auto j = first[1].to_json();
  CHECK(j["case"] == "poisson2d");
  CHECK(j["n"] == 8);
  CHECK(j.contains("l2_error"));
  CHECK(j["times"].contains("solve"));
}

TEST_CASE("wave scheme keeps zero fields exactly zero", "[bench]") {
  // zero initial data and zero boundary forcing: linearity pins every step at 0
  auto mesh = unit_square_mesh(8);
  auto V = fem::make_function_space(mesh, 1);
  auto p = fem::make_function(V, "p");
  auto phi = fem::make_function(V, "phi");
  auto bc = fem::dirichlet_bc(V, 0.0, {1});
  const Real dt = 1e-3;
  auto lumped = fem::lumped_mass(V);
  auto p_constant = make_dat(V->node_set, 1);
  fem::pointwise(p_constant, fem::PwOp::Assign, fem::pw(dt) / fem::pw(lumped));

  for (int step = 0; step < 50; ++step) {
    fem::pointwise(phi, fem::PwOp::Sub, fem::pw(dt / 2) * fem::pw(p));
    auto b = fem::assemble_vector(fem::stiffness_action(V, phi));
    fem::pointwise(p, fem::PwOp::Add, fem::pw(b) * fem::pw(p_constant));
    bc.apply(*p->dat);
    fem::pointwise(phi, fem::PwOp::Sub, fem::pw(dt / 2) * fem::pw(p));
  }
  for (Real v : p->dat->view()) REQUIRE(v == 0.0);
  for (Real v : phi->dat->view()) REQUIRE(v == 0.0);
}

TEST_CASE("short forced wave runs record samples and stay stable", "[bench]") {
  auto report = bench::run_wave(8, 1e-3, 0.3, 2);
  CHECK(report.case_id == "wave");
  CHECK(report.sample_times.size() == 3); // every 100 steps
  CHECK(report.norm_p.size() == report.sample_times.size());
  CHECK(report.energy.size() == report.sample_times.size());
  for (double e : report.energy) CHECK(e >= 0.0);

  // halving dt leaves the energy level at matching times within a factor 2
  auto fine = bench::run_wave(8, 5e-4, 0.3, 1);
  REQUIRE(fine.sample_times.size() == 6);
  for (size_t k = 0; k < report.energy.size(); ++k) {
    double coarse_e = report.energy[k];
    double fine_e = fine.energy[2 * k + 1]; // same physical time
    if (coarse_e > 0)
      CHECK(fine_e / coarse_e < 2.0);
    if (fine_e > 0)
      CHECK(coarse_e / fine_e < 2.0);
  }
}

TEST_CASE("mixed check reports tiny discrepancy and bitwise spmv", "[bench]") {
  for (int n : {1, 2}) {
    auto report = bench::run_mixed_check(n, 1, 999);
    CHECK(report.max_discrepancy <= 1e-12);
    CHECK(report.spmv_bitwise_equal);
    CHECK(bench::mixed_bands_ok(report));
  }
}

TEST_CASE("custom kernel case honors the seed and stays in band", "[bench]") {
  auto a = bench::run_custom_kernel_check(8, 7);
  auto b = bench::run_custom_kernel_check(8, 7);
  auto c = bench::run_custom_kernel_check(8, 8);
  CHECK(a.min_value == b.min_value);
  CHECK(a.max_value == b.max_value);
  CHECK(a.min_value != c.min_value); // different seed, different field
  CHECK(bench::custom_bands_ok(a));
  CHECK(bench::custom_bands_ok(c));
}
