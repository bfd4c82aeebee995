#include "doctest.h"

#include <stdexcept>

#include "uclab/experiments.hpp"
#include "uclab/verifiers.hpp"

#include <cmath>

using namespace uclab;

namespace {

SpdeProblem heat_problem(int n = 128, double width = 0.5, double amp = 1.0) {
  SpdeProblem p;
  p.grid = make_grid(1, 16.0, n);
  p.coeffs = CoefficientField::zero();
  p.T = 0.5;
  p.steps = 128;
  p.phi0 = gaussian_field(p.grid, {0.0, 0.0}, width, amp);
  return p;
}

} // namespace

TEST_CASE("energy: heat flow contracts, zero datum is vacuous") {
  SpdeProblem p = heat_problem();
  const InequalityReport rep = check_energy(p, EnsembleSpec{1, 0}, 0.02);
  CHECK(rep.pass);
  CHECK(rep.lhs < rep.rhs); // strict decay for a nonconstant datum

  for (auto& v : p.phi0.v) v = 0.0;
  const InequalityReport zero = check_energy(p, EnsembleSpec{1, 0}, 0.02);
  CHECK(zero.pass);
  CHECK(zero.vacuous);
}

TEST_CASE("energy: constant-coefficient value matched within tolerance") {
  SpdeProblem p = heat_problem();
  p.coeffs = CoefficientField::constants(0.5, 0.3);
  p.T = 0.25;
  p.steps = 128;
  const InequalityReport rep = check_energy(p, EnsembleSpec{500, 4}, 0.02);
  CHECK(rep.pass);
  REQUIRE(rep.details.contains("exact_pass"));
  CHECK(rep.details["exact_pass"].get<bool>());
}

TEST_CASE("energy bound for random bounded coefficient fields") {
  for (std::uint64_t seed : {1ull, 2ull}) {
    SpdeProblem p = heat_problem();
    p.coeffs = random_trig_coefficients(seed, 1.0, 0.5, p.grid, p.T);
    const InequalityReport rep = check_energy(p, EnsembleSpec{200, seed}, 0.02);
    CHECK(rep.pass);
  }
}

TEST_CASE("caccioppoli: empirical constant recorded, scale invariant") {
  SpdeProblem p = heat_problem();
  CaccioppoliGeometry geom;
  geom.r = 1.0;
  geom.R = 2.0;
  geom.tau1 = p.T / 4.0;
  geom.tau2 = p.T / 2.0;
  const InequalityReport rep = check_caccioppoli(p, EnsembleSpec{1, 0}, geom);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio > 0.0);
  CHECK(rep.pass);

  SpdeProblem scaled = p;
  for (auto& v : scaled.phi0.v) v *= 7.0;
  const InequalityReport rep7 = check_caccioppoli(scaled, EnsembleSpec{1, 0}, geom);
  CHECK(std::abs(rep7.ratio - rep.ratio) <= 1e-10 * rep.ratio);

  SpdeProblem zero = p;
  for (auto& v : zero.phi0.v) v = 0.0;
  const InequalityReport repz = check_caccioppoli(zero, EnsembleSpec{1, 0}, geom);
  CHECK(repz.vacuous);
  CHECK(repz.pass);

  CaccioppoliGeometry bad = geom;
  bad.tau1 = geom.tau2;
  CHECK_THROWS_AS(check_caccioppoli(p, EnsembleSpec{1, 0}, bad), std::invalid_argument);
}

TEST_CASE("gradient estimate: stable under grid refinement") {
  GradientGeometry geom;
  geom.R = 1.0;
  geom.tau = 0.1;
  SpdeProblem coarse = heat_problem(128);
  SpdeProblem fine = heat_problem(256);
  const InequalityReport rc = check_gradient_estimate(coarse, EnsembleSpec{1, 0}, geom);
  const InequalityReport rf = check_gradient_estimate(fine, EnsembleSpec{1, 0}, geom);
  CHECK(std::isfinite(rc.ratio));
  CHECK(rc.ratio == doctest::Approx(rf.ratio).epsilon(0.2));

  SpdeProblem scaled = coarse;
  for (auto& v : scaled.phi0.v) v *= 7.0;
  const InequalityReport rs = check_gradient_estimate(scaled, EnsembleSpec{1, 0}, geom);
  CHECK(std::abs(rs.ratio - rc.ratio) <= 1e-10 * rc.ratio);

  GradientGeometry bad = geom;
  bad.tau = coarse.T;
  CHECK_THROWS_AS(check_gradient_estimate(coarse, EnsembleSpec{1, 0}, bad),
                  std::invalid_argument);

  SpdeProblem zero = coarse;
  for (auto& v : zero.phi0.v) v = 0.0;
  const InequalityReport repz = check_gradient_estimate(zero, EnsembleSpec{1, 0}, geom);
  CHECK(repz.vacuous);
  CHECK(repz.pass);
}

TEST_CASE("c1 calibration returns a usable constant") {
  const Grid g = make_grid(1, 16.0, 128);
  const double c1 = calibrate_c1(g, 0.5, 64);
  CHECK(c1 >= 1.25);
  CHECK(c1 < 1e3);
}

TEST_CASE("h0 check on pure heat") {
  SpdeProblem p = heat_problem(256, 0.4);
  H0Geometry geom;
  geom.r = 0.5;
  geom.R = 1.0;
  geom.delta = 1.0;
  geom.tau1 = p.T / 4.0;
  geom.tau2 = p.T / 2.0;
  const H0CheckResult res = check_h0(p, EnsembleSpec{1, 0}, geom, 2.0, 0.05);
  CHECK(res.h0.guard_ok);
  CHECK(res.h0.property_i_ok);
  CHECK(res.h0.h0_below_T);
  CHECK(res.window_nodes >= 3);
  CHECK(res.property_ii.pass);
  CHECK(res.steps_used >= p.steps);

  H0Geometry bad = geom;
  bad.r = 0.6; // violates 2r <= R
  CHECK_THROWS_AS(check_h0(p, EnsembleSpec{1, 0}, bad, 2.0, 0.05), std::invalid_argument);

  SpdeProblem zero = p;
  for (auto& v : zero.phi0.v) v = 0.0;
  const H0CheckResult skipped = check_h0(zero, EnsembleSpec{1, 0}, geom, 2.0, 0.05);
  CHECK(skipped.skipped);
  CHECK(skipped.property_ii.vacuous);
  CHECK(skipped.property_ii.pass);
}

TEST_CASE("two-ball: ring data give an exponent in (0,1); scaling leaves it unchanged") {
  const Grid g = make_grid(1, 32.0, 512);
  TwoBallGeometry geom;
  geom.r = 0.5;
  geom.R = 1.0;
  geom.delta = 1.0;
  const double T = 0.5;
  const int steps = 128;

  ExperimentConfig cfg = parse_config_text(
      "[experiment]\nkind = two-ball\n[data]\nkind = ring\ncount = 8\nseed = 5\n"
      "radius_min = 1.0\nradius_max = 2.0\nwidth_min = 0.2\nwidth_max = 0.5\n");
  const std::vector<Field> data = make_data(cfg, g);
  const InequalityReport rep =
      check_two_ball(g, CoefficientField::zero(), T, steps, geom, data, EnsembleSpec{1, 0}, 2.0);
  REQUIRE(rep.exponent.has_value());
  CHECK(*rep.exponent > 0.0);
  CHECK(*rep.exponent < 1.0);
  CHECK(rep.details["violation_flags"].get<int>() == 0);
  CHECK(rep.pass);

  std::vector<Field> scaled = data;
  for (auto& f : scaled)
    for (auto& v : f.v) v *= 7.0;
  const InequalityReport rep7 = check_two_ball(g, CoefficientField::zero(), T, steps, geom,
                                               scaled, EnsembleSpec{1, 0}, 2.0);
  CHECK(std::abs(*rep7.exponent - *rep.exponent) <= 1e-10 * std::abs(*rep.exponent));

  // zero data: vacuous pass, no flags
  std::vector<Field> zero{Field(g)};
  const InequalityReport repz = check_two_ball(g, CoefficientField::zero(), T, steps, geom,
                                               zero, EnsembleSpec{1, 0}, 2.0);
  CHECK(repz.vacuous);
  CHECK(repz.pass);
}

TEST_CASE("two-ball: centered bumps still fit an exponent in (0,1)") {
  // Width variation alone moves ln(A/C) and ln(B'/C) together, so the
  // ensemble slope lands in (0,1) even though each per-datum equation
  // solution is nonpositive for data centered at x0 (the big ball then holds
  // less than twice the small-ball mass).
  const Grid g = make_grid(1, 32.0, 512);
  TwoBallGeometry geom{{0.0, 0.0}, 0.5, 1.0, 1.0};
  std::vector<Field> data;
  const Philox gen(9);
  for (int j = 0; j < 12; ++j) {
    const auto u = gen.uniform2(j, 0);
    data.push_back(gaussian_field(g, {0.0, 0.0}, 0.15 + 0.6 * u[0], 0.5 + u[1]));
  }
  const InequalityReport rep = check_two_ball(g, CoefficientField::zero(), 0.5, 128, geom, data,
                                              EnsembleSpec{1, 0}, 2.0);
  REQUIRE(rep.exponent.has_value());
  CHECK(*rep.exponent > 0.0);
  CHECK(*rep.exponent < 1.0);
  for (const auto& row : rep.details["per_datum"])
    if (row.contains("gamma_single")) CHECK(row["gamma_single"].get<double>() <= 0.0);
}

TEST_CASE("interpolation: full observation, fitted exponent, zero data") {
  const Grid g = make_grid(1, 16.0, 256);
  const Tiling tiling = cube_tiling(g, 2.0);
  const double T = 0.5;
  const int steps = 128;

  SUBCASE("r = R limit observes everything") {
    std::vector<Field> data{gaussian_field(g, {0.3, 0.0}, 0.5)};
    const InequalityReport rep = check_global_interpolation(g, CoefficientField::zero(), T,
                                                            steps, tiling, tiling.half_side,
                                                            data, EnsembleSpec{1, 0});
    CHECK(rep.pass);
    CHECK(rep.ratio == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("random bumps give theta in (0,1) with a finite prefactor") {
    ExperimentConfig cfg = parse_config_text(
        "[experiment]\nkind = interpolation\n[data]\nkind = bumps\ncount = 10\nseed = 11\n"
        "spread = 6\nwidth_min = 0.25\nwidth_max = 0.7\n");
    const std::vector<Field> data = make_data(cfg, g);
    const InequalityReport rep = check_global_interpolation(
        g, CoefficientField::zero(), T, steps, tiling, 1.0, data, EnsembleSpec{1, 0});
    REQUIRE(rep.exponent.has_value());
    CHECK(*rep.exponent > 0.0);
    CHECK(*rep.exponent < 1.0);
    CHECK(std::isfinite(rep.details["log_prefactor"].get<double>()));
    CHECK(rep.pass);
  }

  SUBCASE("zero data are vacuous") {
    std::vector<Field> zero{Field(g)};
    const InequalityReport rep = check_global_interpolation(
        g, CoefficientField::zero(), T, steps, tiling, 1.0, zero, EnsembleSpec{1, 0});
    CHECK(rep.vacuous);
    CHECK(rep.pass);
  }
}

TEST_CASE("interpolation and two-ball run in two dimensions") {
  const Grid g = make_grid(2, 16.0, 64);
  const double T = 0.4;
  const int steps = 64;

  const Tiling tiling = cube_tiling(g, 4.0); // 2x2 cubes
  ExperimentConfig cfg = parse_config_text(
      "[experiment]\nkind = interpolation\n[data]\nkind = bumps\ncount = 8\nseed = 3\n"
      "spread = 6\nwidth_min = 0.4\nwidth_max = 1.0\n");
  const std::vector<Field> data = make_data(cfg, g);
  const InequalityReport rep = check_global_interpolation(
      g, CoefficientField::zero(), T, steps, tiling, 2.0, data, EnsembleSpec{1, 0});
  REQUIRE(rep.exponent.has_value());
  CHECK(*rep.exponent > 0.0);
  CHECK(*rep.exponent < 1.0);

  TwoBallGeometry geom;
  geom.r = 0.5;
  geom.R = 1.0;
  geom.delta = 0.5; // Q_{2R0} half-side 4 < L/2
  ExperimentConfig cfg2 = parse_config_text(
      "[experiment]\nkind = two-ball\n[data]\nkind = ring\ncount = 6\nseed = 5\n"
      "radius_min = 0.8\nradius_max = 1.8\nwidth_min = 0.3\nwidth_max = 0.6\n");
  const std::vector<Field> ring = make_data(cfg2, g);
  const InequalityReport tb = check_two_ball(g, CoefficientField::zero(), T, steps, geom, ring,
                                             EnsembleSpec{1, 0}, 2.0);
  REQUIRE(tb.exponent.has_value());
  CHECK(*tb.exponent > 0.0);
  CHECK(*tb.exponent < 1.0);
  CHECK(tb.details["violation_flags"].get<int>() == 0);
}
