#include "doctest.h"

#include <stdexcept>

#include "uclab/experiments.hpp"
#include "uclab/frequency.hpp"

#include <cmath>

using namespace uclab;

namespace {

FrequencyProblem base_problem(double b, double a = 0.0) {
  FrequencyProblem p;
  p.grid = make_grid(1, 16.0, 256);
  p.coeffs = CoefficientField::constants(a, b);
  p.T = 0.25;
  p.steps = 64;
  p.phi0 = gaussian_field(p.grid, {0.0, 0.0}, 0.4);
  p.lambda = 0.05;
  p.center = {0.0, 0.0};
  p.plateau_radius = 2.5; // delta = 1, R = 1
  p.support_radius = 3.0;
  return p;
}

} // namespace

TEST_CASE("frequency functionals on synthetic fields") {
  const Grid g = make_grid(1, 16.0, 256);
  const Mask ball = ball_mask(g, {0.0, 0.0}, 3.0);
  WeightParams wp{0.5, {0.0, 0.0}, 1.0, 1};
  const Field G = gaussian_weight_field(g, 0.3, wp);

  SUBCASE("zero field: H = D = 0, N undefined") {
    Field u(g);
    const FrequencyPoint fp = frequency_from_fields(u, ball, G);
    CHECK(fp.H == 0.0);
    CHECK(fp.D == 0.0);
    CHECK_FALSE(fp.N_defined);
  }

  SUBCASE("constant field on the ball: D = 0, N = 0, H = int G") {
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u.v[i] = ball.in[i] ? 1.0 : 0.0;
    const FrequencyPoint fp = frequency_from_fields(u, ball, G);
    CHECK(fp.D == 0.0);
    CHECK(fp.N_defined);
    CHECK(fp.N == 0.0);
    CHECK(fp.H == doctest::Approx(integrate(G, ball)).epsilon(1e-12));
  }
}

TEST_CASE("trace basics: nonnegativity and zero data") {
  FrequencyProblem p = base_problem(0.3, 0.5);
  p.steps = 32;

  SUBCASE("zero initial datum gives an all-zero trace") {
    for (auto& v : p.phi0.v) v = 0.0;
    const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{3, 5});
    for (int k = 0; k < tr.nodes(); ++k) {
      CHECK(tr.H[k] == 0.0);
      CHECK(tr.D[k] == 0.0);
      CHECK_FALSE(tr.N_defined[k]);
    }
    const DhIdentityReport dh = check_dh_identity(tr, {});
    CHECK(dh.max_abs_residual == 0.0);
    CHECK(dh.pass);
  }

  SUBCASE("H and D stay nonnegative with noise") {
    const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{8, 5});
    for (int k = 0; k < tr.nodes(); ++k) {
      CHECK(tr.H[k] >= 0.0);
      CHECK(tr.D[k] >= 0.0);
    }
  }
}

TEST_CASE("frequency is invariant under scaling the datum (common paths)") {
  FrequencyProblem p = base_problem(0.4, 0.3);
  p.steps = 32;
  const EnsembleSpec spec{16, 9};
  const FrequencyTrace base = frequency_trace(p, spec);
  FrequencyProblem scaled = p;
  for (auto& v : scaled.phi0.v) v *= 7.0;
  const FrequencyTrace big = frequency_trace(scaled, spec);
  for (int k = 0; k < base.nodes(); ++k) {
    if (!base.N_defined[k]) continue;
    CHECK(big.N_defined[k]);
    CHECK(std::abs(big.N[k] - base.N[k]) <= 1e-10 * std::max(1.0, std::abs(base.N[k])));
    CHECK(big.H[k] == doctest::Approx(49.0 * base.H[k]).epsilon(1e-12));
  }
}

TEST_CASE("dH/dt identity: deterministic residual halves with the step") {
  // b = 0, a = 0, datum inside the plateau: residual is pure discretization.
  FrequencyProblem coarse = base_problem(0.0);
  const EnsembleSpec one{1, 0};
  FrequencyProblem fine = coarse;
  fine.steps = 2 * coarse.steps;
  const DhIdentityReport dc = check_dh_identity(frequency_trace(coarse, one), {});
  const DhIdentityReport df = check_dh_identity(frequency_trace(fine, one), {});
  const double ratio = dc.max_abs_residual / df.max_abs_residual;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 3.0);
}

TEST_CASE("dH/dt identity within tolerance, stochastic and oracle-substituted") {
  FrequencyProblem p = base_problem(0.3, 0.5);
  p.steps = 48;
  const FrequencyAllowances allow = frequency_allowances(p);

  SUBCASE("solver trajectories, pointwise band") {
    // 3 SE per node over ~46 nodes: a couple of chance exceedances allowed.
    const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{160, 21});
    const DhIdentityReport dh = check_dh_identity(tr, allow.dh);
    CHECK(dh.violations <= 2);
  }
  SUBCASE("solver vs oracle-substituted reference with common paths") {
    const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{160, 21});
    const FrequencyTrace ref = frequency_trace(p, EnsembleSpec{160, 21}, true);
    const DhIdentityReport dh = check_dh_identity_vs_reference(tr, ref, allow.dh);
    CHECK(dh.pass);
  }
}

TEST_CASE("dH/dt identity needs three nodes") {
  FrequencyProblem p = base_problem(0.0);
  p.steps = 1;
  const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{1, 0});
  CHECK_THROWS_AS(check_dh_identity(tr, {}), std::invalid_argument);
}

TEST_CASE("2-D trace: identity and monotonicity hold on a small grid") {
  FrequencyProblem p;
  p.grid = make_grid(2, 12.0, 48);
  p.coeffs = CoefficientField::zero();
  p.T = 0.2;
  p.steps = 32;
  p.phi0 = field_from_function(p.grid, [](std::array<double, 2> x) {
    const double d1 = (x[0] - 0.5) * (x[0] - 0.5) + x[1] * x[1];
    const double d2 = (x[0] + 0.7) * (x[0] + 0.7) + (x[1] - 0.4) * (x[1] - 0.4);
    return std::exp(-d1 / 0.3) + 0.7 * std::exp(-d2 / 0.2);
  });
  p.lambda = 0.05;
  p.center = {0.0, 0.0};
  p.plateau_radius = 2.5;
  p.support_radius = 3.0;
  const FrequencyAllowances allow = frequency_allowances(p);
  const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{1, 0});
  CHECK(check_dh_identity(tr, allow.dh).pass);
  const MonotonicityReport mon = check_monotonicity(tr, allow.margin, allow.seq);
  CHECK(mon.violations == 0);
  CHECK(mon.seq_violations == 0);
}

TEST_CASE("oracle trajectories require constant coefficients") {
  FrequencyProblem p = base_problem(0.0);
  p.coeffs = random_trig_coefficients(1, 0.5, 0.2, p.grid, p.T);
  p.steps = 8;
  CHECK_THROWS_AS(frequency_trace(p, EnsembleSpec{1, 0}, true), std::invalid_argument);
}

TEST_CASE("monotonicity: pure heat keeps the weighted frequency nonincreasing") {
  FrequencyProblem p = base_problem(0.0);
  // Two-bump datum inside the plateau; strictly inside the inequality.
  p.phi0 = field_from_function(p.grid, [&](std::array<double, 2> x) {
    const double d1 = x[0] - 0.6, d2 = x[0] + 0.9;
    return std::exp(-d1 * d1 / 0.18) + 0.6 * std::exp(-d2 * d2 / 0.08);
  });
  const FrequencyAllowances allow = frequency_allowances(p);
  const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{1, 0});
  const MonotonicityReport mon = check_monotonicity(tr, allow.margin, allow.seq);
  CHECK(mon.pass);
  CHECK(mon.seq_violations == 0);
  CHECK(mon.violations == 0);
}

TEST_CASE("monotonicity margins under generic bounded coefficients") {
  for (std::uint64_t seed : {3ull, 11ull}) {
    FrequencyProblem p = base_problem(0.0);
    p.coeffs = random_trig_coefficients(seed, 1.0, 0.4, p.grid, p.T);
    p.steps = 48;
    const FrequencyAllowances allow = frequency_allowances(p);
    const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{120, seed});
    const MonotonicityReport mon = check_monotonicity(tr, allow.margin, allow.seq);
    CHECK(mon.violations == 0);
  }
}

TEST_CASE("monotonicity refuses undefined frequency") {
  FrequencyProblem p = base_problem(0.0);
  for (auto& v : p.phi0.v) v = 0.0;
  const FrequencyTrace tr = frequency_trace(p, EnsembleSpec{1, 0});
  CHECK_THROWS_AS(check_monotonicity(tr, {}, {}), std::runtime_error);
}
