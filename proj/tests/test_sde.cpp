#include "doctest.h"

#include <stdexcept>

#include "uclab/ensemble.hpp"
#include "uclab/sde.hpp"

#include <cmath>
#include <memory>

using namespace uclab;

namespace {

Field gaussian_bump(const Grid& g, double center, double width) {
  return field_from_function(g, [&](std::array<double, 2> x) {
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double d = g.torus_delta(x[a], a == 0 ? center : 0.0);
      s += d * d;
    }
    return std::exp(-s / (2.0 * width * width));
  });
}

double rel_l2_diff(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.v[i] - b.v[i];
    num += d * d;
    den += b.v[i] * b.v[i];
  }
  return std::sqrt(num / den);
}

double l2_norm2(const Grid& g, const std::vector<double>& v) {
  Field f(g, v);
  Field sq(g);
  for (std::size_t i = 0; i < v.size(); ++i) sq.v[i] = v[i] * v[i];
  return integrate(sq);
}

} // namespace

TEST_CASE("step: zero field, eigenfunction, homogeneity") {
  const Grid g = make_grid(1, 8.0, 256);
  auto table = std::make_shared<CoefficientTable>(tabulate(CoefficientField::zero(), g, 1.0, 8));
  ForwardSolver solver(g, table);
  const double dt = 0.125;

  std::vector<double> zeros(g.node_count(), 0.0);
  solver.step(zeros, 0, dt, 0.3);
  for (double v : zeros) CHECK(v == 0.0);

  Field mode = field_from_function(
      g, [&](std::array<double, 2> x) { return std::cos(2.0 * M_PI * x[0] / g.extent); });
  const double mu =
      (2.0 / (g.spacing * g.spacing)) * (1.0 - std::cos(2.0 * M_PI * g.spacing / g.extent));
  std::vector<double> stepped = mode.v;
  solver.step(stepped, 0, dt, 0.0);
  for (std::size_t i = 0; i < stepped.size(); ++i)
    CHECK(stepped[i] == doctest::Approx(mode.v[i] / (1.0 + dt * mu)).epsilon(1e-10));

  // step(c phi) = c step(phi) exactly up to the final rounding
  std::vector<double> once = mode.v;
  solver.step(once, 0, dt, 0.17);
  std::vector<double> scaled = mode.v;
  for (double& v : scaled) v *= -4.0;
  solver.step(scaled, 0, dt, 0.17);
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(scaled[i] == doctest::Approx(-4.0 * once[i]).epsilon(1e-13));
}

TEST_CASE("solve_forward against deterministic references") {
  const Grid g = make_grid(1, 16.0, 256);
  const double T = 0.5;
  const int K = 512;
  const Field phi0 = gaussian_bump(g, 0.0, 0.5);
  Spectral ws(g);

  SUBCASE("pure heat matches the semigroup within 1%") {
    auto table = std::make_shared<CoefficientTable>(tabulate(CoefficientField::zero(), g, T, K));
    ForwardSolver solver(g, table);
    const auto path = sample_brownian(T, K, 1);
    const Trajectory traj = solver.solve(phi0, path);
    const Field ref = ws.semigroup(phi0, T);
    CHECK(rel_l2_diff(traj.field(K), ref) < 0.01);
  }

  SUBCASE("constant a = 1 applies an integrating factor") {
    auto table =
        std::make_shared<CoefficientTable>(tabulate(CoefficientField::constants(1.0, 0.0), g, T, K));
    ForwardSolver solver(g, table);
    const auto path = sample_brownian(T, K, 1);
    const Trajectory traj = solver.solve(phi0, path);
    Field ref = ws.semigroup(phi0, T);
    for (double& v : ref.v) v *= std::exp(T);
    CHECK(rel_l2_diff(traj.field(K), ref) < 0.01);
  }

  SUBCASE("constant (a, b) matches the pathwise closed form within 2%") {
    const double a = 0.5, b = 0.3;
    auto table =
        std::make_shared<CoefficientTable>(tabulate(CoefficientField::constants(a, b), g, T, K));
    ForwardSolver solver(g, table);
    for (std::uint64_t stream = 0; stream < 4; ++stream) {
      const auto path = sample_brownian(T, K, 7, stream);
      const Trajectory traj = solver.solve(phi0, path);
      const Field ref = exact_constant_coeff_solution(phi0, a, b, path, K, ws);
      CHECK(rel_l2_diff(traj.field(K), ref) < 0.02);
    }
  }
}

TEST_CASE("exact constant-coefficient solution endpoints") {
  const Grid g = make_grid(1, 16.0, 128);
  const Field phi0 = gaussian_bump(g, 0.3, 0.4);
  Spectral ws(g);
  const auto path = sample_brownian(1.0, 64, 9);

  const Field at0 = exact_constant_coeff_solution(phi0, 1.2, 0.7, path, 0, ws);
  for (std::size_t i = 0; i < at0.size(); ++i) CHECK(at0.v[i] == doctest::Approx(phi0.v[i]));

  const Field heat = exact_constant_coeff_solution(phi0, 0.0, 0.0, path, 64, ws);
  const Field ref = ws.semigroup(phi0, 1.0);
  for (std::size_t i = 0; i < heat.size(); ++i) CHECK(heat.v[i] == doctest::Approx(ref.v[i]));

  const Field grown = exact_constant_coeff_solution(phi0, 2.0, 0.0, path, 64, ws);
  for (std::size_t i = 0; i < grown.size(); ++i)
    CHECK(grown.v[i] == doctest::Approx(std::exp(2.0) * ref.v[i]).epsilon(1e-12));

  CHECK_THROWS_AS(exact_constant_coeff_solution(phi0, 0.0, 0.0, path, 65, ws),
                  std::invalid_argument);
}

TEST_CASE("adjoint flow reduces to forward flow with negated coefficients") {
  const Grid g = make_grid(1, 16.0, 128);
  const double T = 0.25;
  const int K = 128;
  const Field y0 = gaussian_bump(g, -0.5, 0.6);
  Spectral ws(g);

  const CoefficientField fwd = CoefficientField::constants(0.8, 0.4);
  const CoefficientField adj = adjoint_coefficients(fwd);
  CHECK(adj.a0 == -0.8);
  CHECK(adj.b0 == -0.4);

  auto table = std::make_shared<CoefficientTable>(tabulate(adj, g, T, K));
  ForwardSolver solver(g, table);
  const auto path = sample_brownian(T, K, 21);
  const Trajectory traj = solver.solve(y0, path);
  const Field ref = exact_constant_coeff_solution(y0, -0.8, -0.4, path, K, ws);
  CHECK(rel_l2_diff(traj.field(K), ref) < 0.02);

  // zero datum stays zero
  Field zero(g);
  const Trajectory zt = solver.solve(zero, path);
  for (double v : zt.fields.back()) CHECK(v == 0.0);
}

TEST_CASE("pathwise linearity of the scheme") {
  const Grid g = make_grid(1, 16.0, 128);
  const double T = 0.25;
  const int K = 64;
  const Field phi0 = gaussian_bump(g, 0.0, 0.5);
  auto table =
      std::make_shared<CoefficientTable>(tabulate(CoefficientField::constants(0.4, 0.5), g, T, K));
  ForwardSolver solver(g, table);
  const auto path = sample_brownian(T, K, 3);

  const Trajectory base = solver.solve(phi0, path);
  Field scaled0 = phi0;
  for (double& v : scaled0.v) v *= 7.0;
  const Trajectory scaled = solver.solve(scaled0, path);
  // Relative to the field scale; pointwise-relative is meaningless on the
  // underflowing Gaussian tails.
  for (int k = 0; k <= K; ++k) {
    double scale = 0.0;
    for (double v : scaled.fields[k]) scale = std::max(scale, std::abs(v));
    double err = 0.0;
    for (std::size_t i = 0; i < phi0.size(); ++i)
      err = std::max(err, std::abs(scaled.fields[k][i] - 7.0 * base.fields[k][i]));
    CHECK(err <= 1e-12 * scale);
  }
}

TEST_CASE("reported coefficient norms must dominate the samples") {
  const Grid g = make_grid(1, 8.0, 64);
  auto too_small = CoefficientField::functions(
      [](std::array<double, 2> x, double) { return std::sin(x[0]); },
      [](std::array<double, 2>, double) { return 0.0; }, 0.5 /* claims 0.5, attains ~1 */, 0.0,
      0.0);
  CHECK_THROWS_AS(tabulate(too_small, g, 1.0, 8), std::invalid_argument);
}

TEST_CASE("2-D: eigenfunction step and pathwise oracle") {
  const Grid g = make_grid(2, 8.0, 64);
  const double T = 0.25;
  const int K = 64;
  Spectral ws(g);

  // Product mode: eigenvalue is the sum of the two axis eigenvalues.
  Field mode = field_from_function(g, [&](std::array<double, 2> x) {
    return std::cos(2.0 * M_PI * x[0] / g.extent) * std::cos(4.0 * M_PI * x[1] / g.extent);
  });
  const double axis = 2.0 / (g.spacing * g.spacing);
  const double mu = axis * (1.0 - std::cos(2.0 * M_PI * g.spacing / g.extent)) +
                    axis * (1.0 - std::cos(4.0 * M_PI * g.spacing / g.extent));
  auto table = std::make_shared<CoefficientTable>(tabulate(CoefficientField::zero(), g, T, K));
  ForwardSolver solver(g, table);
  const double dt = T / K;
  std::vector<double> stepped = mode.v;
  solver.step(stepped, 0, dt, 0.0);
  for (std::size_t i = 0; i < stepped.size(); ++i)
    CHECK(stepped[i] == doctest::Approx(mode.v[i] / (1.0 + dt * mu)).epsilon(1e-9));

  // Pathwise constant-coefficient match.
  const Field phi0 = gaussian_bump(g, 0.0, 0.5);
  auto table2 =
      std::make_shared<CoefficientTable>(tabulate(CoefficientField::constants(0.6, 0.4), g, T, K));
  ForwardSolver solver2(g, table2);
  const auto path = sample_brownian(T, K, 13);
  const Trajectory traj = solver2.solve(phi0, path);
  const Field ref = exact_constant_coeff_solution(phi0, 0.6, 0.4, path, K, ws);
  CHECK(rel_l2_diff(traj.field(K), ref) < 0.02);
}

TEST_CASE("weak error halves with the step (pathwise control variate)") {
  const Grid g = make_grid(1, 16.0, 128);
  const double T = 0.5;
  const double a = 1.0, b = 0.5;
  const Field phi0 = gaussian_bump(g, 0.0, 0.5);
  const int fine_steps = 128;
  const int M = 400;

  Spectral ws(g);
  auto coarse_table = std::make_shared<CoefficientTable>(
      tabulate(CoefficientField::constants(a, b), g, T, fine_steps / 4));
  auto mid_table = std::make_shared<CoefficientTable>(
      tabulate(CoefficientField::constants(a, b), g, T, fine_steps / 2));
  ForwardSolver coarse(g, coarse_table);
  ForwardSolver mid(g, mid_table);

  double err_coarse = 0.0, err_mid = 0.0;
  for (int i = 0; i < M; ++i) {
    const auto fine_path = sample_brownian(T, fine_steps, 77, static_cast<std::uint64_t>(i));
    const auto path_c = coarsen(fine_path, 4);
    const auto path_m = coarsen(fine_path, 2);
    const Field exact = exact_constant_coeff_solution(phi0, a, b, fine_path, fine_steps, ws);
    const double exact_sq = l2_norm2(g, exact.v);
    err_coarse += l2_norm2(g, coarse.solve(phi0, path_c).fields.back()) - exact_sq;
    err_mid += l2_norm2(g, mid.solve(phi0, path_m).fields.back()) - exact_sq;
  }
  const double ratio = std::abs(err_coarse) / std::abs(err_mid);
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 3.0);
}
