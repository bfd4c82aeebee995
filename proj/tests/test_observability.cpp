#include "doctest.h"

#include <stdexcept>

#include "uclab/experiments.hpp"
#include "uclab/observability.hpp"

#include <cmath>

using namespace uclab;

namespace {

ObservabilityInputs base_inputs() {
  ObservabilityInputs in;
  in.grid = make_grid(1, 16.0, 256);
  in.coeffs = CoefficientField::zero();
  in.T = 0.5;
  in.steps = 128;
  in.tiling = cube_tiling(in.grid, 2.0);
  in.omega_r = 1.0;
  in.E = TimeSet({{0.05, 0.1125}, {0.3, 0.3625}}, 0.5); // total measure T/4
  in.theta = 0.5;
  in.data = {gaussian_field(in.grid, {0.4, 0.0}, 0.5)};
  in.per_datum = EnsembleSpec{1, 0};
  return in;
}

} // namespace

TEST_CASE("observability: pure heat report is finite and passes") {
  const ObservabilityInputs in = base_inputs();
  const ObservabilityOutcome out = observability_report(in);
  CHECK(out.report.pass);
  CHECK(std::isfinite(out.assembled_log));
  CHECK(out.kappa > 1.0);
  CHECK(std::abs(out.kappa * out.kappa * (out.alpha + 1.0) - (out.alpha + 2.0)) < 1e-14);
  CHECK(out.two_point.size() == 5);
  for (const auto& tp : out.two_point) CHECK(tp.pass);
  REQUIRE(out.ratios.size() == 1);
  CHECK(std::isfinite(out.ratios[0]));
  CHECK(out.ratios[0] > 0.0);
}

TEST_CASE("observability: full observation in time and space") {
  ObservabilityInputs in = base_inputs();
  in.E = TimeSet({{1e-9, 0.5 - 1e-9}}, 0.5);
  in.omega_r = in.tiling.half_side;
  const ObservabilityOutcome out = observability_report(in);
  CHECK(out.report.pass);
  // LHS / int_E ||phi||^2 <= max-over-time mass ratio / |E|, trivially finite.
  CHECK(out.ratios[0] <= 1.2 / in.E.measure());
}

TEST_CASE("observability: enlarging E never increases the observed ratio") {
  ObservabilityInputs small = base_inputs();
  ObservabilityInputs big = base_inputs();
  big.E = TimeSet({{0.05, 0.1125}, {0.3, 0.3625}, {0.42, 0.49}}, 0.5);
  const ObservabilityOutcome rs = observability_report(small);
  const ObservabilityOutcome rb = observability_report(big);
  CHECK(rb.ratios[0] <= rs.ratios[0] * (1.0 + 1e-12));
}

TEST_CASE("observability under multiplicative noise (small ensemble)") {
  ObservabilityInputs in = base_inputs();
  in.coeffs = CoefficientField::constants(0.3, 0.25);
  in.theta = 0.7;
  in.per_datum = EnsembleSpec{64, 8};
  in.rel_tol = 0.05;
  const ObservabilityOutcome out = observability_report(in);
  CHECK(out.report.pass);
  CHECK(std::isfinite(out.assembled_log));
  for (const auto& tp : out.two_point) CHECK(tp.pass);
}

TEST_CASE("observability: zero data pass vacuously") {
  ObservabilityInputs in = base_inputs();
  in.data = {Field(in.grid)};
  const ObservabilityOutcome out = observability_report(in);
  CHECK(out.report.pass);
  CHECK(out.report.vacuous);
}

TEST_CASE("observability: theta outside (0,1) is rejected") {
  ObservabilityInputs in = base_inputs();
  in.theta = 1.0;
  CHECK_THROWS_AS(observability_report(in), std::invalid_argument);
}
