#pragma once

#include "uclab/reports.hpp"
#include "uclab/sde.hpp"
#include "uclab/timeset.hpp"
#include "uclab/verifiers.hpp"

namespace uclab {

/// Observation of the terminal mass through omega x E, with the telescoped
/// bound assembled from fitted two-point constants.
struct ObservabilityInputs {
  Grid grid;
  CoefficientField coeffs;
  double T = 1.0;
  int steps = 256;
  Tiling tiling;
  double omega_r = 0.0;
  TimeSet E{{{0.25, 0.75}}, 1.0};
  double theta = 0.5; // fitted interpolation exponent
  std::vector<Field> data;
  EnsembleSpec per_datum{1, 0};
  double rel_tol = 0.02;
};

struct TwoPointCheck {
  double t1 = 0.0, t2 = 0.0, eps = 0.0;
  double lhs = 0.0;  // E||phi(t2)||^2
  double rhs = 0.0;  // eps E||phi(t1)||^2 + (K1/eps^alpha) e^{K2/(t2-t1)} E||phi(t2)||^2_omega
  bool pass = false;
};

struct ObservabilityOutcome {
  InequalityReport report;
  TelescopingSequence sequence;
  double alpha = 0.0;
  double kappa = 0.0;
  double d = 0.0;
  double k1_log = 0.0;       // ln of the fitted two-point prefactor
  double k2 = 0.0;           // fitted 1/gap coefficient (clamped positive)
  double assembled_log = 0.0; // ln of the telescoped observability constant
  std::vector<TwoPointCheck> two_point;
  std::vector<double> ratios; // per datum: E||phi(T)||^2 / E int_{omega x E} phi^2
};

ObservabilityOutcome observability_report(const ObservabilityInputs& in);

} // namespace uclab
