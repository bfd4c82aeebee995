#pragma once

#include "uclab/grid.hpp"

namespace uclab {

/// Parameters of the backward-heat weight
///   G(x,t) = (T - t + lambda)^(-N/2) exp(-|x - x0|^2 / (4 (T - t + lambda))).
struct WeightParams {
  double lambda = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  double T = 1.0;
  int dim = 1;
};

double gaussian_weight(const Grid& g, const std::array<double, 2>& x, double t,
                       const WeightParams& p);
Field gaussian_weight_field(const Grid& g, double t, const WeightParams& p);

/// Max-norm residuals of the weight identities over interior nodes
/// (per-axis torus offset <= L/4, away from the wrap cut):
///   heat_fd : |d_t G + Lap_h G| with centered time difference of step fd_dt,
///   grad    : direct x-derivative vs. the closed-form gradient,
///   laplace : summed second derivatives vs. the closed-form Laplacian,
///   mixed   : nested first derivatives vs. the closed-form mixed partial (2-D).
struct WeightResiduals {
  double heat_fd = 0.0;
  double grad = 0.0;
  double laplace = 0.0;
  double mixed = 0.0;
};

WeightResiduals weight_identity_residuals(const Grid& g, const WeightParams& p, double t,
                                          double fd_dt);

/// Radial C^2 cutoff: 1 on the inner ball, 0 outside the outer ball, quintic
/// smoothstep across the annulus. Gradient and Laplacian are analytic fields;
/// recorded sup norms are profile suprema, independent of grid resolution.
struct CutoffProfile {
  Grid grid;
  std::array<double, 2> center{0.0, 0.0};
  double inner = 0.0;
  double outer = 0.0;
  std::vector<double> value;
  std::array<std::vector<double>, 2> grad;
  std::vector<double> lap;
  double grad_sup = 0.0; // exactly 1.875 / (outer - inner)
  double lap_sup = 0.0;
};

CutoffProfile make_cutoff(const Grid& g, const std::array<double, 2>& center, double inner,
                          double outer);

// Scalar profile value at radius rho (used by tests and the norm recorder).
double cutoff_profile_value(double rho, double inner, double outer);

/// Localized state u = chi*phi with commutator sources
///   F = a u - phi Lap(chi) - 2 grad(phi).grad(chi),
///   g = -2 grad(chi).grad(phi) - phi Lap(chi).
struct LocalizedState {
  std::vector<double> u;
  std::vector<double> F;
  std::vector<double> g;
};

LocalizedState localize(const Field& phi, const std::array<Field, 2>& grad_phi,
                        const CutoffProfile& chi, const std::vector<double>& a_at_t);
// Convenience overload: grad(phi) by centered differences.
LocalizedState localize(const Field& phi, const CutoffProfile& chi,
                        const std::vector<double>& a_at_t);

} // namespace uclab
