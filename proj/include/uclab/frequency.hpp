#pragma once

#include "uclab/ensemble.hpp"
#include "uclab/sde.hpp"
#include "uclab/weights.hpp"

namespace uclab {

/// Inputs of a localized frequency computation: the state is cut off at
/// support_radius (plateau up to plateau_radius) around the weight center.
struct FrequencyProblem {
  Grid grid;
  CoefficientField coeffs;
  double T = 1.0;
  int steps = 256;
  Field phi0;
  double lambda = 0.05;
  std::array<double, 2> center{0.0, 0.0};
  double plateau_radius = 0.0; // (1 + 3 delta/2) R
  double support_radius = 0.0; // R0 = (1 + 2 delta) R
};

/// Time series of the weighted mass H, weighted Dirichlet energy D, frequency
/// N = 2D/H, and the source integrals entering the dH/dt identity and the
/// monotonicity bound. Per-path integrals are retained for delta-method SEs.
struct FrequencyTrace {
  std::vector<double> times;
  std::vector<double> H, H_se;
  std::vector<double> D, D_se;
  std::vector<double> N, N_se;
  std::vector<std::uint8_t> N_defined;
  std::vector<double> UF, UF_se; // E int u F G
  std::vector<double> F2, F2_se; // E int F^2 G
  std::vector<double> BU, BU_se; // E int b^2 u^2 G
  double b_ball_norm = 0.0;      // W^{1,inf}-style norm of b over the support ball
  WeightParams weight;
  int paths = 0;
  double dt = 0.0;

  // paths x (5 * nodes): blocks [h | d | uf | f2 | bu], each of length nodes.
  SampleMatrix raw;
  int nodes() const { return static_cast<int>(times.size()); }
};

// H floor below which N is reported undefined.
inline constexpr double kFrequencyFloor = 1e-30;

FrequencyTrace frequency_trace(const FrequencyProblem& problem, const EnsembleSpec& spec,
                               bool use_oracle_trajectories = false);

// Single-field frequency functionals over a mask with an explicit weight field
// (H, D, N); D is the edge-based Dirichlet form restricted to in-mask edges.
struct FrequencyPoint {
  double H = 0.0;
  double D = 0.0;
  double N = 0.0;
  bool N_defined = false;
};
FrequencyPoint frequency_from_fields(const Field& u, const Mask& mask, const Field& weight);

/// Residual report for the dH/dt identity
///   dH/dt = -2 D + 2 E int u F G + E int b^2 u^2 G
/// at interior time nodes (centered differences).
struct DhIdentityReport {
  std::vector<double> times;
  std::vector<double> residual;  // signed ensemble-mean residual
  std::vector<double> se;
  std::vector<double> allowance; // discretization budget per node
  double max_abs_residual = 0.0;
  int violations = 0; // nodes with |residual| > 3 se + allowance
  bool pass = false;
};

DhIdentityReport check_dh_identity(const FrequencyTrace& trace,
                                   const std::vector<double>& allowance);

// As check_dh_identity, but each node's residual is measured against the
// residual of a common-random-numbers reference trace (oracle trajectories
// substituted); the SE is still the solver residual's statistical resolution.
DhIdentityReport check_dh_identity_vs_reference(const FrequencyTrace& trace,
                                                const FrequencyTrace& reference,
                                                const std::vector<double>& allowance);

/// Margin report for the frequency monotonicity bound
///   dN/dt <= (1/(T-t+lambda) + 2 ||b||^2) N + 2 ||b||^2 + E int F^2 G / H.
struct MonotonicityReport {
  std::vector<double> times;
  std::vector<double> margin;    // RHS - centered dN/dt at interior nodes
  std::vector<double> se;        // delta-method SE of the margin
  std::vector<double> allowance;
  double min_margin = 0.0;
  int violations = 0;
  // Weighted-sequence check: s_k = (T - t_k + lambda) N_k must be nonincreasing
  // when b = 0 and F = 0; increments, SEs and allowances share the node layout.
  std::vector<double> seq;
  std::vector<double> seq_increment;
  std::vector<double> seq_se;
  std::vector<double> seq_allowance;
  int seq_violations = 0;
  bool pass = false;
};

MonotonicityReport check_monotonicity(const FrequencyTrace& trace,
                                      const std::vector<double>& margin_allowance,
                                      const std::vector<double>& seq_allowance);

/// Richardson companions: the same problem with b := 0 run deterministically at
/// dt and dt/2; per-node allowance = 3 |coarse - fine| + floor.
struct FrequencyAllowances {
  std::vector<double> dh;        // interior nodes (times[1..K-1])
  std::vector<double> margin;    // interior nodes
  std::vector<double> seq;       // increments (K entries)
};
FrequencyAllowances frequency_allowances(const FrequencyProblem& problem);

} // namespace uclab
