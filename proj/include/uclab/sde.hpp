#pragma once

#include "uclab/grid.hpp"
#include "uclab/rng.hpp"
#include "uclab/spectral.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace uclab {

/// Deterministic space-time coefficient pair (a, b) for
///   d phi - Lap phi dt = a phi dt + b phi dW(t),
/// with recorded sup norms. Norms are required to dominate the pointwise
/// values at every sample point.
struct CoefficientField {
  std::function<double(std::array<double, 2>, double)> a;
  std::function<double(std::array<double, 2>, double)> b;
  double a_sup = 0.0;      // ||a||_inf
  double b_sup = 0.0;      // ||b||_inf
  double grad_b_sup = 0.0; // ||grad b||_inf
  bool is_constant = false;
  double a0 = 0.0, b0 = 0.0;

  static CoefficientField zero();
  static CoefficientField constants(double a0, double b0);
  static CoefficientField functions(std::function<double(std::array<double, 2>, double)> a,
                                    std::function<double(std::array<double, 2>, double)> b,
                                    double a_sup, double b_sup, double grad_b_sup);
  bool zero_noise() const { return b_sup == 0.0; }
};

/// Coefficients pre-evaluated on (time node, grid node); shared read-only by
/// all workers of an ensemble.
struct CoefficientTable {
  Grid grid;
  int steps = 0;
  double T = 0.0;
  bool constant = false;
  double a0 = 0.0, b0 = 0.0;
  std::vector<double> a; // (steps+1) x nodes when not constant
  std::vector<double> b;

  const double* a_at(int k) const { return constant ? nullptr : a.data() + static_cast<std::size_t>(k) * grid.node_count(); }
  const double* b_at(int k) const { return constant ? nullptr : b.data() + static_cast<std::size_t>(k) * grid.node_count(); }
  // Copies the coefficient row at time node k into out (constant fields expanded).
  void a_row(int k, std::vector<double>& out) const;
  void b_row(int k, std::vector<double>& out) const;
};

CoefficientTable tabulate(const CoefficientField& c, const Grid& g, double T, int steps);

// W^{1,inf}-style norm of b restricted to a mask: max over sampled nodes and
// time nodes of max(|b|, |grad b| by centered differences).
double b_ball_norm(const CoefficientTable& table, const Mask& mask);

/// Time-indexed fields for one Brownian path.
struct Trajectory {
  Grid grid;
  double T = 0.0;
  int steps = 0;
  std::vector<std::vector<double>> fields; // steps+1 snapshots
  BrownianPath path;

  double time(int k) const { return T * k / steps; }
  double dt() const { return T / steps; }
  Field field(int k) const { return Field(grid, fields[k]); }
};

/// Semi-implicit integrator: diffusion implicit, reaction and noise explicit
/// (Ito, left-endpoint coefficients). One instance per worker thread.
class ForwardSolver {
 public:
  ForwardSolver(const Grid& g, std::shared_ptr<const CoefficientTable> coeffs);

  const Grid& grid() const { return grid_; }
  Spectral& spectral() { return spectral_; }

  // One step from time node k: solves (I - dt Lap_h) phi+ = phi + dt a phi + b phi dW.
  void step(std::vector<double>& phi, int k, double dt, double dW);

  Trajectory solve(const Field& phi0, const BrownianPath& path);

  // As solve, but hands each snapshot (k, fields) to `visit` instead of storing.
  void solve_visit(const Field& phi0, const BrownianPath& path,
                   const std::function<void(int, const std::vector<double>&)>& visit);

 private:
  Grid grid_;
  std::shared_ptr<const CoefficientTable> coeffs_;
  Spectral spectral_;
  std::vector<double> rhs_;
};

// Adjoint flow d yhat - Lap yhat dt = -a1 yhat dt - b1 yhat dW: the forward
// solver with negated coefficients.
CoefficientField adjoint_coefficients(const CoefficientField& c);

// Pathwise closed-form solution for spatially/temporally constant (a, b):
//   phi(t) = exp((a - b^2/2) t + b W(t)) * (semigroup(t) phi0).
// `time_index` must be a node of the path.
Field exact_constant_coeff_solution(const Field& phi0, double a, double b,
                                    const BrownianPath& path, int time_index, Spectral& ws);

} // namespace uclab
