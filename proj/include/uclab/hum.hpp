#pragma once

#include "uclab/sde.hpp"
#include "uclab/timeset.hpp"

namespace uclab {

/// Null-control synthesis data for the controlled backward equation in the
/// deterministic sub-case (no diffusion-coefficient noise; the martingale
/// component is identically zero).
struct ControlProblem {
  Grid grid;
  CoefficientField a1; // must carry b = 0; refused otherwise
  double T = 1.0;
  int steps = 256;
  Mask omega;
  TimeSet E{{{0.0 + 1e-9, 1.0 - 1e-9}}, 1.0};
  double cg_tol = 5e-4; // residual target relative to ||y_T||
  int cg_max_iter = 200;
};

/// Synthesized control supported on omega x E, sampled at the active time
/// nodes (cell weight e_k > 0).
struct Control {
  std::vector<int> active_nodes;          // time indices k with e_k > 0
  std::vector<double> node_weight;        // e_k = |E cap (t_k, t_{k+1})|
  std::vector<std::vector<double>> values; // control field on omega at each active node
  double cost = 0.0;                       // ||u||^2_{L^2(omega x E)}
  double y0_norm_ratio = 0.0;              // achieved ||y(0)|| / ||y_T||
  int iterations = 0;
  std::vector<double> residual_history;
  Field yhat0; // CG solution generating the control
};

/// Matrix-free duality operators on the discrete pair (adjoint forward flow,
/// exact-transpose controlled backward flow).
class HumOperator {
 public:
  explicit HumOperator(const ControlProblem& problem);

  const ControlProblem& problem() const { return problem_; }
  const std::vector<double>& time_weights() const { return e_; }

  // Adjoint flow snapshots yhat_0..yhat_K from yhat(0) = yhat0.
  std::vector<std::vector<double>> adjoint_flow(const Field& yhat0);

  // PSD duality Gramian: <Gramian(y), z> = sum_k e_k <chi yhat_k[y], chi yhat_k[z]>.
  Field gramian_apply(const Field& yhat0);

  // Free backward solution at t = 0 from terminal datum y_T.
  Field free_backward(const Field& yT);

  // Controlled backward solve with source u on omega x E; returns y(0).
  // u_by_node[k] holds the control field at time node k (dense over the grid;
  // entries off omega are ignored; an empty slot means no source there).
  Field controlled_backward(const Field& yT, const std::vector<std::vector<double>>& u_by_node);
  // All snapshots y_0..y_K of the controlled backward solve.
  std::vector<std::vector<double>> controlled_backward_nodes(
      const Field& yT, const std::vector<std::vector<double>>& u_by_node);

  double inner(const std::vector<double>& a, const std::vector<double>& b) const;

 private:
  void transpose_step(std::vector<double>& y, int k);

  ControlProblem problem_;
  std::shared_ptr<const CoefficientTable> table_;
  Spectral spectral_;
  std::vector<double> e_; // K entries, e_k = |E cap (t_k, t_{k+1})|
  double cell_ = 0.0;
  std::vector<double> scratch_;
};

Control solve_hum(const ControlProblem& problem, const Field& yT);

// |<yhat(T), y(T)> - <yhat0, y(0)> - <yhat, u>_{omega x E}| / scale for the
// discrete pair; exact-transpose construction keeps this at roundoff.
double verify_duality_identity(const ControlProblem& problem, const Field& yhat0,
                               const Control& control, const Field& yT);

} // namespace uclab
