#include "uclab/hum.hpp"

#include <cmath>
#include <stdexcept>

namespace uclab {

HumOperator::HumOperator(const ControlProblem& problem)
    : problem_(problem), spectral_(problem.grid), scratch_(problem.grid.node_count()) {
  if (problem.a1.b_sup != 0.0)
    throw std::invalid_argument(
        "HumOperator: diffusion-coefficient noise is unsupported; the deterministic "
        "sub-case requires b = 0");
  if (!(problem.omega.count > 0))
    throw std::invalid_argument("HumOperator: observation region is empty");
  if (!(problem.E.measure() > 0.0))
    throw std::invalid_argument("HumOperator: time observation set has zero measure");
  if (problem.omega.grid != problem.grid)
    throw std::invalid_argument("HumOperator: omega grid mismatch");
  table_ = std::make_shared<CoefficientTable>(
      tabulate(adjoint_coefficients(problem.a1), problem.grid, problem.T, problem.steps));
  cell_ = std::pow(problem.grid.spacing, problem.grid.dim);
  const double dt = problem.T / problem.steps;
  e_.resize(problem.steps);
  for (int k = 0; k < problem.steps; ++k)
    e_[k] = problem.E.intersect_measure(k * dt, (k + 1) * dt);
}

double HumOperator::inner(const std::vector<double>& a, const std::vector<double>& b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * cell_;
}

std::vector<std::vector<double>> HumOperator::adjoint_flow(const Field& yhat0) {
  if (yhat0.grid != problem_.grid) throw std::invalid_argument("adjoint_flow: grid mismatch");
  const int K = problem_.steps;
  const double dt = problem_.T / K;
  const std::size_t nn = problem_.grid.node_count();
  std::vector<std::vector<double>> flow;
  flow.reserve(K + 1);
  flow.push_back(yhat0.v);
  std::vector<double> cur = yhat0.v;
  for (int k = 0; k < K; ++k) {
    // (I - dt Lap) next = (I + dt a_adj(t_k)) cur, with a_adj = -a1.
    if (table_->constant) {
      const double f = 1.0 + dt * table_->a0;
      for (std::size_t i = 0; i < nn; ++i) scratch_[i] = f * cur[i];
    } else {
      const double* a = table_->a_at(k);
      for (std::size_t i = 0; i < nn; ++i) scratch_[i] = (1.0 + dt * a[i]) * cur[i];
    }
    spectral_.implicit_heat(scratch_.data(), dt, cur.data());
    flow.push_back(cur);
  }
  return flow;
}

void HumOperator::transpose_step(std::vector<double>& y, int k) {
  const double dt = problem_.T / problem_.steps;
  const std::size_t nn = problem_.grid.node_count();
  spectral_.implicit_heat(y.data(), dt, scratch_.data());
  if (table_->constant) {
    const double f = 1.0 + dt * table_->a0;
    for (std::size_t i = 0; i < nn; ++i) y[i] = f * scratch_[i];
  } else {
    const double* a = table_->a_at(k);
    for (std::size_t i = 0; i < nn; ++i) y[i] = (1.0 + dt * a[i]) * scratch_[i];
  }
}

Field HumOperator::gramian_apply(const Field& yhat0) {
  const auto flow = adjoint_flow(yhat0);
  const int K = problem_.steps;
  const std::size_t nn = problem_.grid.node_count();
  std::vector<double> acc(nn, 0.0);
  for (int k = K - 1; k >= 0; --k) {
    transpose_step(acc, k);
    if (e_[k] > 0.0) {
      const auto& yk = flow[k];
      for (std::size_t i = 0; i < nn; ++i)
        if (problem_.omega.in[i]) acc[i] += e_[k] * yk[i];
    }
  }
  return Field(problem_.grid, std::move(acc));
}

Field HumOperator::free_backward(const Field& yT) {
  if (yT.grid != problem_.grid) throw std::invalid_argument("free_backward: grid mismatch");
  std::vector<double> y = yT.v;
  for (int k = problem_.steps - 1; k >= 0; --k) transpose_step(y, k);
  return Field(problem_.grid, std::move(y));
}

std::vector<std::vector<double>> HumOperator::controlled_backward_nodes(
    const Field& yT, const std::vector<std::vector<double>>& u_by_node) {
  if (yT.grid != problem_.grid)
    throw std::invalid_argument("controlled_backward: grid mismatch");
  if (static_cast<int>(u_by_node.size()) != problem_.steps)
    throw std::invalid_argument("controlled_backward: need a control slot per step node");
  const std::size_t nn = problem_.grid.node_count();
  std::vector<std::vector<double>> nodes(problem_.steps + 1);
  nodes[problem_.steps] = yT.v;
  std::vector<double> y = yT.v;
  for (int k = problem_.steps - 1; k >= 0; --k) {
    transpose_step(y, k);
    if (e_[k] > 0.0 && !u_by_node[k].empty()) {
      const auto& u = u_by_node[k];
      for (std::size_t i = 0; i < nn; ++i)
        if (problem_.omega.in[i]) y[i] -= e_[k] * u[i];
    }
    nodes[k] = y;
  }
  return nodes;
}

Field HumOperator::controlled_backward(const Field& yT,
                                       const std::vector<std::vector<double>>& u_by_node) {
  auto nodes = controlled_backward_nodes(yT, u_by_node);
  return Field(problem_.grid, std::move(nodes.front()));
}

Control solve_hum(const ControlProblem& problem, const Field& yT) {
  HumOperator op(problem);
  const std::size_t nn = problem.grid.node_count();
  const double yT_norm = std::sqrt(op.inner(yT.v, yT.v));

  Control ctl;
  ctl.yhat0 = Field(problem.grid);

  if (yT_norm == 0.0) {
    ctl.y0_norm_ratio = 0.0;
    ctl.cost = 0.0;
    ctl.iterations = 0;
    return ctl;
  }

  // Conjugate gradient on Gramian(x) = free_backward(yT) in the L^2 pairing.
  const Field rhs = op.free_backward(yT);
  std::vector<double> x(nn, 0.0), r = rhs.v, p = rhs.v, Ap(nn);
  double rs = op.inner(r, r);
  ctl.residual_history.push_back(std::sqrt(rs) / yT_norm);
  const double target = problem.cg_tol * yT_norm;
  int it = 0;
  while (std::sqrt(rs) > target) {
    if (it >= problem.cg_max_iter) {
      std::string hist;
      const std::size_t stride = std::max<std::size_t>(1, ctl.residual_history.size() / 8);
      for (std::size_t i = 0; i < ctl.residual_history.size(); i += stride)
        hist += std::to_string(ctl.residual_history[i]) + " ";
      hist += std::to_string(ctl.residual_history.back());
      throw std::runtime_error("solve_hum: conjugate gradient stagnated after " +
                               std::to_string(it) + " iterations; relative residuals: " + hist);
    }
    const Field ApF = op.gramian_apply(Field(problem.grid, p));
    Ap = ApF.v;
    const double pAp = op.inner(p, Ap);
    if (!(pAp > 0.0))
      throw std::runtime_error("solve_hum: Gramian lost positive definiteness in CG");
    const double alpha = rs / pAp;
    for (std::size_t i = 0; i < nn; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < nn; ++i) r[i] -= alpha * Ap[i];
    const double rs_new = op.inner(r, r);
    for (std::size_t i = 0; i < nn; ++i) p[i] = r[i] + (rs_new / rs) * p[i];
    rs = rs_new;
    ++it;
    ctl.residual_history.push_back(std::sqrt(rs) / yT_norm);
  }
  ctl.iterations = it;
  ctl.yhat0 = Field(problem.grid, x);

  // The control is the adjoint state restricted to omega x E.
  const auto flow = op.adjoint_flow(ctl.yhat0);
  const auto& e = op.time_weights();
  std::vector<std::vector<double>> u_by_node(problem.steps);
  double cost = 0.0;
  const double cell = std::pow(problem.grid.spacing, problem.grid.dim);
  for (int k = 0; k < problem.steps; ++k) {
    if (e[k] <= 0.0) continue;
    u_by_node[k] = flow[k];
    ctl.active_nodes.push_back(k);
    ctl.node_weight.push_back(e[k]);
    std::vector<double> omega_vals;
    double sq = 0.0;
    for (std::size_t i = 0; i < nn; ++i)
      if (problem.omega.in[i]) {
        omega_vals.push_back(flow[k][i]);
        sq += flow[k][i] * flow[k][i];
      }
    cost += e[k] * sq * cell;
    ctl.values.push_back(std::move(omega_vals));
  }
  ctl.cost = cost;

  const Field y0 = op.controlled_backward(yT, u_by_node);
  ctl.y0_norm_ratio = std::sqrt(op.inner(y0.v, y0.v)) / yT_norm;
  return ctl;
}

double verify_duality_identity(const ControlProblem& problem, const Field& yhat0,
                               const Control& control, const Field& yT) {
  HumOperator op(problem);
  const std::size_t nn = problem.grid.node_count();
  const auto flow = op.adjoint_flow(yhat0);
  const auto& e = op.time_weights();

  // Expand the stored control back onto grid-shaped slots.
  std::vector<std::vector<double>> u_by_node(problem.steps);
  for (std::size_t a = 0; a < control.active_nodes.size(); ++a) {
    const int k = control.active_nodes[a];
    std::vector<double> dense(nn, 0.0);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < nn; ++i)
      if (problem.omega.in[i]) dense[i] = control.values[a][pos++];
    u_by_node[k] = std::move(dense);
  }

  const auto ys = op.controlled_backward_nodes(yT, u_by_node);

  double obs_pairing = 0.0;
  const double cell = std::pow(problem.grid.spacing, problem.grid.dim);
  for (int k = 0; k < problem.steps; ++k) {
    if (e[k] <= 0.0 || u_by_node[k].empty()) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < nn; ++i)
      if (problem.omega.in[i]) s += flow[k][i] * u_by_node[k][i];
    obs_pairing += e[k] * s * cell;
  }
  const double tT = op.inner(flow[problem.steps], ys[problem.steps]);
  const double t0 = op.inner(flow[0], ys[0]);
  const double resid = tT - t0 - obs_pairing;
  const double scale = std::max({std::abs(tT), std::abs(t0), std::abs(obs_pairing), 1e-300});
  return std::abs(resid) / scale;
}

} // namespace uclab
