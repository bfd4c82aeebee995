#include "uclab/sde.hpp"

#include <cmath>
#include <stdexcept>

namespace uclab {

CoefficientField CoefficientField::zero() { return constants(0.0, 0.0); }

CoefficientField CoefficientField::constants(double a0, double b0) {
  CoefficientField c;
  c.is_constant = true;
  c.a0 = a0;
  c.b0 = b0;
  c.a = [a0](std::array<double, 2>, double) { return a0; };
  c.b = [b0](std::array<double, 2>, double) { return b0; };
  c.a_sup = std::abs(a0);
  c.b_sup = std::abs(b0);
  c.grad_b_sup = 0.0;
  return c;
}

CoefficientField CoefficientField::functions(
    std::function<double(std::array<double, 2>, double)> a,
    std::function<double(std::array<double, 2>, double)> b, double a_sup, double b_sup,
    double grad_b_sup) {
  CoefficientField c;
  c.a = std::move(a);
  c.b = std::move(b);
  c.a_sup = a_sup;
  c.b_sup = b_sup;
  c.grad_b_sup = grad_b_sup;
  return c;
}

void CoefficientTable::a_row(int k, std::vector<double>& out) const {
  out.assign(grid.node_count(), a0);
  if (!constant) {
    const double* p = a_at(k);
    out.assign(p, p + grid.node_count());
  }
}

void CoefficientTable::b_row(int k, std::vector<double>& out) const {
  out.assign(grid.node_count(), b0);
  if (!constant) {
    const double* p = b_at(k);
    out.assign(p, p + grid.node_count());
  }
}

CoefficientTable tabulate(const CoefficientField& c, const Grid& g, double T, int steps) {
  CoefficientTable t;
  t.grid = g;
  t.steps = steps;
  t.T = T;
  if (c.is_constant) {
    t.constant = true;
    t.a0 = c.a0;
    t.b0 = c.b0;
    return t;
  }
  const std::size_t nn = g.node_count();
  t.a.resize(nn * (steps + 1));
  t.b.resize(nn * (steps + 1));
  for (int k = 0; k <= steps; ++k) {
    const double tk = T * k / steps;
    double* ra = t.a.data() + static_cast<std::size_t>(k) * nn;
    double* rb = t.b.data() + static_cast<std::size_t>(k) * nn;
    for (std::size_t i = 0; i < nn; ++i) {
      const auto x = g.node(i);
      ra[i] = c.a(x, tk);
      rb[i] = c.b(x, tk);
      if (std::abs(ra[i]) > c.a_sup * (1.0 + 1e-12) + 1e-300)
        throw std::invalid_argument("tabulate: |a| exceeds the reported sup norm");
      if (std::abs(rb[i]) > c.b_sup * (1.0 + 1e-12) + 1e-300)
        throw std::invalid_argument("tabulate: |b| exceeds the reported sup norm");
    }
  }
  return t;
}

double b_ball_norm(const CoefficientTable& table, const Mask& mask) {
  if (table.constant) return std::abs(table.b0);
  const Grid& g = table.grid;
  const std::size_t nn = g.node_count();
  std::vector<double> gx(nn), gy;
  double norm = 0.0;
  for (int k = 0; k <= table.steps; ++k) {
    const double* rb = table.b_at(k);
    gradient_axis_into(g, rb, 0, gx.data());
    if (g.dim == 2) {
      gy.resize(nn);
      gradient_axis_into(g, rb, 1, gy.data());
    }
    for (std::size_t i = 0; i < nn; ++i) {
      if (!mask.in[i]) continue;
      double m = std::abs(rb[i]);
      double g2 = gx[i] * gx[i] + (g.dim == 2 ? gy[i] * gy[i] : 0.0);
      m = std::max(m, std::sqrt(g2));
      norm = std::max(norm, m);
    }
  }
  return norm;
}

ForwardSolver::ForwardSolver(const Grid& g, std::shared_ptr<const CoefficientTable> coeffs)
    : grid_(g), coeffs_(std::move(coeffs)), spectral_(g), rhs_(g.node_count()) {
  if (coeffs_->grid != g) throw std::invalid_argument("ForwardSolver: coefficient grid mismatch");
}

void ForwardSolver::step(std::vector<double>& phi, int k, double dt, double dW) {
  if (!(dt > 0.0)) throw std::invalid_argument("ForwardSolver::step: dt must be positive");
  const std::size_t nn = grid_.node_count();
  if (coeffs_->constant) {
    const double f = 1.0 + dt * coeffs_->a0 + coeffs_->b0 * dW;
    for (std::size_t i = 0; i < nn; ++i) rhs_[i] = f * phi[i];
  } else {
    const double* a = coeffs_->a_at(k);
    const double* b = coeffs_->b_at(k);
    for (std::size_t i = 0; i < nn; ++i) rhs_[i] = (1.0 + dt * a[i] + b[i] * dW) * phi[i];
  }
  spectral_.implicit_heat(rhs_.data(), dt, phi.data());
}

Trajectory ForwardSolver::solve(const Field& phi0, const BrownianPath& path) {
  if (phi0.grid != grid_) throw std::invalid_argument("ForwardSolver::solve: grid mismatch");
  Trajectory traj;
  traj.grid = grid_;
  traj.T = path.horizon;
  traj.steps = path.steps;
  traj.path = path;
  traj.fields.reserve(path.steps + 1);
  traj.fields.push_back(phi0.v);
  std::vector<double> phi = phi0.v;
  const double dt = path.dt();
  for (int k = 0; k < path.steps; ++k) {
    step(phi, k, dt, path.dw[k]);
    traj.fields.push_back(phi);
  }
  return traj;
}

void ForwardSolver::solve_visit(
    const Field& phi0, const BrownianPath& path,
    const std::function<void(int, const std::vector<double>&)>& visit) {
  if (phi0.grid != grid_) throw std::invalid_argument("ForwardSolver::solve_visit: grid mismatch");
  std::vector<double> phi = phi0.v;
  visit(0, phi);
  const double dt = path.dt();
  for (int k = 0; k < path.steps; ++k) {
    step(phi, k, dt, path.dw[k]);
    visit(k + 1, phi);
  }
}

CoefficientField adjoint_coefficients(const CoefficientField& c) {
  if (c.is_constant) return CoefficientField::constants(-c.a0, -c.b0);
  auto a = c.a;
  auto b = c.b;
  return CoefficientField::functions(
      [a](std::array<double, 2> x, double t) { return -a(x, t); },
      [b](std::array<double, 2> x, double t) { return -b(x, t); }, c.a_sup, c.b_sup,
      c.grad_b_sup);
}

Field exact_constant_coeff_solution(const Field& phi0, double a, double b,
                                    const BrownianPath& path, int time_index, Spectral& ws) {
  if (time_index < 0 || time_index > path.steps)
    throw std::invalid_argument("exact_constant_coeff_solution: time index outside the path");
  const double t = path.horizon * time_index / path.steps;
  Field out = ws.semigroup(phi0, t);
  const double factor = std::exp((a - 0.5 * b * b) * t + b * path.w[time_index]);
  for (double& x : out.v) x *= factor;
  return out;
}

} // namespace uclab
