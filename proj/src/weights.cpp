#include "uclab/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace uclab {

double gaussian_weight(const Grid& g, const std::array<double, 2>& x, double t,
                       const WeightParams& p) {
  if (t < 0.0 || t > p.T) throw std::invalid_argument("gaussian_weight: t outside [0, T]");
  const double s = p.T - t + p.lambda;
  const double r2 = g.torus_dist2(x, p.center);
  return std::pow(s, -0.5 * p.dim) * std::exp(-r2 / (4.0 * s));
}

Field gaussian_weight_field(const Grid& g, double t, const WeightParams& p) {
  if (t < 0.0 || t > p.T) throw std::invalid_argument("gaussian_weight_field: t outside [0, T]");
  const double s = p.T - t + p.lambda;
  const double amp = std::pow(s, -0.5 * p.dim);
  const double inv4s = 1.0 / (4.0 * s);
  Field out(g);
  const std::size_t nn = g.node_count();
  for (std::size_t i = 0; i < nn; ++i)
    out.v[i] = amp * std::exp(-g.torus_dist2(g.node(i), p.center) * inv4s);
  return out;
}

WeightResiduals weight_identity_residuals(const Grid& g, const WeightParams& p, double t,
                                          double fd_dt) {
  if (t - fd_dt < 0.0 || t + fd_dt > p.T)
    throw std::invalid_argument("weight_identity_residuals: t +- fd_dt must stay inside [0, T]");
  const double s = p.T - t + p.lambda;

  const Field G = gaussian_weight_field(g, t, p);
  const Field Gm = gaussian_weight_field(g, t - fd_dt, p);
  const Field Gp = gaussian_weight_field(g, t + fd_dt, p);
  const Field LG = laplacian(G);

  const Mask interior = cube_mask(g, p.center, g.extent / 4.0);

  WeightResiduals res;
  const std::size_t nn = g.node_count();
  for (std::size_t i = 0; i < nn; ++i) {
    if (!interior.in[i]) continue;
    const auto x = g.node(i);
    const double d0 = g.torus_delta(x[0], p.center[0]);
    const double d1 = g.dim == 2 ? g.torus_delta(x[1], p.center[1]) : 0.0;
    const double r2 = d0 * d0 + d1 * d1;
    const double Gi = G.v[i];

    const double heat = (Gp.v[i] - Gm.v[i]) / (2.0 * fd_dt) + LG.v[i];
    res.heat_fd = std::max(res.heat_fd, std::abs(heat));

    // Direct differentiation of the definition vs. the closed-form gradient.
    const double direct_dx = Gi * (-2.0 * d0) / (4.0 * s);
    const double formula_dx = -d0 / (2.0 * s) * Gi;
    res.grad = std::max(res.grad, std::abs(direct_dx - formula_dx));

    // Sum of per-axis second derivatives vs. the closed-form Laplacian.
    double sum_second = 0.0;
    sum_second += (-1.0 / (2.0 * s) + d0 * d0 / (4.0 * s * s)) * Gi;
    if (g.dim == 2) sum_second += (-1.0 / (2.0 * s) + d1 * d1 / (4.0 * s * s)) * Gi;
    const double formula_lap = (-g.dim / (2.0 * s) + r2 / (4.0 * s * s)) * Gi;
    res.laplace = std::max(res.laplace, std::abs(sum_second - formula_lap));

    if (g.dim == 2) {
      // d/dx0 applied to the closed-form d/dx1 derivative vs. the mixed formula.
      const double nested = (-d1 / (2.0 * s)) * (-d0 / (2.0 * s)) * Gi;
      const double formula_mixed = d0 * d1 / (4.0 * s * s) * Gi;
      res.mixed = std::max(res.mixed, std::abs(nested - formula_mixed));
    }
  }
  return res;
}

namespace {

// Quintic smoothstep s(u) = 6u^5 - 15u^4 + 10u^3 on [0,1].
inline double smoothstep(double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; }
inline double smoothstep_d1(double u) {
  const double w = u * (1.0 - u);
  return 30.0 * w * w;
}
inline double smoothstep_d2(double u) { return 60.0 * u * (2.0 * u - 1.0) * (u - 1.0); }

} // namespace

double cutoff_profile_value(double rho, double inner, double outer) {
  if (rho <= inner) return 1.0;
  if (rho >= outer) return 0.0;
  return 1.0 - smoothstep((rho - inner) / (outer - inner));
}

CutoffProfile make_cutoff(const Grid& g, const std::array<double, 2>& center, double inner,
                          double outer) {
  if (!(0.0 < inner && inner < outer))
    throw std::invalid_argument("make_cutoff: need 0 < inner < outer");
  if (!(outer < g.extent / 2.0))
    throw std::invalid_argument("make_cutoff: outer radius must be < extent/2");

  CutoffProfile c;
  c.grid = g;
  c.center = center;
  c.inner = inner;
  c.outer = outer;
  const double w = outer - inner;
  c.grad_sup = 1.875 / w;

  // Profile supremum of |chi'' + (N-1) chi' / rho| over the annulus, sampled
  // densely in the radial parameter (independent of the grid).
  {
    const int samples = 100000;
    double sup = 0.0;
    for (int k = 0; k <= samples; ++k) {
      const double u = static_cast<double>(k) / samples;
      const double rho = inner + u * w;
      double lap = -smoothstep_d2(u) / (w * w);
      if (g.dim == 2) lap += -(smoothstep_d1(u) / w) / rho;
      sup = std::max(sup, std::abs(lap));
    }
    c.lap_sup = sup;
  }

  const std::size_t nn = g.node_count();
  c.value.assign(nn, 0.0);
  c.grad[0].assign(nn, 0.0);
  c.grad[1].assign(nn, 0.0);
  c.lap.assign(nn, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    const auto x = g.node(i);
    const double d0 = g.torus_delta(x[0], center[0]);
    const double d1 = g.dim == 2 ? g.torus_delta(x[1], center[1]) : 0.0;
    const double rho = std::sqrt(d0 * d0 + d1 * d1);
    c.value[i] = cutoff_profile_value(rho, inner, outer);
    if (rho <= inner || rho >= outer) continue;
    const double u = (rho - inner) / w;
    const double dchi = -smoothstep_d1(u) / w;      // chi'(rho)
    const double d2chi = -smoothstep_d2(u) / (w * w); // chi''(rho)
    c.grad[0][i] = dchi * d0 / rho;
    if (g.dim == 2) c.grad[1][i] = dchi * d1 / rho;
    c.lap[i] = d2chi + (g.dim - 1) * dchi / rho;
  }
  return c;
}

LocalizedState localize(const Field& phi, const std::array<Field, 2>& grad_phi,
                        const CutoffProfile& chi, const std::vector<double>& a_at_t) {
  if (phi.grid != chi.grid) throw std::invalid_argument("localize: grid mismatch");
  if (a_at_t.size() != phi.size())
    throw std::invalid_argument("localize: coefficient row size mismatch");
  const std::size_t nn = phi.size();
  LocalizedState s;
  s.u.resize(nn);
  s.F.resize(nn);
  s.g.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double u = chi.value[i] * phi.v[i];
    double gc = chi.grad[0][i] * grad_phi[0].v[i];
    if (phi.grid.dim == 2) gc += chi.grad[1][i] * grad_phi[1].v[i];
    const double commutator = -phi.v[i] * chi.lap[i] - 2.0 * gc;
    s.u[i] = u;
    s.g[i] = commutator;
    s.F[i] = a_at_t[i] * u + commutator;
  }
  return s;
}

LocalizedState localize(const Field& phi, const CutoffProfile& chi,
                        const std::vector<double>& a_at_t) {
  return localize(phi, gradient(phi), chi, a_at_t);
}

} // namespace uclab
