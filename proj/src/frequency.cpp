#include "uclab/frequency.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace uclab {

namespace {

struct EdgeList {
  // Node-index pairs with both endpoints inside the mask.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

EdgeList in_mask_edges(const Mask& mask) {
  const Grid& g = mask.grid;
  EdgeList out;
  const int n = g.n;
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const int j = i == n - 1 ? 0 : i + 1;
      if (mask.in[i] && mask.in[j]) out.edges.emplace_back(i, j);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::uint32_t c = i * n + j;
        const std::uint32_t right = i * n + (j == n - 1 ? 0 : j + 1);
        const std::uint32_t down = (i == n - 1 ? 0 : i + 1) * n + j;
        if (mask.in[c] && mask.in[right]) out.edges.emplace_back(c, right);
        if (mask.in[c] && mask.in[down]) out.edges.emplace_back(c, down);
      }
  }
  return out;
}

struct SharedTraceData {
  Grid grid;
  Mask ball;
  EdgeList edges;
  std::vector<std::uint32_t> ball_nodes;
  CutoffProfile chi;
  std::vector<std::vector<double>> G; // weight field per time node
  std::shared_ptr<const CoefficientTable> table;
  double cell = 0.0;
  int steps = 0;
  double T = 0.0;
};

// Accumulates the five integrals of one snapshot into out[col + block*nodes].
void accumulate_snapshot(const SharedTraceData& s, int k, const std::vector<double>& phi,
                         std::vector<double>& gx, std::vector<double>& gy,
                         std::vector<double>& a_row, std::vector<double>& b_row,
                         std::span<double> out) {
  const Grid& g = s.grid;
  const std::size_t nn = g.node_count();
  const int nodes = s.steps + 1;
  gradient_axis_into(g, phi.data(), 0, gx.data());
  if (g.dim == 2) gradient_axis_into(g, phi.data(), 1, gy.data());
  s.table->a_row(k, a_row);
  s.table->b_row(k, b_row);

  const std::vector<double>& G = s.G[k];
  double h_sum = 0.0, uf_sum = 0.0, f2_sum = 0.0, bu_sum = 0.0;
  for (std::uint32_t i : s.ball_nodes) {
    const double u = s.chi.value[i] * phi[i];
    double gc = s.chi.grad[0][i] * gx[i];
    if (g.dim == 2) gc += s.chi.grad[1][i] * gy[i];
    const double F = a_row[i] * u - phi[i] * s.chi.lap[i] - 2.0 * gc;
    const double Gi = G[i];
    h_sum += u * u * Gi;
    uf_sum += u * F * Gi;
    f2_sum += F * F * Gi;
    bu_sum += b_row[i] * b_row[i] * u * u * Gi;
  }
  double d_sum = 0.0;
  const double ih = 1.0 / g.spacing;
  for (const auto& [p, q] : s.edges.edges) {
    const double up = s.chi.value[p] * phi[p];
    const double uq = s.chi.value[q] * phi[q];
    const double du = (uq - up) * ih;
    d_sum += 0.5 * (G[p] + G[q]) * du * du;
  }
  out[0 * nodes + k] = h_sum * s.cell;
  out[1 * nodes + k] = d_sum * s.cell;
  out[2 * nodes + k] = uf_sum * s.cell;
  out[3 * nodes + k] = f2_sum * s.cell;
  out[4 * nodes + k] = bu_sum * s.cell;
  (void)nn;
}

} // namespace

FrequencyPoint frequency_from_fields(const Field& u, const Mask& mask, const Field& weight) {
  if (u.grid != mask.grid || u.grid != weight.grid)
    throw std::invalid_argument("frequency_from_fields: grid mismatch");
  const Grid& g = u.grid;
  const double cell = std::pow(g.spacing, g.dim);
  double H = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (mask.in[i]) H += u.v[i] * u.v[i] * weight.v[i];
  H *= cell;
  double D = 0.0;
  const double ih = 1.0 / g.spacing;
  for (const auto& [p, q] : in_mask_edges(mask).edges) {
    const double du = (u.v[q] - u.v[p]) * ih;
    D += 0.5 * (weight.v[p] + weight.v[q]) * du * du;
  }
  D *= cell;
  FrequencyPoint out;
  out.H = H;
  out.D = D;
  out.N_defined = H > kFrequencyFloor;
  out.N = out.N_defined ? 2.0 * D / H : 0.0;
  return out;
}

FrequencyTrace frequency_trace(const FrequencyProblem& problem, const EnsembleSpec& spec,
                               bool use_oracle_trajectories) {
  const Grid& g = problem.grid;
  if (!(problem.plateau_radius > 0.0 && problem.plateau_radius < problem.support_radius))
    throw std::invalid_argument("frequency_trace: need 0 < plateau_radius < support_radius");
  if (use_oracle_trajectories && !problem.coeffs.is_constant)
    throw std::invalid_argument("frequency_trace: oracle trajectories need constant coefficients");

  auto shared = std::make_shared<SharedTraceData>();
  shared->grid = g;
  shared->steps = problem.steps;
  shared->T = problem.T;
  shared->cell = std::pow(g.spacing, g.dim);
  shared->ball = ball_mask(g, problem.center, problem.support_radius);
  shared->edges = in_mask_edges(shared->ball);
  for (std::uint32_t i = 0; i < shared->ball.in.size(); ++i)
    if (shared->ball.in[i]) shared->ball_nodes.push_back(i);
  shared->chi = make_cutoff(g, problem.center, problem.plateau_radius, problem.support_radius);
  shared->table =
      std::make_shared<CoefficientTable>(tabulate(problem.coeffs, g, problem.T, problem.steps));

  WeightParams wp;
  wp.lambda = problem.lambda;
  wp.center = problem.center;
  wp.T = problem.T;
  wp.dim = g.dim;
  shared->G.resize(problem.steps + 1);
  for (int k = 0; k <= problem.steps; ++k)
    shared->G[k] = gaussian_weight_field(g, problem.T * k / problem.steps, wp).v;

  const int nodes = problem.steps + 1;
  const int width = 5 * nodes;
  const Field phi0 = problem.phi0;
  const double a0 = problem.coeffs.a0, b0 = problem.coeffs.b0;
  const double T = problem.T;
  const int steps = problem.steps;
  const std::uint64_t seed = spec.seed;

  WorkerFactory make_worker = [shared, phi0, use_oracle_trajectories, a0, b0, T, steps,
                               seed]() -> PathSampler {
    auto solver = std::make_shared<ForwardSolver>(shared->grid, shared->table);
    auto gx = std::make_shared<std::vector<double>>(shared->grid.node_count());
    auto gy = std::make_shared<std::vector<double>>(shared->grid.node_count());
    auto a_row = std::make_shared<std::vector<double>>();
    auto b_row = std::make_shared<std::vector<double>>();
    return [shared, phi0, use_oracle_trajectories, a0, b0, T, steps, seed, solver, gx, gy, a_row,
            b_row](int path_index, std::span<double> out) {
      const BrownianPath path = sample_brownian(T, steps, seed, path_index);
      if (use_oracle_trajectories) {
        for (int k = 0; k <= steps; ++k) {
          const Field f =
              exact_constant_coeff_solution(phi0, a0, b0, path, k, solver->spectral());
          accumulate_snapshot(*shared, k, f.v, *gx, *gy, *a_row, *b_row, out);
        }
      } else {
        solver->solve_visit(phi0, path, [&](int k, const std::vector<double>& phi) {
          accumulate_snapshot(*shared, k, phi, *gx, *gy, *a_row, *b_row, out);
        });
      }
    };
  };

  FrequencyTrace trace;
  trace.raw = sample_paths(spec, width, make_worker);
  trace.paths = spec.paths;
  trace.dt = problem.T / problem.steps;
  trace.weight = wp;
  trace.b_ball_norm = b_ball_norm(*shared->table, shared->ball);
  trace.times.resize(nodes);
  for (int k = 0; k < nodes; ++k) trace.times[k] = problem.T * k / problem.steps;

  auto fill = [&](int block, std::vector<double>& mean, std::vector<double>& se) {
    mean.resize(nodes);
    se.resize(nodes);
    for (int k = 0; k < nodes; ++k) {
      mean[k] = trace.raw.col_mean(block * nodes + k);
      se[k] = trace.raw.col_se(block * nodes + k, mean[k]);
    }
  };
  fill(0, trace.H, trace.H_se);
  fill(1, trace.D, trace.D_se);
  fill(2, trace.UF, trace.UF_se);
  fill(3, trace.F2, trace.F2_se);
  fill(4, trace.BU, trace.BU_se);

  trace.N.assign(nodes, 0.0);
  trace.N_se.assign(nodes, 0.0);
  trace.N_defined.assign(nodes, 0);
  for (int k = 0; k < nodes; ++k) {
    if (trace.H[k] > kFrequencyFloor) {
      trace.N_defined[k] = 1;
      trace.N[k] = 2.0 * trace.D[k] / trace.H[k];
      if (trace.paths >= 2) {
        // delta method: dN = (2 dD - N dH)/H
        std::vector<double> infl(trace.paths);
        for (int r = 0; r < trace.paths; ++r) {
          const double dh = trace.raw.at(r, 0 * nodes + k) - trace.H[k];
          const double dd = trace.raw.at(r, 1 * nodes + k) - trace.D[k];
          infl[r] = (2.0 * dd - trace.N[k] * dh) / trace.H[k];
        }
        std::vector<double> sq(trace.paths);
        for (int r = 0; r < trace.paths; ++r) sq[r] = infl[r] * infl[r];
        const double var = pairwise_sum(sq) / (trace.paths - 1);
        trace.N_se[k] = std::sqrt(var / trace.paths);
      }
    }
  }
  return trace;
}

namespace {

// Per-path residual samples of the dH/dt identity at interior node k.
void residual_samples(const FrequencyTrace& trace, int k, std::vector<double>& out) {
  const int nodes = trace.nodes();
  const double inv2dt = 1.0 / (2.0 * trace.dt);
  out.resize(trace.paths);
  for (int r = 0; r < trace.paths; ++r) {
    const double hprev = trace.raw.at(r, 0 * nodes + k - 1);
    const double hnext = trace.raw.at(r, 0 * nodes + k + 1);
    const double d = trace.raw.at(r, 1 * nodes + k);
    const double uf = trace.raw.at(r, 2 * nodes + k);
    const double bu = trace.raw.at(r, 4 * nodes + k);
    out[r] = (hnext - hprev) * inv2dt + 2.0 * d - 2.0 * uf - bu;
  }
}

DhIdentityReport dh_identity_core(const FrequencyTrace& trace, const FrequencyTrace* reference,
                                  const std::vector<double>& allowance) {
  const int nodes = trace.nodes();
  if (nodes < 3) throw std::invalid_argument("check_dh_identity: need at least 3 time nodes");
  if (reference && (reference->nodes() != nodes || reference->paths != trace.paths))
    throw std::invalid_argument("check_dh_identity: reference trace shape mismatch");
  const int interior = nodes - 2;
  if (!allowance.empty() && static_cast<int>(allowance.size()) != interior)
    throw std::invalid_argument("check_dh_identity: allowance size mismatch");

  DhIdentityReport rep;
  rep.times.resize(interior);
  rep.residual.resize(interior);
  rep.se.resize(interior);
  rep.allowance = allowance.empty() ? std::vector<double>(interior, 0.0) : allowance;
  const int M = trace.paths;
  std::vector<double> samples(M), ref_samples, sq(M);
  for (int k = 1; k + 1 < nodes; ++k) {
    residual_samples(trace, k, samples);
    const double mean = pairwise_sum(samples) / M;
    double se = 0.0;
    if (M >= 2) {
      for (int r = 0; r < M; ++r) {
        const double dd = samples[r] - mean;
        sq[r] = dd * dd;
      }
      se = std::sqrt(pairwise_sum(sq) / (M - 1) / M);
    }
    double centered = mean;
    if (reference) {
      residual_samples(*reference, k, ref_samples);
      centered = mean - pairwise_sum(ref_samples) / M;
    }
    rep.times[k - 1] = trace.times[k];
    rep.residual[k - 1] = centered;
    rep.se[k - 1] = se;
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(centered));
    if (std::abs(centered) > 3.0 * se + rep.allowance[k - 1]) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

} // namespace

DhIdentityReport check_dh_identity(const FrequencyTrace& trace,
                                   const std::vector<double>& allowance) {
  return dh_identity_core(trace, nullptr, allowance);
}

DhIdentityReport check_dh_identity_vs_reference(const FrequencyTrace& trace,
                                                const FrequencyTrace& reference,
                                                const std::vector<double>& allowance) {
  return dh_identity_core(trace, &reference, allowance);
}

MonotonicityReport check_monotonicity(const FrequencyTrace& trace,
                                      const std::vector<double>& margin_allowance,
                                      const std::vector<double>& seq_allowance) {
  const int nodes = trace.nodes();
  if (nodes < 3) throw std::invalid_argument("check_monotonicity: need at least 3 time nodes");
  for (int k = 0; k < nodes; ++k)
    if (!trace.N_defined[k])
      throw std::runtime_error("check_monotonicity: frequency undefined inside the window (H "
                               "below floor at node " +
                               std::to_string(k) + ")");

  const int interior = nodes - 2;
  MonotonicityReport rep;
  rep.times.resize(interior);
  rep.margin.resize(interior);
  rep.se.resize(interior);
  rep.allowance =
      margin_allowance.empty() ? std::vector<double>(interior, 0.0) : margin_allowance;
  if (static_cast<int>(rep.allowance.size()) != interior)
    throw std::invalid_argument("check_monotonicity: margin allowance size mismatch");

  const double b2 = trace.b_ball_norm * trace.b_ball_norm;
  const double inv2dt = 1.0 / (2.0 * trace.dt);
  const int M = trace.paths;
  const double lambda = trace.weight.lambda;
  const double T = trace.weight.T;

  auto dN_infl = [&](int r, int j) {
    const double dh = trace.raw.at(r, 0 * nodes + j) - trace.H[j];
    const double dd = trace.raw.at(r, 1 * nodes + j) - trace.D[j];
    return (2.0 * dd - trace.N[j] * dh) / trace.H[j];
  };

  rep.min_margin = std::numeric_limits<double>::infinity();
  std::vector<double> infl(M), sq(M);
  for (int k = 1; k + 1 < nodes; ++k) {
    const double ck = 1.0 / (T - trace.times[k] + lambda) + 2.0 * b2;
    const double rhs = ck * trace.N[k] + 2.0 * b2 + trace.F2[k] / trace.H[k];
    const double dN = (trace.N[k + 1] - trace.N[k - 1]) * inv2dt;
    const double margin = rhs - dN;
    double se = 0.0;
    if (M >= 2) {
      for (int r = 0; r < M; ++r) {
        const double dh = trace.raw.at(r, 0 * nodes + k) - trace.H[k];
        const double df2 = trace.raw.at(r, 3 * nodes + k) - trace.F2[k];
        const double d_ratio = (df2 - (trace.F2[k] / trace.H[k]) * dh) / trace.H[k];
        infl[r] = ck * dN_infl(r, k) + d_ratio - (dN_infl(r, k + 1) - dN_infl(r, k - 1)) * inv2dt;
      }
      for (int r = 0; r < M; ++r) sq[r] = infl[r] * infl[r];
      se = std::sqrt(pairwise_sum(sq) / (M - 1) / M);
    }
    rep.times[k - 1] = trace.times[k];
    rep.margin[k - 1] = margin;
    rep.se[k - 1] = se;
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -(3.0 * se + rep.allowance[k - 1])) ++rep.violations;
  }

  // Weighted sequence s_k = (T - t_k + lambda) N_k and its increments.
  rep.seq.resize(nodes);
  for (int k = 0; k < nodes; ++k) rep.seq[k] = (T - trace.times[k] + lambda) * trace.N[k];
  const int inc = nodes - 1;
  rep.seq_increment.resize(inc);
  rep.seq_se.assign(inc, 0.0);
  rep.seq_allowance = seq_allowance.empty() ? std::vector<double>(inc, 0.0) : seq_allowance;
  if (static_cast<int>(rep.seq_allowance.size()) != inc)
    throw std::invalid_argument("check_monotonicity: sequence allowance size mismatch");
  for (int k = 0; k < inc; ++k) {
    rep.seq_increment[k] = rep.seq[k + 1] - rep.seq[k];
    if (M >= 2) {
      const double w0 = T - trace.times[k] + lambda;
      const double w1 = T - trace.times[k + 1] + lambda;
      for (int r = 0; r < M; ++r) infl[r] = w1 * dN_infl(r, k + 1) - w0 * dN_infl(r, k);
      for (int r = 0; r < M; ++r) sq[r] = infl[r] * infl[r];
      rep.seq_se[k] = std::sqrt(pairwise_sum(sq) / (M - 1) / M);
    }
    if (rep.seq_increment[k] > 3.0 * rep.seq_se[k] + rep.seq_allowance[k]) ++rep.seq_violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

FrequencyAllowances frequency_allowances(const FrequencyProblem& problem) {
  FrequencyProblem det = problem;
  if (det.coeffs.is_constant) {
    det.coeffs = CoefficientField::constants(det.coeffs.a0, 0.0);
  } else {
    auto a = det.coeffs.a;
    det.coeffs = CoefficientField::functions(
        a, [](std::array<double, 2>, double) { return 0.0; }, det.coeffs.a_sup, 0.0, 0.0);
  }
  FrequencyProblem fine = det;
  fine.steps = 2 * det.steps;

  // Spatial companion on the half-resolution grid (exact node subsampling; the
  // coarse nodes are a subset of the fine ones, origin included).
  const bool have_space = det.grid.n % 2 == 0 && det.grid.n / 2 >= 8;
  FrequencyProblem space = det;
  if (have_space) {
    space.grid = make_grid(det.grid.dim, det.grid.extent, det.grid.n / 2);
    space.phi0 = Field(space.grid);
    const int n = det.grid.n;
    if (det.grid.dim == 1) {
      for (int i = 0; i < n / 2; ++i) space.phi0.v[i] = det.phi0.v[2 * i];
    } else {
      for (int i = 0; i < n / 2; ++i)
        for (int j = 0; j < n / 2; ++j)
          space.phi0.v[static_cast<std::size_t>(i) * (n / 2) + j] =
              det.phi0.v[static_cast<std::size_t>(2 * i) * n + 2 * j];
    }
  }

  const EnsembleSpec one{1, 0};
  const FrequencyTrace coarse_tr = frequency_trace(det, one);
  const FrequencyTrace fine_tr = frequency_trace(fine, one);
  const std::vector<double> none;
  const DhIdentityReport dh_c = check_dh_identity(coarse_tr, none);
  const DhIdentityReport dh_f = check_dh_identity(fine_tr, none);

  const int nodes = det.steps + 1;
  FrequencyAllowances out;
  out.dh.resize(nodes - 2);
  std::vector<double> dh_space(nodes - 2, 0.0);
  std::vector<double> margin_space(nodes - 2, 0.0);
  std::vector<double> seq_space(nodes - 1, 0.0);
  bool space_n_ok = false;
  if (have_space) {
    const FrequencyTrace space_tr = frequency_trace(space, one);
    const DhIdentityReport dh_s = check_dh_identity(space_tr, none);
    for (int k = 1; k + 1 < nodes; ++k)
      dh_space[k - 1] = std::abs(dh_s.residual[k - 1] - dh_c.residual[k - 1]);
    space_n_ok = true;
    for (int k = 0; k < nodes; ++k) space_n_ok = space_n_ok && space_tr.N_defined[k];
    if (space_n_ok) {
      const MonotonicityReport ms = check_monotonicity(space_tr, {}, {});
      const MonotonicityReport mc0 = check_monotonicity(coarse_tr, {}, {});
      for (int k = 1; k + 1 < nodes; ++k)
        margin_space[k - 1] = std::abs(ms.margin[k - 1] - mc0.margin[k - 1]);
      for (int k = 0; k + 1 < nodes; ++k)
        seq_space[k] = std::abs(ms.seq_increment[k] - mc0.seq_increment[k]);
    }
  }
  for (int k = 1; k + 1 < nodes; ++k) {
    const double c = dh_c.residual[k - 1];
    const double f = dh_f.residual[2 * k - 1]; // same time on the fine grid
    out.dh[k - 1] = 3.0 * std::abs(c - f) + dh_space[k - 1] + 1e-12 * (1.0 + std::abs(c));
  }

  const bool n_ok = [&]() {
    for (int k = 0; k < nodes; ++k)
      if (!coarse_tr.N_defined[k]) return false;
    for (int k = 0; k < 2 * det.steps + 1; ++k)
      if (!fine_tr.N_defined[k]) return false;
    return true;
  }();
  out.margin.assign(nodes - 2, 0.0);
  out.seq.assign(nodes - 1, 0.0);
  if (n_ok) {
    const MonotonicityReport mc = check_monotonicity(coarse_tr, {}, {});
    const MonotonicityReport mf = check_monotonicity(fine_tr, {}, {});
    for (int k = 1; k + 1 < nodes; ++k) {
      const double c = mc.margin[k - 1];
      const double f = mf.margin[2 * k - 1];
      out.margin[k - 1] =
          3.0 * std::abs(c - f) + margin_space[k - 1] + 1e-9 * (1.0 + std::abs(c));
    }
    for (int k = 0; k + 1 < nodes; ++k) {
      const double c = mc.seq_increment[k];
      const double f = mf.seq_increment[2 * k] + mf.seq_increment[2 * k + 1];
      out.seq[k] = 3.0 * std::abs(c - f) + seq_space[k] + 1e-9 * (1.0 + std::abs(c));
    }
  }
  return out;
}

} // namespace uclab
