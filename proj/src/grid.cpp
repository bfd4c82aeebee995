#include "uclab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace uclab {

double Grid::torus_delta(double a, double b) const {
  double d = std::remainder(a - b, extent);
  return d;
}

double Grid::torus_dist2(const std::array<double, 2>& x, const std::array<double, 2>& y) const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    double d = torus_delta(x[a], y[a]);
    s += d * d;
  }
  return s;
}

double Grid::torus_dist_inf(const std::array<double, 2>& x, const std::array<double, 2>& y) const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s = std::max(s, std::abs(torus_delta(x[a], y[a])));
  return s;
}

Grid make_grid(int dim, double extent, int points_per_axis) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("make_grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (!(extent > 0.0))
    throw std::invalid_argument("make_grid: extent must be positive");
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw std::invalid_argument("make_grid: points_per_axis must be even and >= 8, got " +
                                std::to_string(points_per_axis));
  Grid g;
  g.dim = dim;
  g.n = points_per_axis;
  g.extent = extent;
  g.spacing = extent / points_per_axis;
  return g;
}

Field::Field(const Grid& g, std::vector<double> values) : grid(g), v(std::move(values)) {
  if (v.size() != g.node_count())
    throw std::invalid_argument("Field: value count does not match grid");
}

Field field_from_function(const Grid& g,
                          const std::function<double(std::array<double, 2>)>& f) {
  Field out(g);
  const std::size_t m = g.node_count();
  for (std::size_t i = 0; i < m; ++i) out.v[i] = f(g.node(i));
  return out;
}

double Mask::measure() const {
  return static_cast<double>(count) * std::pow(grid.spacing, grid.dim);
}

Mask full_mask(const Grid& g) {
  Mask m(g);
  std::fill(m.in.begin(), m.in.end(), std::uint8_t(1));
  m.count = g.node_count();
  return m;
}

Mask ball_mask(const Grid& g, const std::array<double, 2>& center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("ball_mask: negative radius");
  if (!(radius < g.extent / 2.0))
    throw std::invalid_argument("ball_mask: radius must be < extent/2 (torus wrap ambiguity)");
  Mask m(g);
  const double r2 = radius * radius;
  const std::size_t nn = g.node_count();
  for (std::size_t i = 0; i < nn; ++i) {
    if (g.torus_dist2(g.node(i), center) <= r2) {
      m.in[i] = 1;
      ++m.count;
    }
  }
  return m;
}

Mask cube_mask(const Grid& g, const std::array<double, 2>& center, double half_side) {
  if (half_side < 0.0) throw std::invalid_argument("cube_mask: negative half_side");
  if (!(half_side < g.extent / 2.0))
    throw std::invalid_argument("cube_mask: half_side must be < extent/2");
  Mask m(g);
  const std::size_t nn = g.node_count();
  for (std::size_t i = 0; i < nn; ++i) {
    if (g.torus_dist_inf(g.node(i), center) <= half_side) {
      m.in[i] = 1;
      ++m.count;
    }
  }
  return m;
}

Mask inner_half_mask(const Grid& g) {
  Mask m(g);
  const double half = g.extent / 4.0;
  const std::size_t nn = g.node_count();
  const std::array<double, 2> origin{0.0, 0.0};
  for (std::size_t i = 0; i < nn; ++i) {
    if (g.torus_dist_inf(g.node(i), origin) <= half) {
      m.in[i] = 1;
      ++m.count;
    }
  }
  return m;
}

Mask mask_union(const Mask& a, const Mask& b) {
  if (a.grid != b.grid) throw std::invalid_argument("mask_union: grid mismatch");
  Mask m(a.grid);
  for (std::size_t i = 0; i < m.in.size(); ++i) {
    m.in[i] = (a.in[i] || b.in[i]) ? 1 : 0;
    m.count += m.in[i];
  }
  return m;
}

Mask mask_complement(const Mask& a) {
  Mask m(a.grid);
  for (std::size_t i = 0; i < m.in.size(); ++i) {
    m.in[i] = a.in[i] ? 0 : 1;
    m.count += m.in[i];
  }
  return m;
}

Tiling cube_tiling(const Grid& g, double half_side) {
  if (!(half_side > 0.0)) throw std::invalid_argument("cube_tiling: half_side must be positive");
  const double side = 2.0 * half_side;
  const int m = static_cast<int>(std::lround(g.extent / side));
  if (m < 1 || std::abs(m * side - g.extent) > g.spacing)
    throw std::invalid_argument("cube_tiling: 2R does not divide the extent (within one spacing)");
  if (g.n % m != 0)
    throw std::invalid_argument("cube_tiling: cube side is not a whole number of spacings");
  const int s = g.n / m; // nodes per cube per axis
  if (s < 2) throw std::invalid_argument("cube_tiling: fewer than 2 nodes per cube per axis");

  Tiling t;
  t.grid = g;
  t.half_side = half_side;
  const int blocks = g.dim == 1 ? m : m * m;
  t.centers.reserve(blocks);
  t.cubes.reserve(blocks);
  for (int bx = 0; bx < m; ++bx) {
    const double cx = g.coord(bx * s) + half_side;
    if (g.dim == 1) {
      Mask mask(g);
      for (int i = bx * s; i < (bx + 1) * s; ++i) {
        mask.in[i] = 1;
        ++mask.count;
      }
      t.centers.push_back({cx, 0.0});
      t.cubes.push_back(std::move(mask));
    } else {
      for (int by = 0; by < m; ++by) {
        const double cy = g.coord(by * s) + half_side;
        Mask mask(g);
        for (int i = bx * s; i < (bx + 1) * s; ++i)
          for (int j = by * s; j < (by + 1) * s; ++j) {
            mask.in[static_cast<std::size_t>(i) * g.n + j] = 1;
            ++mask.count;
          }
        t.centers.push_back({cx, cy});
        t.cubes.push_back(std::move(mask));
      }
    }
  }
  return t;
}

Mask tiling_ball_union(const Tiling& t, double r) {
  Mask acc(t.grid);
  for (const auto& c : t.centers) {
    Mask b = ball_mask(t.grid, c, r);
    for (std::size_t i = 0; i < acc.in.size(); ++i)
      if (b.in[i] && !acc.in[i]) {
        acc.in[i] = 1;
        ++acc.count;
      }
  }
  return acc;
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

double integrate(const Field& f, const Mask* mask) {
  const double cell = std::pow(f.grid.spacing, f.grid.dim);
  if (!mask) return pairwise_sum(f.v) * cell;
  if (mask->grid != f.grid) throw std::invalid_argument("integrate: field/mask grid mismatch");
  std::vector<double> vals;
  vals.reserve(mask->count);
  for (std::size_t i = 0; i < f.v.size(); ++i)
    if (mask->in[i]) vals.push_back(f.v[i]);
  return pairwise_sum(vals) * cell;
}

double integrate(const Field& f, const Mask& mask) { return integrate(f, &mask); }

void laplacian_into(const Grid& g, const double* f, double* out) {
  const int n = g.n;
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const int l = i == 0 ? n - 1 : i - 1;
      const int r = i == n - 1 ? 0 : i + 1;
      out[i] = (f[l] - 2.0 * f[i] + f[r]) * ih2;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const int iu = (i == 0 ? n - 1 : i - 1) * n;
      const int id = (i == n - 1 ? 0 : i + 1) * n;
      const int ic = i * n;
      for (int j = 0; j < n; ++j) {
        const int jl = j == 0 ? n - 1 : j - 1;
        const int jr = j == n - 1 ? 0 : j + 1;
        out[ic + j] = (f[iu + j] + f[id + j] + f[ic + jl] + f[ic + jr] - 4.0 * f[ic + j]) * ih2;
      }
    }
  }
}

Field laplacian(const Field& f) {
  Field out(f.grid);
  laplacian_into(f.grid, f.v.data(), out.v.data());
  return out;
}

void gradient_axis_into(const Grid& g, const double* f, int axis, double* out) {
  const int n = g.n;
  const double i2h = 1.0 / (2.0 * g.spacing);
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const int l = i == 0 ? n - 1 : i - 1;
      const int r = i == n - 1 ? 0 : i + 1;
      out[i] = (f[r] - f[l]) * i2h;
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    const int iu = (i == 0 ? n - 1 : i - 1) * n;
    const int id = (i == n - 1 ? 0 : i + 1) * n;
    const int ic = i * n;
    for (int j = 0; j < n; ++j) {
      if (axis == 0) {
        out[ic + j] = (f[id + j] - f[iu + j]) * i2h;
      } else {
        const int jl = j == 0 ? n - 1 : j - 1;
        const int jr = j == n - 1 ? 0 : j + 1;
        out[ic + j] = (f[ic + jr] - f[ic + jl]) * i2h;
      }
    }
  }
}

std::array<Field, 2> gradient(const Field& f) {
  std::array<Field, 2> out{Field(f.grid), Field(f.grid)};
  gradient_axis_into(f.grid, f.v.data(), 0, out[0].v.data());
  if (f.grid.dim == 2) gradient_axis_into(f.grid, f.v.data(), 1, out[1].v.data());
  return out;
}

} // namespace uclab
