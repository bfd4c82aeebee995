#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace uclab {

/// Periodic lattice truncating R^N (N = 1 or 2) to a torus of side `extent`,
/// with the origin on a node. Immutable after construction.
struct Grid {
  int dim = 1;          // 1 or 2
  int n = 0;            // points per axis (even, >= 8)
  double extent = 0.0;  // torus side length L
  double spacing = 0.0; // h = L / n

  std::size_t node_count() const {
    return dim == 1 ? static_cast<std::size_t>(n)
                    : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }

  // Node coordinate along one axis; index n/2 is the origin.
  double coord(int i) const { return (i - n / 2) * spacing; }

  // Coordinates of a flat node index (row-major in 2-D; second entry 0 in 1-D).
  std::array<double, 2> node(std::size_t idx) const {
    if (dim == 1) return {coord(static_cast<int>(idx)), 0.0};
    return {coord(static_cast<int>(idx / n)), coord(static_cast<int>(idx % n))};
  }

  // Signed minimal-image difference a - b on the torus, in [-L/2, L/2].
  double torus_delta(double a, double b) const;

  // Torus (min-image) squared Euclidean distance between x and y.
  double torus_dist2(const std::array<double, 2>& x, const std::array<double, 2>& y) const;

  // Torus Chebyshev (max-axis) distance, used for cube membership.
  double torus_dist_inf(const std::array<double, 2>& x, const std::array<double, 2>& y) const;

  bool operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && extent == o.extent;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

Grid make_grid(int dim, double extent, int points_per_axis);

/// Spatial sample of a scalar function on a grid.
struct Field {
  Grid grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), v(g.node_count(), 0.0) {}
  Field(const Grid& g, std::vector<double> values);

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

Field field_from_function(const Grid& g,
                          const std::function<double(std::array<double, 2>)>& f);

/// Boolean node-inclusion set with quadrature measure (included count * h^dim).
struct Mask {
  Grid grid;
  std::vector<std::uint8_t> in;
  std::size_t count = 0;

  Mask() = default;
  explicit Mask(const Grid& g) : grid(g), in(g.node_count(), 0) {}

  double measure() const;
  bool contains(std::size_t i) const { return in[i] != 0; }
};

Mask full_mask(const Grid& g);
// Closed torus ball {x : |x - center| <= radius}; requires 0 <= radius < L/2.
Mask ball_mask(const Grid& g, const std::array<double, 2>& center, double radius);
// Closed axis-aligned cube of half-side R (the smallest cube containing B_R).
Mask cube_mask(const Grid& g, const std::array<double, 2>& center, double half_side);
// Centered cube of half the extent per axis; complement measures truncation leakage.
Mask inner_half_mask(const Grid& g);
Mask mask_union(const Mask& a, const Mask& b);
Mask mask_complement(const Mask& m);

/// Partition of the torus into axis-aligned cubes of side 2R, nodes assigned
/// half-open per axis so interiors are exactly disjoint.
struct Tiling {
  Grid grid;
  double half_side = 0.0; // R
  std::vector<std::array<double, 2>> centers;
  std::vector<Mask> cubes;
};

Tiling cube_tiling(const Grid& g, double half_side);

// Observation region of a tiling: union of balls B_r(x_i) over the cube centers.
Mask tiling_ball_union(const Tiling& t, double r);

// Deterministic pairwise (fixed-shape) summation.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

// Quadrature: sum over included nodes of value * h^dim. Full grid if mask null.
double integrate(const Field& f, const Mask* mask = nullptr);
double integrate(const Field& f, const Mask& mask);

// Standard second-difference Laplacian with periodic wrap.
Field laplacian(const Field& f);
void laplacian_into(const Grid& g, const double* f, double* out);

// Centered-difference gradient with periodic wrap; component d >= dim is zero.
std::array<Field, 2> gradient(const Field& f);
void gradient_axis_into(const Grid& g, const double* f, int axis, double* out);

} // namespace uclab
