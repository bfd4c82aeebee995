#pragma once

#include "uclab/grid.hpp"

#include <vector>

namespace uclab {

/// Fourier workspace for one grid: diagonalizes the periodic second-difference
/// Laplacian. Each instance owns its transform buffers, so create one per worker
/// thread; instances for the same grid produce bit-identical results.
class Spectral {
 public:
  explicit Spectral(const Grid& g);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }

  // Solve (I - dt * Lap_h) out = in.
  void implicit_heat(const double* in, double dt, double* out);

  // out = exp(t * Lap_h) in, the discrete heat semigroup; t >= 0.
  void semigroup(const double* in, double t, double* out);

  void implicit_heat(const std::vector<double>& in, double dt, std::vector<double>& out) {
    out.resize(in.size());
    implicit_heat(in.data(), dt, out.data());
  }
  void semigroup(const std::vector<double>& in, double t, std::vector<double>& out) {
    out.resize(in.size());
    semigroup(in.data(), t, out.data());
  }

  Field semigroup(const Field& f, double t);

  // Eigenvalue of -Lap_h for spectral bin index (kx, ky); ky ignored in 1-D.
  double eigenvalue(int kx, int ky = 0) const;

 private:
  struct Impl;
  Grid grid_;
  Impl* impl_;
};

} // namespace uclab
