#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace uclab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
/// A draw is a pure function of (seed, stream, block): no state, so path i of an
/// ensemble can be produced on any worker in any order with identical bits.
struct Philox {
  std::uint32_t key0, key1;

  explicit Philox(std::uint64_t seed)
      : key0(static_cast<std::uint32_t>(seed)), key1(static_cast<std::uint32_t>(seed >> 32)) {}

  std::array<std::uint32_t, 4> block(std::uint64_t stream, std::uint64_t counter) const;

  // Two iid uniforms in (0,1) from one block.
  std::array<double, 2> uniform2(std::uint64_t stream, std::uint64_t counter) const;

  // Two iid standard normals (Box-Muller) from one block.
  std::array<double, 2> normal2(std::uint64_t stream, std::uint64_t counter) const;
};

// `count` iid standard normals for (seed, stream), blocks 0..ceil(count/2)-1.
std::vector<double> standard_normals(std::uint64_t seed, std::uint64_t stream, std::size_t count);

/// One sampled Brownian path on [0, T] with uniform steps.
struct BrownianPath {
  double horizon = 0.0;      // T
  int steps = 0;             // K
  std::uint64_t seed = 0;    // base seed
  std::uint64_t stream = 0;  // per-path stream index
  std::vector<double> dw;    // K increments, Normal(0, T/K)
  std::vector<double> w;     // K+1 cumulative values, w[0] = 0

  double dt() const { return horizon / steps; }
};

BrownianPath sample_brownian(double T, int steps, std::uint64_t seed, std::uint64_t stream = 0);

// Same Brownian motion on a grid coarsened by an integer factor (increments summed).
BrownianPath coarsen(const BrownianPath& fine, int factor);

} // namespace uclab
