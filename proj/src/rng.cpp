#include "uclab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace uclab {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void round_once(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t n0 = hi1 ^ ctr[1] ^ k0;
  const std::uint32_t n1 = lo1;
  const std::uint32_t n2 = hi0 ^ ctr[3] ^ k1;
  const std::uint32_t n3 = lo0;
  ctr[0] = n0;
  ctr[1] = n1;
  ctr[2] = n2;
  ctr[3] = n3;
}

inline double u64_to_unit(std::uint64_t x) {
  // 53-bit mantissa, shifted off zero so logs are safe.
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t stream, std::uint64_t counter) const {
  std::uint32_t ctr[4] = {static_cast<std::uint32_t>(counter),
                          static_cast<std::uint32_t>(counter >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t k0 = key0, k1 = key1;
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k0, k1);
    k0 += kWeylA;
    k1 += kWeylB;
  }
  return {ctr[0], ctr[1], ctr[2], ctr[3]};
}

std::array<double, 2> Philox::uniform2(std::uint64_t stream, std::uint64_t counter) const {
  const auto b = block(stream, counter);
  const std::uint64_t x = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  const std::uint64_t y = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
  return {u64_to_unit(x), u64_to_unit(y)};
}

std::array<double, 2> Philox::normal2(std::uint64_t stream, std::uint64_t counter) const {
  const auto u = uniform2(stream, counter);
  const double rad = std::sqrt(-2.0 * std::log(u[0]));
  const double ang = 2.0 * M_PI * u[1];
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

std::vector<double> standard_normals(std::uint64_t seed, std::uint64_t stream, std::size_t count) {
  Philox gen(seed);
  std::vector<double> z(count);
  for (std::size_t b = 0; 2 * b < count; ++b) {
    const auto pair = gen.normal2(stream, b);
    z[2 * b] = pair[0];
    if (2 * b + 1 < count) z[2 * b + 1] = pair[1];
  }
  return z;
}

BrownianPath sample_brownian(double T, int steps, std::uint64_t seed, std::uint64_t stream) {
  if (!(T > 0.0)) throw std::invalid_argument("sample_brownian: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("sample_brownian: steps must be >= 1");
  BrownianPath p;
  p.horizon = T;
  p.steps = steps;
  p.seed = seed;
  p.stream = stream;
  p.dw = standard_normals(seed, stream, static_cast<std::size_t>(steps));
  const double sdt = std::sqrt(T / steps);
  for (double& z : p.dw) z *= sdt;
  p.w.resize(steps + 1);
  p.w[0] = 0.0;
  for (int k = 0; k < steps; ++k) p.w[k + 1] = p.w[k] + p.dw[k];
  return p;
}

BrownianPath coarsen(const BrownianPath& fine, int factor) {
  if (factor < 1 || fine.steps % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide the step count");
  BrownianPath p;
  p.horizon = fine.horizon;
  p.steps = fine.steps / factor;
  p.seed = fine.seed;
  p.stream = fine.stream;
  p.dw.resize(p.steps);
  for (int k = 0; k < p.steps; ++k) {
    double s = 0.0;
    for (int j = 0; j < factor; ++j) s += fine.dw[k * factor + j];
    p.dw[k] = s;
  }
  p.w.resize(p.steps + 1);
  p.w[0] = 0.0;
  for (int k = 0; k < p.steps; ++k) p.w[k + 1] = p.w[k] + p.dw[k];
  return p;
}

} // namespace uclab
