#include "doctest.h"

#include "uclab/ensemble.hpp"
#include "uclab/rng.hpp"

#include <cmath>

using namespace uclab;

TEST_CASE("path-independent integrand has zero SE") {
  EnsembleSpec spec{16, 5};
  const Estimate e = expect(spec, [](int) { return 2.5; });
  CHECK(e.mean == 2.5);
  CHECK(e.se == 0.0);
  CHECK(e.se_defined);
}

TEST_CASE("single path: mean defined, SE flagged undefined") {
  EnsembleSpec spec{1, 5};
  const Estimate e = expect(spec, [](int i) { return 3.0 + i; });
  CHECK(e.mean == 3.0);
  CHECK_FALSE(e.se_defined);
}

TEST_CASE("monte carlo moment check through the ensemble") {
  const double T = 0.5;
  EnsembleSpec spec{4000, 11};
  const Estimate e = expect(spec, [T](int i) {
    const auto p = sample_brownian(T, 8, 11, static_cast<std::uint64_t>(i));
    return p.w.back() * p.w.back();
  });
  CHECK(std::abs(e.mean - T) <= 3.0 * e.se);
}

TEST_CASE("reduction independent of worker count, including traces") {
  auto make_worker = []() {
    return PathSampler([](int i, std::span<double> out) {
      const auto p = sample_brownian(1.0, 32, 3, static_cast<std::uint64_t>(i));
      for (int k = 0; k < 8; ++k) out[k] = std::sin(p.w[4 * k] + i * 1e-3);
    });
  };
  set_worker_count(1);
  const TraceEstimate one = expect_trace(EnsembleSpec{129, 3}, 8, make_worker);
  set_worker_count(4);
  const TraceEstimate four = expect_trace(EnsembleSpec{129, 3}, 8, make_worker);
  set_worker_count(0);
  for (int k = 0; k < 8; ++k) {
    CHECK(one.mean[k] == four.mean[k]); // bit-identical
    CHECK(one.se[k] == four.se[k]);
  }
}

TEST_CASE("noise-free dynamics give an SE-free trace") {
  // b = 0 makes every per-path trajectory identical, so the trace SE vanishes
  // even though the values do not.
  auto make_worker = []() {
    return PathSampler([](int i, std::span<double> out) {
      const auto p = sample_brownian(0.5, 16, 4, static_cast<std::uint64_t>(i));
      // Integrand ignores the path, mimicking b = 0.
      for (int k = 0; k < 4; ++k) out[k] = std::exp(-0.3 * (k + 1)) * (void(p.w[0]), 1.0);
    });
  };
  const TraceEstimate t = expect_trace(EnsembleSpec{24, 4}, 4, make_worker);
  for (int k = 0; k < 4; ++k) {
    CHECK(t.mean[k] > 0.0);
    CHECK(t.se[k] == 0.0);
  }
}

TEST_CASE("zero integrand gives an all-zero trace") {
  const TraceEstimate t = expect_trace(EnsembleSpec{7, 1}, 5, []() {
    return PathSampler([](int, std::span<double> out) {
      for (auto& v : out) v = 0.0;
    });
  });
  for (int k = 0; k < 5; ++k) {
    CHECK(t.mean[k] == 0.0);
    CHECK(t.se[k] == 0.0);
  }
}

TEST_CASE("failures aggregate with path indices") {
  EnsembleSpec spec{8, 1};
  try {
    expect(spec, [](int i) -> double {
      if (i == 3 || i == 5) throw std::runtime_error("boom");
      return 1.0;
    });
    CHECK(false);
  } catch (const EnsembleError& e) {
    CHECK(e.failed_paths.size() == 2);
  }
}
