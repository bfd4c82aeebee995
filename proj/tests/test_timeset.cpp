#include "doctest.h"

#include <stdexcept>

#include "uclab/rng.hpp"
#include "uclab/timeset.hpp"

#include <cmath>

using namespace uclab;

TEST_CASE("intersect_measure by hand") {
  const TimeSet E({{0.1, 0.3}, {0.5, 0.6}}, 1.0);
  CHECK(E.measure() == doctest::Approx(0.3).epsilon(1e-15));
  // (0.2, 0.55): picks up (0.2,0.3) and (0.5,0.55) = 0.15
  CHECK(E.intersect_measure(0.2, 0.55) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(E.intersect_measure(0.35, 0.45) == 0.0);
  CHECK(E.intersect_measure(0.0, 1.0) == doctest::Approx(E.measure()).epsilon(1e-15));
}

TEST_CASE("time set canonicalization and validation") {
  const TimeSet merged({{0.1, 0.3}, {0.2, 0.4}}, 1.0);
  CHECK(merged.intervals().size() == 1);
  CHECK(merged.measure() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(TimeSet({{0.5, 0.4}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSet({{0.5, 1.4}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSet({}, 1.0), std::invalid_argument);
  CHECK(merged.density_point() == doctest::Approx(0.25));
}

TEST_CASE("choose_kappa values and identity") {
  // theta = 1/2 -> alpha = 1 -> kappa = sqrt(3/2)
  CHECK(choose_kappa(1.0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(choose_kappa(2.0) == doctest::Approx(1.1547005383792515).epsilon(1e-12));
  for (double alpha : {0.1, 0.7, 1.0, 3.0, 25.0}) {
    const double k = choose_kappa(alpha);
    CHECK(std::abs(k * k * (alpha + 1.0) - (alpha + 2.0)) < 1e-14);
    CHECK(k > 1.0);
  }
  // alpha -> infinity pushes kappa to 1+
  CHECK(choose_kappa(1e9) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(choose_kappa(0.0), std::invalid_argument);
  CHECK_THROWS_AS(choose_kappa(-1.0), std::invalid_argument);
}

TEST_CASE("density sequence on the full interval") {
  const TimeSet E({{1e-12, 1.0 - 1e-12}}, 1.0);
  const TelescopingSequence seq = density_sequence(E, 1.2247448713915890);
  CHECK(seq.depth > 10);
  for (std::size_t i = 0; i < seq.ok.size(); ++i) {
    CHECK(seq.ok[i] == 1);
    // full-measure set: |E cap gap| = gap, slack factor 3
    CHECK(seq.gaps[i] <= 3.0 * seq.covered[i]);
    CHECK(seq.gaps[i] >= 0.999 * seq.covered[i]);
  }
}

TEST_CASE("density sequence on a two-interval set") {
  const TimeSet E({{0.1, 0.3}, {0.5, 0.6}}, 1.0);
  const double kappa = 1.2247448713915890;
  const TelescopingSequence seq = density_sequence(E, kappa);
  CHECK(seq.l == doctest::Approx(0.2));
  CHECK(seq.l1 > seq.l);
  CHECK(seq.l1 < 1.0);
  for (std::size_t i = 0; i < seq.ok.size(); ++i) CHECK(seq.ok[i] == 1);
  // geometric structure is exact by construction
  for (int m = 1; m <= seq.depth; ++m)
    CHECK((seq.values[m - 1] - seq.l) ==
          doctest::Approx(std::pow(kappa, 1.0 - m) * (seq.l1 - seq.l)).epsilon(1e-15));
  CHECK_THROWS_AS(density_sequence(E, 1.0), std::invalid_argument);
}

TEST_CASE("telescoped sum equals its closed form on synthetic sequences") {
  const Philox gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = 0.2 + 2.0 * gen.uniform2(trial, 0)[0];
    const double kappa = choose_kappa(alpha);
    const double d = 0.01 + gen.uniform2(trial, 1)[0];
    std::vector<double> s(64);
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = 10.0 * gen.uniform2(trial, 100 + i)[0] - 5.0;
    const int M = 20;
    const double direct = telescoped_sum(alpha, d, kappa, s, M);
    const double closed = telescoped_sum_closed_form(alpha, d, kappa, s, M);
    // telescoping in exact arithmetic; roundoff only
    CHECK(std::abs(direct - closed) <= 1e-12 * (1.0 + std::abs(closed)));
  }
}
