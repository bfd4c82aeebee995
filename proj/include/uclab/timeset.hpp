#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace uclab {

/// Finite union of disjoint open intervals inside (0, T). Construction sorts
/// and merges overlapping pieces, so the stored form is canonical.
class TimeSet {
 public:
  TimeSet(std::vector<std::pair<double, double>> intervals, double horizon);

  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
  double horizon() const { return horizon_; }
  double measure() const;

  // Exact interval-arithmetic measure of E intersected with (a, b).
  double intersect_measure(double a, double b) const;

  // Midpoint of the largest component (the default density point).
  double density_point() const;

 private:
  std::vector<std::pair<double, double>> intervals_;
  double horizon_ = 0.0;
};

// kappa = sqrt((alpha + 2)/(alpha + 1)); alpha = theta/(1 - theta) must be > 0.
double choose_kappa(double alpha);

/// Geometric accumulation times l_m = l + kappa^{1-m} (l1 - l) toward a density
/// point l of E, retained down to l_m - l < trunc_rel * T, each gap covered by
/// the set: l_m - l_{m+1} <= 3 |E cap (l_{m+1}, l_m)|.
struct TelescopingSequence {
  double l = 0.0;
  double l1 = 0.0;
  double kappa = 0.0;
  int depth = 0;                 // retained m = 1..depth
  std::vector<double> values;    // l_1..l_depth
  std::vector<double> gaps;      // l_m - l_{m+1}
  std::vector<double> covered;   // |E cap (l_{m+1}, l_m)|
  std::vector<std::uint8_t> ok;  // gap <= 3 covered
};

struct DensitySearchFailure {
  double best_l1 = 0.0;
  double worst_gap_ratio = 0.0; // max over m of gap / (3 covered)
  int worst_m = 0;
};

// Searches l1 over a descending geometric grid in (l, T); returns the first
// candidate whose whole retained sequence satisfies the measure inequality.
// Throws std::runtime_error carrying best-violation diagnostics on failure.
TelescopingSequence density_sequence(const TimeSet& E, double kappa, int search_points = 200,
                                     double trunc_rel = 1e-9);

// Sum over m' = 1..M of e^{-(2+alpha) d k^{2m'}} s_{2m'} - e^{-(2+alpha) d k^{2m'+2}} s_{2m'+2}
// for a sequence s indexed from 0; the telescoping identity says this equals
// the first retained term minus the tail term.
double telescoped_sum(double alpha, double d, double kappa, const std::vector<double>& s, int M);
double telescoped_sum_closed_form(double alpha, double d, double kappa,
                                  const std::vector<double>& s, int M);

} // namespace uclab
