#include "uclab/timeset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uclab {

TimeSet::TimeSet(std::vector<std::pair<double, double>> intervals, double horizon)
    : horizon_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("TimeSet: horizon must be positive");
  for (auto& [a, b] : intervals) {
    if (!(a < b)) throw std::invalid_argument("TimeSet: empty or inverted interval");
    if (a < 0.0 || b > horizon)
      throw std::invalid_argument("TimeSet: interval outside (0, horizon)");
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.first <= intervals_.back().second) {
      intervals_.back().second = std::max(intervals_.back().second, iv.second);
    } else {
      intervals_.push_back(iv);
    }
  }
  if (!(measure() > 0.0)) throw std::invalid_argument("TimeSet: measure must be positive");
}

double TimeSet::measure() const {
  double m = 0.0;
  for (const auto& [a, b] : intervals_) m += b - a;
  return m;
}

double TimeSet::intersect_measure(double a, double b) const {
  if (!(a < b)) return 0.0;
  double m = 0.0;
  for (const auto& [l, r] : intervals_) {
    const double lo = std::max(a, l);
    const double hi = std::min(b, r);
    if (hi > lo) m += hi - lo;
  }
  return m;
}

double TimeSet::density_point() const {
  double best_len = -1.0;
  double best_mid = 0.0;
  for (const auto& [a, b] : intervals_) {
    if (b - a > best_len) {
      best_len = b - a;
      best_mid = 0.5 * (a + b);
    }
  }
  return best_mid;
}

double choose_kappa(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("choose_kappa: alpha must be positive");
  return std::sqrt((alpha + 2.0) / (alpha + 1.0));
}

namespace {

TelescopingSequence build_sequence(const TimeSet& E, double l, double l1, double kappa,
                                   double trunc_rel) {
  TelescopingSequence seq;
  seq.l = l;
  seq.l1 = l1;
  seq.kappa = kappa;
  const double T = E.horizon();
  const double span = l1 - l;
  int m = 1;
  for (;;) {
    const double lm = l + std::pow(kappa, 1.0 - m) * span;
    seq.values.push_back(lm);
    if (lm - l < trunc_rel * T || m > 100000) break;
    ++m;
  }
  seq.depth = static_cast<int>(seq.values.size());
  for (int i = 0; i + 1 < seq.depth; ++i) {
    const double gap = seq.values[i] - seq.values[i + 1];
    const double covered = E.intersect_measure(seq.values[i + 1], seq.values[i]);
    seq.gaps.push_back(gap);
    seq.covered.push_back(covered);
    seq.ok.push_back(gap <= 3.0 * covered ? 1 : 0);
  }
  return seq;
}

} // namespace

TelescopingSequence density_sequence(const TimeSet& E, double kappa, int search_points,
                                     double trunc_rel) {
  if (!(kappa > 1.0)) throw std::invalid_argument("density_sequence: kappa must exceed 1");
  const double l = E.density_point();
  const double T = E.horizon();
  if (!(l < T)) throw std::runtime_error("density_sequence: density point at the horizon");

  DensitySearchFailure best;
  best.worst_gap_ratio = std::numeric_limits<double>::infinity();
  // Descending geometric grid for l1 - l; larger spans tried first.
  const double full = T - l;
  const double shrink = std::pow(1e-6, 1.0 / std::max(1, search_points - 1));
  for (int s = 0; s < search_points; ++s) {
    const double span = full * 0.999 * std::pow(shrink, s);
    const double l1 = l + span;
    const TelescopingSequence seq = build_sequence(E, l, l1, kappa, trunc_rel);
    double worst = 0.0;
    int worst_m = 0;
    bool all_ok = true;
    for (int i = 0; i < static_cast<int>(seq.ok.size()); ++i) {
      if (!seq.ok[i]) all_ok = false;
      const double denom = 3.0 * seq.covered[i];
      const double ratio = denom > 0.0 ? seq.gaps[i] / denom
                                       : std::numeric_limits<double>::infinity();
      if (ratio > worst) {
        worst = ratio;
        worst_m = i + 1;
      }
    }
    if (all_ok) return seq;
    if (worst < best.worst_gap_ratio) {
      best.worst_gap_ratio = worst;
      best.best_l1 = l1;
      best.worst_m = worst_m;
    }
  }
  throw std::runtime_error(
      "density_sequence: no admissible l1 on the search grid; best candidate l1 = " +
      std::to_string(best.best_l1) + " violates the measure inequality at m = " +
      std::to_string(best.worst_m) + " with gap/(3 measure) = " +
      std::to_string(best.worst_gap_ratio));
}

double telescoped_sum(double alpha, double d, double kappa, const std::vector<double>& s, int M) {
  double sum = 0.0;
  for (int m = 1; m <= M; ++m) {
    const double w0 = std::exp(-(2.0 + alpha) * d * std::pow(kappa, 2.0 * m));
    const double w1 = std::exp(-(2.0 + alpha) * d * std::pow(kappa, 2.0 * m + 2.0));
    sum += w0 * s.at(2 * m) - w1 * s.at(2 * m + 2);
  }
  return sum;
}

double telescoped_sum_closed_form(double alpha, double d, double kappa,
                                  const std::vector<double>& s, int M) {
  const double head = std::exp(-(2.0 + alpha) * d * kappa * kappa) * s.at(2);
  const double tail = std::exp(-(2.0 + alpha) * d * std::pow(kappa, 2.0 * M + 2.0)) * s.at(2 * M + 2);
  return head - tail;
}

} // namespace uclab
