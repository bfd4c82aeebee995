#include "uclab/constants.hpp"

#include <cmath>

namespace uclab {

H0Constants H0Constants::make(double delta, double r, double c1, double c4) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("H0Constants: delta must lie in (0, 1]");
  if (!(r > 0.0)) throw std::invalid_argument("H0Constants: r must be positive");
  if (!(c1 > 1.0)) throw std::invalid_argument("H0Constants: c1 must exceed 1");
  if (!(c4 > 0.0)) throw std::invalid_argument("H0Constants: c4 must be positive");
  H0Constants c;
  c.delta = delta;
  c.r = r;
  c.c1 = c1;
  c.c4 = c4;
  c.b1 = 4.0 * (1.0 + delta) * (1.0 + delta);
  c.b2 = (1.0 + 0.75 * delta) * (1.0 + 0.75 * delta);
  c.b3 = (1.0 + 0.5 * delta) * (1.0 + 0.5 * delta);
  c.c3 = (c.b2 - c.b3) * (c.b3 - 1.0) * r * r / c.b1;
  c.c5 = 3.0 * c.c3 + (c.b2 - c.b3 + 1.0) * (c.b2 - c.b3) * r * r / c.b1;
  return c;
}

double eta_grad_sup(double delta, double r) {
  const double inner = (1.0 + 0.75 * delta) * r;
  const double outer = (1.0 + delta) * r;
  return 1.875 / (outer - inner);
}

double c4_for(double delta, double r) {
  const double s = eta_grad_sup(delta, r);
  return 4.0 * s * s;
}

H0Result compute_h0(const H0Constants& c, double tau1, double tau2, double T, double a_sup,
                    double b_sup, double ratio) {
  if (!(0.0 < tau1 && tau1 < tau2 && tau2 < T))
    throw std::invalid_argument("compute_h0: need 0 < tau1 < tau2 < T");
  if (!(ratio > 0.0)) throw std::invalid_argument("compute_h0: observed ratio must be positive");

  const double b2 = b_sup * b_sup;
  const double a23 = std::pow(a_sup, 2.0 / 3.0);
  const double norm_bracket = 1.0 + 1.0 / (tau2 - tau1) + a23 + b2;

  H0Result out;
  out.constants = c;
  out.ratio = ratio;
  out.guard = std::exp(2.0 * c.c1 * (1.0 + 1.0 / (c.r * c.r)) * norm_bracket) * ratio;
  out.guard_ok = out.guard >= 1.0;

  out.denominator = std::log1p(c.c4) +
                    (1.0 + 2.0 * c.c1 * (1.0 + 1.0 / (c.r * c.r))) * norm_bracket +
                    4.0 * c.c3 / T + (2.0 * a_sup + b2) * T + std::log(ratio);
  if (!(out.denominator > 0.0))
    throw std::runtime_error("compute_h0: ratio inconsistent with the local energy bound "
                             "(non-positive denominator)");
  out.h0 = c.c3 / out.denominator;
  out.property_i_value = (1.0 + 4.0 * c.c3 / T + (2.0 * a_sup + b2) * T + a23 + b2) * out.h0;
  out.property_i_ok = out.property_i_value > 0.0 && out.property_i_value < c.c3;
  out.h0_below_T = out.h0 < T;
  out.h0_below_tau2 = out.h0 < tau2;
  return out;
}

} // namespace uclab
