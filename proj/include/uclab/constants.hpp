#pragma once

#include <stdexcept>

namespace uclab {

/// Explicit constants of the localized small-time estimate at observation
/// radius r and inflation delta in (0, 1]:
///   b1 = 4 (1 + delta)^2,  b2 = (1 + 3 delta/4)^2,  b3 = (1 + delta/2)^2,
///   c3 = (b2 - b3)(b3 - 1) r^2 / b1,
///   c4 = 4 ||grad eta||_inf^2 for the annulus cutoff eta,
///   c5 = 3 c3 + (b2 - b3 + 1)(b2 - b3) r^2 / b1,
/// with the chain 1 < b3 < b2 < b1 and c5 > c3 > 0.
struct H0Constants {
  double delta = 0.0;
  double r = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double c3 = 0.0, c4 = 0.0, c5 = 0.0;
  double c1 = 0.0; // calibrated local-energy constant (> 1)

  static H0Constants make(double delta, double r, double c1, double c4);
};

// grad-sup of the quintic annulus cutoff used between (1+3 delta/4) r and
// (1+delta) r, and the induced c4 = 4 ||grad eta||^2.
double eta_grad_sup(double delta, double r);
double c4_for(double delta, double r);

/// Output of the small-time quantity h0 and its stated properties.
struct H0Result {
  H0Constants constants;
  double denominator = 0.0;  // the bracket inverted in the h0 formula
  double h0 = 0.0;
  double ratio = 0.0;        // observed cylinder-to-ball ratio fed in
  double guard = 0.0;        // e^{2 c1 (1 + r^-2)(...)} * ratio
  bool guard_ok = false;
  double property_i_value = 0.0; // (1 + 4 c3/T + (2||a||+||b||^2) T + ||a||^{2/3} + ||b||^2) h0
  bool property_i_ok = false;    // 0 < value < c3
  bool h0_below_T = false;
  bool h0_below_tau2 = false;
};

// h0 = c3 / [ ln(1+c4) + (1 + 2 c1 (1 + 1/r^2))(1 + 1/(tau2-tau1) + ||a||^{2/3} + ||b||^2)
//             + 4 c3 / T + (2||a|| + ||b||^2) T + ln(ratio) ].
// Throws when the bracket is non-positive (possible only when the guard fails).
H0Result compute_h0(const H0Constants& c, double tau1, double tau2, double T, double a_sup,
                    double b_sup, double ratio);

} // namespace uclab
