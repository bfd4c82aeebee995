#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace uclab {

/// One verified inequality or fitted-exponent statement.
struct InequalityReport {
  std::string id;            // experiment kind / estimate name
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;        // lhs / rhs (0 when rhs = 0 and lhs = 0)
  std::optional<double> exponent; // fitted theta or gamma when applicable
  double se = 0.0;           // propagated MC standard error of the lead quantity
  double tolerance = 0.0;
  bool pass = false;
  bool vacuous = false;      // degenerate inputs (zero data), recorded not asserted
  std::string note;
  nlohmann::json details;    // per-node tables, fitted constants, flags

  nlohmann::json to_json() const;
};

// pass iff lhs <= rhs * (1 + tolerance); handles the 0/0 vacuous case.
InequalityReport make_bound_report(std::string id, double lhs, double rhs, double se,
                                   double tolerance);

// pass iff exponent in (lo, hi).
InequalityReport make_exponent_report(std::string id, double exponent, double lo, double hi);

// FNV-1a digest of a canonical string; used for the inputs-digest field.
std::uint64_t fnv1a(const std::string& s);
std::string digest_hex(const std::string& s);

} // namespace uclab
