#include "uclab/reports.hpp"

#include <cmath>
#include <sstream>

namespace uclab {

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j;
  j["lemma"] = id;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["ratio"] = ratio;
  if (exponent)
    j["exponent"] = *exponent;
  else
    j["exponent"] = nullptr;
  j["se"] = se;
  j["tolerance"] = tolerance;
  j["verdict"] = pass ? "pass" : "fail";
  j["vacuous"] = vacuous;
  if (!note.empty()) j["note"] = note;
  if (!details.is_null()) j["details"] = details;
  return j;
}

InequalityReport make_bound_report(std::string id, double lhs, double rhs, double se,
                                   double tolerance) {
  InequalityReport r;
  r.id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.se = se;
  r.tolerance = tolerance;
  if (rhs == 0.0 && lhs == 0.0) {
    r.ratio = 0.0;
    r.pass = true;
    r.vacuous = true;
    r.note = "degenerate (both sides zero)";
    return r;
  }
  r.ratio = rhs != 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  r.pass = lhs <= rhs * (1.0 + tolerance);
  return r;
}

InequalityReport make_exponent_report(std::string id, double exponent, double lo, double hi) {
  InequalityReport r;
  r.id = std::move(id);
  r.exponent = exponent;
  r.pass = std::isfinite(exponent) && exponent > lo && exponent < hi;
  return r;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(const std::string& s) {
  std::ostringstream os;
  os << std::hex << fnv1a(s);
  return os.str();
}

} // namespace uclab
