#pragma once

// JSON encodings of results. Rationals are strings "p/q"; floating values are
// strings prefixed with "~" so that no bare float reaches a report.

#include <string>

#include "conekit/certify.hpp"
#include "conekit/families.hpp"
#include "conekit/varcalc.hpp"
#include "conekit_cli/instance.hpp"

namespace conekit::cli {

inline constexpr const char* kToolVersion = "0.3.0";

std::string q_str(const Q& q);
std::string approx(double v);
Json vec_json(const Vec& v);
Json mat_json(const Mat& m);

Json cone_json(const ConvexPolyCone& c);
Json cone_json(const ConeRep& c);
// Accepts {"generators": ...}, {"inequalities": ...} or {"pieces": [...]}.
ConeRep cone_from_json(const Json& j, std::size_t dim);

Json to_json(const ConeResult& r);
Json to_json(const ChipVerdict& v);
Json to_json(const QCVerdict& v);
Json to_json(const StrongChipReport& r);
Json to_json(const KKTCertificate& c);
Json to_json(const ShiftWitness& w);
Json to_json(const ExtremalCertificate& c);
Json to_json(const FrechetRep& r);
Json to_json(const ParetoDecision& d);
Json to_json(const ParetoCertificate& c);

// Indented human-readable rendering of a report document.
std::string render_text(const Json& report);

}  // namespace conekit::cli
