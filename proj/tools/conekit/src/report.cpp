#include "conekit_cli/report.hpp"

#include <cstdio>
#include <sstream>

namespace conekit::cli {

std::string q_str(const Q& q) { return to_string(q); }

std::string approx(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "~%.6g", v);
  return buf;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (const Q& q : v) a.push_back(q_str(q));
  return a;
}

Json mat_json(const Mat& m) {
  Json a = Json::array();
  for (const Vec& r : m) a.push_back(vec_json(r));
  return a;
}

static Json opt_vec(const std::optional<Vec>& v) { return v ? vec_json(*v) : Json(nullptr); }

Json cone_json(const ConvexPolyCone& c0) {
  ConvexPolyCone c = dd_convert(c0);
  Json j;
  j["lines"] = mat_json(c.lines());
  j["rays"] = mat_json(c.rays());
  j["inequalities"] = mat_json(c.inequalities);
  j["text"] = serialize(c);
  return j;
}

Json cone_json(const ConeRep& c) {
  Json j;
  j["dim"] = c.dim();
  Json ps = Json::array();
  for (const ConvexPolyCone& p : c.pieces) ps.push_back(cone_json(p));
  j["pieces"] = std::move(ps);
  j["exact"] = c.exact;
  return j;
}

static ConvexPolyCone piece_from_json(const Json& j, std::size_t dim) {
  if (j.contains("generators")) return ConvexPolyCone::from_generators(dim, json_mat(j.at("generators"), "generators"));
  if (j.contains("inequalities"))
    return ConvexPolyCone::from_inequalities(dim, json_mat(j.at("inequalities"), "inequalities"));
  if (j.contains("rays") || j.contains("lines")) {
    Mat g;
    if (j.contains("lines"))
      for (const Vec& l : json_mat(j.at("lines"), "lines")) {
        g.push_back(l);
        g.push_back(neg(l));
      }
    if (j.contains("rays"))
      for (const Vec& r : json_mat(j.at("rays"), "rays")) g.push_back(r);
    return ConvexPolyCone::from_generators(dim, std::move(g));
  }
  throw InstanceError("cone: expected generators, inequalities, rays/lines or pieces");
}

ConeRep cone_from_json(const Json& j, std::size_t dim) {
  if (j.is_object() && j.contains("pieces")) {
    std::vector<ConvexPolyCone> ps;
    for (const Json& p : j.at("pieces")) ps.push_back(piece_from_json(p, dim));
    return ConeRep(std::move(ps));
  }
  return ConeRep(piece_from_json(j, dim));
}

Json to_json(const ConeResult& r) {
  Json j;
  j["cone"] = cone_json(r.cone);
  j["exact"] = r.exact;
  j["method"] = to_string(r.method);
  if (r.grid) {
    Json t = Json::array();
    for (double v : r.grid->t) t.push_back(approx(v));
    j["grid"] = {{"t", t},
                 {"directions", r.grid->directions},
                 {"angular_tolerance_deg", approx(r.grid->angular_tolerance_deg)},
                 {"seed", r.grid->seed}};
  }
  return j;
}

Json to_json(const ChipVerdict& v) {
  Json j;
  j["property"] = "chip";
  j["holds"] = to_string(v.holds);
  j["at_truncation"] = to_string(v.at_truncation);
  j["K_used"] = v.K_used;
  j["witness"] = opt_vec(v.witness);
  j["method"] = v.method;
  j["exact"] = v.exact;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Json to_json(const QCVerdict& v) {
  Json j;
  j["property"] = v.condition;
  j["holds"] = to_string(v.holds);
  j["K_used"] = v.K_used;
  j["witness"] = opt_vec(v.witness);
  if (!v.combination.empty()) j["combination"] = mat_json(v.combination);
  if (v.certificate_point) j["certificate_point"] = vec_json(*v.certificate_point);
  j["method"] = v.method;
  j["exact"] = v.exact;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Json to_json(const StrongChipReport& r) {
  Json j;
  j["property"] = "asymptotic-strong-chip";
  j["holds"] = to_string(r.holds);
  j["K_used"] = r.K_used;
  j["witness"] = opt_vec(r.witness);
  j["normal_cone_of_intersection"] = cone_json(r.lhs);
  j["closed_hull_of_normals"] = cone_json(r.rhs);
  j["limit_directions"] = mat_json(r.limit_directions);
  j["method"] = r.method;
  j["exact"] = r.exact;
  return j;
}

Json to_json(const KKTCertificate& c) {
  Json j;
  j["mode"] = to_string(c.mode);
  j["form"] = to_string(c.form);
  j["status"] = c.status == KKTStatus::Certified ? "certified" : "condition-violated";
  Json terms = Json::array();
  for (const KKTTerm& t : c.terms) {
    Json tj;
    tj["selection"] = vec_json(t.selection);
    tj["index_set"] = t.index_set;
    if (!t.multipliers.empty()) tj["multipliers"] = vec_json(t.multipliers);
    tj["normals"] = mat_json(t.normals);
    if (!t.range_normals.empty()) tj["range_normals"] = mat_json(t.range_normals);
    tj["residual"] = q_str(t.residual);
    tj["finite"] = t.finite;
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  j["residual"] = q_str(c.residual);
  j["closure_used"] = c.closure_used;
  Json qs = Json::array();
  for (const QCVerdict& q : c.qualifications) qs.push_back(to_json(q));
  j["qualifications"] = std::move(qs);
  j["chip"] = to_json(c.chip);
  j["K_used"] = c.K_used;
  j["exact"] = c.exact;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json to_json(const ShiftWitness& w) {
  Json j;
  j["found"] = w.found;
  j["shifts"] = mat_json(w.shifts);
  j["bound"] = q_str(w.bound);
  j["exact"] = true;
  if (!w.diagnostic.empty()) j["diagnostic"] = w.diagnostic;
  return j;
}

Json to_json(const ExtremalCertificate& c) {
  Json j;
  j["shifts"] = mat_json(c.shifts);
  j["bound"] = q_str(c.bound);
  j["extremality_verified"] = c.extremality_verified;
  j["normals"] = mat_json(c.normals);
  Json homes = Json::array();
  for (const ConeRep& h : c.homes) homes.push_back(cone_json(h));
  j["normal_cones"] = std::move(homes);
  j["scale_sq"] = q_str(c.scale_sq);
  j["K_used"] = c.K_used;
  j["exact"] = true;
  return j;
}

Json to_json(const FrechetRep& r) {
  Json j;
  j["represented"] = r.represented;
  j["index_set"] = r.index_set;
  j["parts"] = mat_json(r.parts);
  j["gap_sq"] = q_str(r.gap_sq);
  j["qualification"] = to_json(r.qualification);
  j["exact"] = true;
  return j;
}

Json to_json(const ParetoDecision& d) {
  Json j;
  j["holds"] = to_string(d.holds);
  j["witness"] = opt_vec(d.witness);
  j["box_radius"] = q_str(d.box_radius);
  j["method"] = d.method;
  j["exact"] = d.exact;
  return j;
}

Json to_json(const ParetoCertificate& c) {
  Json j;
  j["ystar"] = vec_json(c.ystar);
  j["x0"] = vec_json(c.x0);
  j["index_set"] = c.index_set;
  j["normals"] = mat_json(c.normals);
  j["residual"] = q_str(c.residual);
  j["path"] = c.path;
  Json qs = Json::array();
  for (const QCVerdict& q : c.qualifications) qs.push_back(to_json(q));
  j["qualifications"] = std::move(qs);
  j["exact"] = c.exact;
  return j;
}

namespace {

bool scalar_array(const Json& j) {
  for (const Json& e : j)
    if (e.is_structured()) return false;
  return true;
}

std::string scalar(const Json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

std::string inline_array(const Json& j) {
  std::string s = "(";
  bool first = true;
  for (const Json& e : j) {
    if (!first) s += ", ";
    first = false;
    s += e.is_array() ? inline_array(e) : scalar(e);
  }
  return s + ")";
}

bool matrix(const Json& j) {
  if (!j.is_array()) return false;
  for (const Json& e : j)
    if (!e.is_array() || !scalar_array(e)) return false;
  return true;
}

void render(const Json& j, int depth, std::ostringstream& out) {
  const std::string pad(2 * depth, ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_null()) continue;
      if (!v.is_structured()) {
        out << pad << k << ": " << scalar(v) << "\n";
      } else if (v.is_array() && (scalar_array(v) || matrix(v))) {
        out << pad << k << ": " << (v.empty() ? "none" : inline_array(v)) << "\n";
      } else {
        out << pad << k << ":\n";
        render(v, depth + 1, out);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << pad << "- [" << i << "]\n";
      render(j[i], depth + 1, out);
    }
  } else {
    out << pad << scalar(j) << "\n";
  }
}

}  // namespace

std::string render_text(const Json& report) {
  std::ostringstream out;
  render(report, 0, out);
  return out.str();
}

}  // namespace conekit::cli
