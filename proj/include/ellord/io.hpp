#pragma once

#include <json.hpp>

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ellord/distribution.hpp"
#include "ellord/error.hpp"
#include "ellord/generator.hpp"
#include "ellord/orders.hpp"
#include "ellord/verifier.hpp"

namespace ellord {

using Json = nlohmann::ordered_json;

inline Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

inline const Json& require_key(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::ParseError, std::string(where) + ": missing key '" + key + "'");
  return j.at(key);
}

inline double as_number(const Json& j, const char* where) {
  if (!j.is_number())
    throw Error(Errc::ParseError, std::string(where) + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline Eigen::VectorXd vector_from_json(const Json& j, const char* where) {
  if (!j.is_array()) throw Error(Errc::ParseError, std::string(where) + ": expected an array");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = detail::as_number(j[i], where);
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw Error(Errc::ParseError, std::string(where) + ": expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw Error(Errc::ParseError, std::string(where) + ": rows must be arrays");
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
      throw Error(Errc::ParseError, std::string(where) + ": ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = detail::as_number(j[i][c], where);
  }
  return m;
}

inline Json generator_to_json(const GeneratorSpec& g) {
  Json j;
  j["type"] = family_name(g.family());
  if (g.family() == RadialFamily::StudentT) j["nu"] = g.nu();
  if (g.family() == RadialFamily::RadialDiscrete) {
    Json atoms = Json::array();
    for (const auto& a : g.atoms()) atoms.push_back(Json::array({a.r, a.w}));
    j["atoms"] = std::move(atoms);
  }
  return j;
}

inline GeneratorSpec generator_from_json(const Json& j) {
  const Json& t = detail::require_key(j, "type", "generator");
  if (!t.is_string()) throw Error(Errc::ParseError, "generator.type: expected a string");
  const std::string fam = t.get<std::string>();
  if (fam == "normal") return GeneratorSpec::normal();
  if (fam == "student_t")
    return GeneratorSpec::student_t(detail::as_number(detail::require_key(j, "nu", "generator"),
                                                      "generator.nu"));
  if (fam == "radial_discrete") {
    const Json& atoms = detail::require_key(j, "atoms", "generator");
    if (!atoms.is_array() || atoms.empty())
      throw Error(Errc::ParseError, "generator.atoms: expected a nonempty array of [r, w] pairs");
    std::vector<RadialAtom> out;
    for (const auto& a : atoms) {
      if (!a.is_array() || a.size() != 2)
        throw Error(Errc::ParseError, "generator.atoms: each atom must be a [radius, weight] pair");
      out.push_back({detail::as_number(a[0], "atom radius"),
                     detail::as_number(a[1], "atom weight")});
    }
    return GeneratorSpec::radial_discrete(std::move(out));
  }
  throw Error(Errc::ParseError, "generator.type must be normal, student_t, or radial_discrete");
}

inline Json distribution_to_json(const EllipticalDistribution& d) {
  Json j;
  j["dim"] = d.dim();
  j["location"] = to_json(d.mu);
  j["dispersion"] = to_json(d.sigma);
  j["generator"] = generator_to_json(d.gen);
  return j;
}

inline EllipticalDistribution distribution_from_json(const Json& j, const char* where) {
  EllipticalDistribution d{
      vector_from_json(detail::require_key(j, "location", where), "location"),
      matrix_from_json(detail::require_key(j, "dispersion", where), "dispersion"),
      generator_from_json(detail::require_key(j, "generator", where))};
  if (j.contains("dim")) {
    const Json& dim = j.at("dim");
    if (!dim.is_number_integer() || dim.get<std::int64_t>() != d.dim())
      throw Error(Errc::ParseError,
                  std::string(where) + ": dim does not match the location length");
  }
  return d;
}

inline Json decision_to_json(const OrderDecision& d) {
  Json j;
  j["relation"] = relation_name(d.relation);
  j["outcome"] = outcome_name(d.outcome);
  j["reason"] = d.reason;
  if (d.witness_vector) j["witness_vector"] = to_json(*d.witness_vector);
  if (d.witness_factor) j["witness_factor"] = to_json(*d.witness_factor);
  return j;
}

inline Json estimate_to_json(const FunctionEstimate& e) {
  Json j;
  j["function"] = e.function;
  if (e.skipped) {
    j["skipped"] = true;
    j["note"] = e.note;
    return j;
  }
  j["mean_x"] = e.mean_x;
  j["mean_y"] = e.mean_y;
  j["diff"] = e.diff;
  j["se"] = e.se;
  j["violation"] = e.violation;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

inline Json verification_to_json(const VerificationReport& r) {
  Json j;
  j["relation"] = relation_name(r.relation);
  j["claimed"] = outcome_name(r.claimed);
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["consistent"] = r.consistent;
  j["summary"] = r.summary;
  Json es = Json::array();
  for (const auto& e : r.estimates) es.push_back(estimate_to_json(e));
  j["estimates"] = std::move(es);
  if (!r.swapped.empty()) {
    Json sw = Json::array();
    for (const auto& e : r.swapped) sw.push_back(estimate_to_json(e));
    j["swapped"] = std::move(sw);
  }
  return j;
}

inline Json identity_to_json(const IdentityReport& r) {
  Json j;
  j["function"] = r.function;
  j["lhs"] = r.lhs;
  j["lhs_se"] = r.lhs_se;
  j["rhs"] = r.rhs;
  j["rhs_se"] = r.rhs_se;
  j["samples"] = r.samples;
  j["lambda_nodes"] = r.lambda_nodes;
  j["seed"] = r.seed;
  j["consistent"] = r.consistent;
  Json nodes = Json::array();
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    nodes.push_back(Json{{"lambda", r.nodes[k]}, {"integrand", r.node_values[k]}});
  j["nodes"] = std::move(nodes);
  return j;
}

inline Json slepian_to_json(const SlepianReport& r) {
  Json j;
  j["threshold"] = to_json(r.threshold);
  j["p_x"] = r.p_x;
  j["p_x_se"] = r.p_x_se;
  j["p_y"] = r.p_y;
  j["p_y_se"] = r.p_y_se;
  j["diff"] = r.diff;
  j["diff_se"] = r.diff_se;
  if (r.exact_x) j["exact_x"] = *r.exact_x;
  if (r.exact_y) j["exact_y"] = *r.exact_y;
  j["uo"] = decision_to_json(r.uo_decision);
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["consistent"] = r.consistent;
  j["summary"] = r.summary;
  return j;
}

inline Json slepian_suite_to_json(const SlepianSuiteReport& r) {
  Json j;
  j["builder"] = r.builder;
  j["dim"] = r.dim;
  j["threshold"] = to_json(r.threshold);
  j["variance"] = r.variance;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  Json pts = Json::array();
  for (const auto& p : r.points) {
    Json pj;
    pj["rho"] = p.rho;
    pj["p_upper"] = p.p_upper;
    pj["p_upper_se"] = p.p_upper_se;
    pj["p_lower"] = p.p_lower;
    pj["p_lower_se"] = p.p_lower_se;
    if (p.exact_upper) pj["exact_upper"] = *p.exact_upper;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json sj;
    sj["rho_from"] = s.rho_from;
    sj["rho_to"] = s.rho_to;
    sj["upper_diff"] = s.upper_diff;
    sj["upper_diff_se"] = s.upper_diff_se;
    sj["lower_diff"] = s.lower_diff;
    sj["lower_diff_se"] = s.lower_diff_se;
    sj["upper_ok"] = s.upper_ok;
    sj["lower_ok"] = s.lower_ok;
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  j["consistent"] = r.consistent;
  j["summary"] = r.summary;
  return j;
}

inline Json moment_suite_to_json(const MomentSuiteReport& r) {
  Json j;
  j["sm"] = decision_to_json(r.sm_decision);
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  Json es = Json::array();
  for (const auto& e : r.entries) {
    Json ej = estimate_to_json(e.estimate);
    ej["direction"] = e.direction;
    es.push_back(std::move(ej));
  }
  j["entries"] = std::move(es);
  j["consistent"] = r.consistent;
  j["summary"] = r.summary;
  return j;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string decisions_to_csv(const std::vector<OrderDecision>& ds) {
  std::ostringstream os;
  os << "relation,outcome,reason\n";
  for (const auto& d : ds)
    os << relation_name(d.relation) << ',' << outcome_name(d.outcome) << ','
       << detail::csv_field(d.reason) << '\n';
  return os.str();
}

inline std::string verification_to_csv(const VerificationReport& r) {
  std::ostringstream os;
  os << "relation,claimed,function,mean_x,mean_y,diff,se,violation,skipped,note\n";
  for (const auto& e : r.estimates) {
    os << relation_name(r.relation) << ',' << outcome_name(r.claimed) << ','
       << detail::csv_field(e.function) << ',';
    if (e.skipped)
      os << ",,,,," << "true," << detail::csv_field(e.note) << '\n';
    else
      os << detail::csv_num(e.mean_x) << ',' << detail::csv_num(e.mean_y) << ','
         << detail::csv_num(e.diff) << ',' << detail::csv_num(e.se) << ','
         << (e.violation ? "true" : "false") << ",false," << detail::csv_field(e.note) << '\n';
  }
  return os.str();
}

inline std::string identity_to_csv(const IdentityReport& r) {
  std::ostringstream os;
  os << "function,lhs,lhs_se,rhs,rhs_se,consistent\n";
  os << detail::csv_field(r.function) << ',' << detail::csv_num(r.lhs) << ','
     << detail::csv_num(r.lhs_se) << ',' << detail::csv_num(r.rhs) << ','
     << detail::csv_num(r.rhs_se) << ',' << (r.consistent ? "true" : "false") << '\n';
  return os.str();
}

inline std::string slepian_to_csv(const SlepianReport& r) {
  std::ostringstream os;
  os << "p_x,p_x_se,p_y,p_y_se,diff,diff_se,uo_outcome,consistent\n";
  os << detail::csv_num(r.p_x) << ',' << detail::csv_num(r.p_x_se) << ','
     << detail::csv_num(r.p_y) << ',' << detail::csv_num(r.p_y_se) << ','
     << detail::csv_num(r.diff) << ',' << detail::csv_num(r.diff_se) << ','
     << outcome_name(r.uo_decision.outcome) << ',' << (r.consistent ? "true" : "false") << '\n';
  return os.str();
}

inline std::string slepian_suite_to_csv(const SlepianSuiteReport& r) {
  std::ostringstream os;
  os << "rho,p_upper,p_upper_se,p_lower,p_lower_se,exact_upper,step_upper_diff,step_upper_diff_se,"
        "step_lower_diff,step_lower_diff_se,upper_ok,lower_ok\n";
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    const auto& p = r.points[k];
    os << detail::csv_num(p.rho) << ',' << detail::csv_num(p.p_upper) << ','
       << detail::csv_num(p.p_upper_se) << ',' << detail::csv_num(p.p_lower) << ','
       << detail::csv_num(p.p_lower_se) << ',';
    if (p.exact_upper) os << detail::csv_num(*p.exact_upper);
    if (k > 0) {
      const auto& s = r.steps[k - 1];
      os << ',' << detail::csv_num(s.upper_diff) << ',' << detail::csv_num(s.upper_diff_se) << ','
         << detail::csv_num(s.lower_diff) << ',' << detail::csv_num(s.lower_diff_se) << ','
         << (s.upper_ok ? "true" : "false") << ',' << (s.lower_ok ? "true" : "false") << '\n';
    } else {
      os << ",,,,,,\n";
    }
  }
  return os.str();
}

inline Json catalog_to_json(const std::vector<TestFunction>& cat) {
  Json arr = Json::array();
  for (const auto& f : cat) {
    Json j;
    j["name"] = f.name;
    j["formula"] = f.formula;
    j["growth_degree"] = f.growth_degree;
    j["bounded"] = f.bounded;
    j["smooth"] = f.smooth();
    Json mem = Json::array();
    for (Relation r : f.member_of) mem.push_back(relation_name(r));
    j["member_of"] = std::move(mem);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string catalog_to_csv(const std::vector<TestFunction>& cat) {
  std::ostringstream os;
  os << "name,formula,growth_degree,bounded,smooth,member_of\n";
  for (const auto& f : cat) {
    std::string mem;
    for (std::size_t i = 0; i < f.member_of.size(); ++i) {
      if (i) mem += ';';
      mem += relation_name(f.member_of[i]);
    }
    os << detail::csv_field(f.name) << ',' << detail::csv_field(f.formula) << ','
       << f.growth_degree << ',' << (f.bounded ? "true" : "false") << ','
       << (f.smooth() ? "true" : "false") << ',' << detail::csv_field(mem) << '\n';
  }
  return os.str();
}

inline std::string moment_suite_to_csv(const MomentSuiteReport& r) {
  std::ostringstream os;
  os << "function,direction,mean_x,mean_y,diff,se,violation,skipped,note\n";
  for (const auto& ent : r.entries) {
    const auto& e = ent.estimate;
    os << detail::csv_field(e.function) << ',' << ent.direction << ',';
    if (e.skipped)
      os << ",,,,," << "true," << detail::csv_field(e.note) << '\n';
    else
      os << detail::csv_num(e.mean_x) << ',' << detail::csv_num(e.mean_y) << ','
         << detail::csv_num(e.diff) << ',' << detail::csv_num(e.se) << ','
         << (e.violation ? "true" : "false") << ",false," << detail::csv_field(e.note) << '\n';
  }
  return os.str();
}

}  // namespace ellord
