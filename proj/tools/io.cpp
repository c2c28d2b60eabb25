#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shadowrt/errors.hpp"

namespace shadowrt::cli {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw DomainError("SchemaViolation", "SchemaViolation at " + path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required field");
  return *it;
}

long long as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer");
  return v.get<long long>();
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

std::vector<int> int_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<int>(as_int(v[i], path + "/" + std::to_string(i))));
  }
  return out;
}

std::vector<double> real_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_real(v[i], path + "/" + std::to_string(i)));
  }
  return out;
}

void check_size(const std::vector<int>& v, int n, const std::string& path) {
  if (static_cast<int>(v.size()) != n) {
    schema_error(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
}

}  // namespace

InputDoc parse_input(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                     std::to_string(col));
  }
  if (!doc.is_object()) schema_error("", "expected an object");

  const json& schema = require(doc, "schema", "");
  if (!schema.is_string() || schema.get<std::string>() != kSchemaVersion) {
    schema_error("/schema", std::string("expected \"") + kSchemaVersion + "\"");
  }

  InputDoc in;
  auto& p = in.presentation;
  p.c = static_cast<int>(as_int(require(doc, "c", ""), "/c"));
  p.n = static_cast<int>(as_int(require(doc, "n", ""), "/n"));
  const json& inc = require(doc, "incidence", "");
  if (!inc.is_array()) schema_error("/incidence", "expected an array of 6-slot rows");
  for (std::size_t s = 0; s < inc.size(); ++s) {
    std::string path = "/incidence/" + std::to_string(s);
    auto row = int_array(inc[s], path);
    if (row.size() != 6) schema_error(path, "expected 6 slots");
    std::array<int, 6> slots{};
    std::copy(row.begin(), row.end(), slots.begin());
    p.incidence.push_back(slots);
  }
  p.iota = int_array(require(doc, "iota", ""), "/iota");
  p.framing = int_array(require(doc, "framing", ""), "/framing");
  if (doc.contains("signature_hint")) {
    p.signature_hint = static_cast<int>(as_int(doc["signature_hint"], "/signature_hint"));
  }
  auto findings = validate(p);
  if (!findings.empty()) {
    const auto& f = findings.front();
    throw DomainError(f.code, f.code + " at " + f.path + ": " + f.message);
  }

  if (doc.contains("surgery")) {
    const json& s = doc["surgery"];
    if (!s.is_object()) schema_error("/surgery", "expected an object");
    in.filled = int_array(require(s, "filled", "/surgery"), "/surgery/filled");
    const json& slopes = require(s, "slopes", "/surgery");
    if (!slopes.is_array() || slopes.size() != in.filled.size()) {
      schema_error("/surgery/slopes", "expected one [p, q] pair per filled component");
    }
    for (std::size_t i = 0; i < slopes.size(); ++i) {
      std::string path = "/surgery/slopes/" + std::to_string(i);
      if (!slopes[i].is_array() || slopes[i].size() != 2) schema_error(path, "expected [p, q]");
      in.slopes.emplace_back(as_int(slopes[i][0], path + "/0"), as_int(slopes[i][1], path + "/1"));
    }
  }
  if (doc.contains("angles")) {
    const json& a = doc["angles"];
    if (!a.is_object()) schema_error("/angles", "expected an object");
    AngleSpec spec;
    spec.theta = real_array(require(a, "theta", "/angles"), "/angles/theta");
    if (static_cast<int>(spec.theta.size()) != p.n) {
      schema_error("/angles/theta", "expected " + std::to_string(p.n) + " entries");
    }
    if (a.contains("mu")) {
      spec.mu = int_array(a["mu"], "/angles/mu");
      check_size(spec.mu, p.n, "/angles/mu");
      for (std::size_t i = 0; i < spec.mu.size(); ++i) {
        if (spec.mu[i] != 1 && spec.mu[i] != -1) schema_error("/angles/mu/" + std::to_string(i), "expected +1 or -1");
      }
    }
    in.angles = spec;
  }
  if (doc.contains("colors")) {
    auto c = int_array(doc["colors"], "/colors");
    check_size(c, p.n, "/colors");
    in.colors = c;
  }
  if (doc.contains("E")) {
    auto e = int_array(doc["E"], "/E");
    check_size(e, static_cast<int>(in.filled.size()), "/E");
    in.signs = e;
  }
  return in;
}

InputDoc read_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("IoError", "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_input(ss.str());
}

json to_json(const LogComplex& v) {
  return {{"log_mag", v.is_zero() ? json(nullptr) : json(v.log_mag())}, {"phase", v.arg()}};
}

json to_json(cplx v) { return {{"re", v.real()}, {"im", v.imag()}}; }

namespace {

json complex_array(const std::vector<cplx>& v) {
  json a = json::array();
  for (auto z : v) a.push_back(to_json(z));
  return a;
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json to_json(const GeometricSolution& sol) {
  json lengths = json::array();
  for (auto l : sol.lengths) lengths.push_back(l.real());
  return {{"converged", sol.converged},
          {"residual", sol.residual},
          {"iterations", sol.iterations},
          {"alpha_star", complex_array(sol.alpha_star)},
          {"xi_star", complex_array(sol.xi_star)},
          {"critical_value", to_json(sol.critical_value)},
          {"vol", sol.vol},
          {"cs", sol.cs},
          {"cs_raw", sol.cs_raw},
          {"theta", sol.theta},
          {"E", sol.E},
          {"mu", sol.mu},
          {"H_u", complex_array(sol.H_u)},
          {"H_v", complex_array(sol.H_v)},
          {"H_gamma", complex_array(sol.H_gamma)},
          {"lengths", lengths},
          {"filling_residual", sol.filling_residual},
          {"hessian", matrix_json(sol.hessian)}};
}

json to_json(const TorsionReport& t) {
  json gram = json::array();
  for (std::size_t i = 0; i < t.gram_identity_lhs.size(); ++i) {
    gram.push_back({{"lhs", to_json(t.gram_identity_lhs[i])}, {"rhs", to_json(t.gram_identity_rhs[i])}});
  }
  return {{"torsion", to_json(t.torsion)},
          {"torsion_abs", std::abs(t.torsion)},
          {"torsion_u", to_json(t.torsion_u)},
          {"sqrt_det_gram", complex_array(t.sqrt_det_gram)},
          {"jacobian", matrix_json(t.jacobian)},
          {"jacobian_det", to_json(t.jacobian_det)},
          {"hessian_identity", {{"lhs", to_json(t.hessian_identity_lhs)}, {"rhs", to_json(t.hessian_identity_rhs)}}},
          {"gram_identity", gram}};
}

json to_json(const std::vector<Finding>& findings) {
  json a = json::array();
  for (const auto& f : findings) a.push_back({{"code", f.code}, {"path", f.path}, {"message", f.message}});
  return a;
}

json to_json(const AsymptoticReport& rep) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json rt = json::array();
  for (const auto& v : rep.rt_values) rt.push_back(to_json(v));
  json ratio = json::array();
  for (auto z : rep.prefactor_ratio) ratio.push_back(to_json(z));
  json points = json::array();
  for (const auto& pt : rep.points) {
    json j = {{"r", pt.r}, {"colors", pt.colors}, {"ok", pt.ok}};
    if (pt.ok) {
      j["rt"] = to_json(pt.rt);
      j["predicted"] = to_json(pt.predicted);
      j["predicted_vol"] = pt.predicted_vol;
      j["predicted_cs"] = pt.predicted_cs;
      j["torsion"] = to_json(pt.torsion);
    } else {
      j["failure"] = pt.failure;
    }
    points.push_back(j);
  }
  return {{"schema", kSchemaVersion},
          {"r_values", rep.r_values},
          {"rt_values", rt},
          {"fitted_vol", num(rep.fitted_vol)},
          {"fitted_cs", num(rep.fitted_cs)},
          {"cs_ambiguous", rep.cs_ambiguous},
          {"cs_period", kPi * kPi / 2.0},
          {"fitted_power", num(rep.fitted_power)},
          {"raw_scaled_vol", num(rep.raw_scaled_vol)},
          {"accelerated_vol", num(rep.accelerated_vol)},
          {"predicted_vol", num(rep.predicted_vol)},
          {"predicted_cs", num(rep.predicted_cs)},
          {"predicted_torsion", to_json(rep.predicted_torsion)},
          {"prefactor_ratio", ratio},
          {"points", points},
          {"warnings", to_json(rep.warnings)}};
}

}  // namespace shadowrt::cli
