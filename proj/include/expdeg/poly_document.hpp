#pragma once

#include <gmpxx.h>

#include <string>

#include "expdeg/approx.hpp"
#include "expdeg/errors.hpp"
#include "expdeg/hpreal.hpp"
#include "json.hpp"

namespace expdeg {

inline constexpr const char* kPolynomialFormat = "expdeg-polynomial/1";

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson real_to_json(const HPReal& x) { return ojson{{"hex", x.to_hex()}, {"bits", x.precision()}}; }

inline HPReal real_from_json(const ojson& j, const char* what) {
  if (!j.is_object() || !j.contains("hex") || !j.contains("bits") || !j["hex"].is_string() ||
      !j["bits"].is_number_integer()) {
    throw ParseError(std::string("polynomial document: malformed real '") + what + "'");
  }
  return HPReal::parse(j["hex"].get<std::string>(), j["bits"].get<long>());
}

inline const ojson& field(const ojson& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("polynomial document: missing field '") + key + "'");
  return j[key];
}

template <class T>
T get_as(const ojson& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("polynomial document: field '") + key + "' has the wrong type");
  }
}

inline mpq_class parse_rational(const std::string& s) {
  mpq_class q;
  if (s.empty() || q.set_str(s, 10) != 0) throw ParseError("polynomial document: bad rational '" + s + "'");
  if (q.get_den() == 0) throw ParseError("polynomial document: zero denominator in '" + s + "'");
  mpq_class canon = q;
  canon.canonicalize();
  if (canon.get_str() != q.get_str()) throw ParseError("polynomial document: rational not in lowest terms '" + s + "'");
  return q;
}

}  // namespace detail

/// JSON document with decimal B and delta (plus their precisions), exact "num/den" monomial
/// coefficients, hex-float Chebyshev coefficients and the certificate block.
inline std::string render_polynomial(const ExportedPolynomial& p) {
  using detail::ojson;
  using detail::real_to_json;
  const DegreeCertificate& c = p.certificate;
  ojson doc;
  doc["format"] = kPolynomialFormat;
  doc["target"] = to_string(p.target());
  doc["B"] = c.spec.B.to_decimal();
  doc["B_bits"] = c.spec.B.precision();
  doc["delta"] = c.spec.delta.to_decimal();
  doc["delta_bits"] = c.spec.delta.precision();
  doc["degree"] = p.degree;
  doc["domain_B"] = real_to_json(p.domain_B);
  doc["lambda"] = real_to_json(p.cheb_form.lambda);
  ojson mono = ojson::array();
  for (const mpq_class& q : p.monomial_form) mono.push_back(q.get_num().get_str() + "/" + q.get_den().get_str());
  doc["monomial"] = std::move(mono);
  ojson cheb = ojson::array();
  for (const CoeffValue& v : p.cheb_form.coeffs) {
    cheb.push_back(ojson{{"value", real_to_json(v.value)}, {"radius", real_to_json(v.error_radius)}});
  }
  doc["cheb"] = std::move(cheb);
  doc["rounding_bound"] = real_to_json(p.rounding_bound);
  doc["error_bound"] = real_to_json(p.error_bound);
  doc["certificate"] = ojson{{"D_upper", c.D_upper},
                             {"tail_upper", real_to_json(c.tail_upper_at_D)},
                             {"radius_sum", real_to_json(c.radius_sum)},
                             {"D_lower", c.D_lower},
                             {"lower_witness", to_string(c.lower_witness)},
                             {"lower_value", real_to_json(c.lower_value)},
                             {"precision_bits", c.precision_bits}};
  return doc.dump(2) + "\n";
}

inline ExportedPolynomial parse_polynomial(const std::string& text) {
  using detail::field;
  using detail::get_as;
  using detail::real_from_json;
  detail::ojson doc;
  try {
    doc = detail::ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("polynomial document: ") + e.what());
  }
  if (get_as<std::string>(doc, "format") != kPolynomialFormat) throw ParseError("polynomial document: unknown format");
  ExportedPolynomial p;
  Target t = parse_target(get_as<std::string>(doc, "target"));
  DegreeCertificate& c = p.certificate;
  c.spec.B = HPReal::parse(get_as<std::string>(doc, "B"), get_as<long>(doc, "B_bits"));
  c.spec.delta = HPReal::parse(get_as<std::string>(doc, "delta"), get_as<long>(doc, "delta_bits"));
  c.spec.target = t;
  p.degree = get_as<std::uint64_t>(doc, "degree");
  p.domain_B = real_from_json(field(doc, "domain_B"), "domain_B");
  p.cheb_form.lambda = real_from_json(field(doc, "lambda"), "lambda");
  p.cheb_form.target = t;
  const auto& mono = field(doc, "monomial");
  if (!mono.is_array()) throw ParseError("polynomial document: 'monomial' must be an array");
  for (const auto& s : mono) {
    if (!s.is_string()) throw ParseError("polynomial document: monomial entries must be strings");
    p.monomial_form.push_back(detail::parse_rational(s.get<std::string>()));
  }
  const auto& cheb = field(doc, "cheb");
  if (!cheb.is_array()) throw ParseError("polynomial document: 'cheb' must be an array");
  for (const auto& e : cheb) {
    p.cheb_form.coeffs.push_back({real_from_json(field(e, "value"), "value"), real_from_json(field(e, "radius"), "radius")});
  }
  if (!p.monomial_form.empty() && p.monomial_form.size() != p.degree + 1) {
    throw ParseError("polynomial document: monomial count does not match degree");
  }
  p.rounding_bound = real_from_json(field(doc, "rounding_bound"), "rounding_bound");
  p.error_bound = real_from_json(field(doc, "error_bound"), "error_bound");
  const auto& cert = field(doc, "certificate");
  c.D_upper = get_as<std::uint64_t>(cert, "D_upper");
  c.tail_upper_at_D = real_from_json(field(cert, "tail_upper"), "tail_upper");
  c.radius_sum = real_from_json(field(cert, "radius_sum"), "radius_sum");
  c.D_lower = get_as<std::uint64_t>(cert, "D_lower");
  c.lower_witness = parse_witness(get_as<std::string>(cert, "lower_witness"));
  c.lower_value = real_from_json(field(cert, "lower_value"), "lower_value");
  c.precision_bits = get_as<long>(cert, "precision_bits");
  return p;
}

inline bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  return identical(a.B, b.B) && identical(a.delta, b.delta) && a.target == b.target;
}

inline bool operator==(const DegreeCertificate& a, const DegreeCertificate& b) {
  return a.spec == b.spec && a.D_upper == b.D_upper && identical(a.tail_upper_at_D, b.tail_upper_at_D) &&
         identical(a.radius_sum, b.radius_sum) && a.D_lower == b.D_lower && a.lower_witness == b.lower_witness &&
         identical(a.lower_value, b.lower_value) && a.precision_bits == b.precision_bits;
}

inline bool operator==(const ExportedPolynomial& a, const ExportedPolynomial& b) {
  if (a.degree != b.degree || !identical(a.domain_B, b.domain_B) || a.target() != b.target() ||
      !identical(a.cheb_form.lambda, b.cheb_form.lambda) || a.monomial_form != b.monomial_form ||
      a.cheb_form.coeffs.size() != b.cheb_form.coeffs.size() || !identical(a.rounding_bound, b.rounding_bound) ||
      !identical(a.error_bound, b.error_bound) || !(a.certificate == b.certificate)) {
    return false;
  }
  for (std::size_t i = 0; i < a.cheb_form.coeffs.size(); ++i) {
    if (!identical(a.cheb_form.coeffs[i].value, b.cheb_form.coeffs[i].value) ||
        !identical(a.cheb_form.coeffs[i].error_radius, b.cheb_form.coeffs[i].error_radius)) {
      return false;
    }
  }
  return true;
}

}  // namespace expdeg
