#pragma once

// JSON forms of polynomials, law sets, invariant descriptors and certificates.
// A polynomial is an array of terms [coef, q_exp, a_exp, [[id, exp], ...]]
// with coef an exact rational string "p" or "p/q".

#include "kpl/momentcheck.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace kpl {

using nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Tag>
json poly_to_json(const LaurentPoly<Tag>& p) {
  json out = json::array();
  for (const auto& [m, c] : p.terms()) {
    json vars = json::array();
    for (const auto& vp : m.vars) vars.push_back({vp.id, vp.exp});
    out.push_back({to_string(c), m.q_exp, m.a_exp, std::move(vars)});
  }
  return out;
}

namespace detail {

inline std::int32_t json_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw FormatError(std::string("expected integer for ") + what);
  return j.get<std::int32_t>();
}

inline const json& json_field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

}  // namespace detail

template <class Tag>
LaurentPoly<Tag> poly_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("polynomial must be an array of terms");
  std::vector<typename LaurentPoly<Tag>::Term> raw;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 4 || !t[0].is_string() || !t[3].is_array())
      throw FormatError("polynomial term must be [coef, q_exp, a_exp, vars]");
    Rational c;
    try {
      c = parse_rational(t[0].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    Monomial m{detail::json_int(t[1], "q_exp"), detail::json_int(t[2], "a_exp"), {}};
    for (const auto& vp : t[3]) {
      if (!vp.is_array() || vp.size() != 2) throw FormatError("variable power must be [id, exp]");
      const auto id = detail::json_int(vp[0], "variable id");
      if (id < 1) throw FormatError("variable id must be positive");
      m.vars.push_back({id, detail::json_int(vp[1], "variable exponent")});
    }
    raw.emplace_back(std::move(m), std::move(c));
  }
  return LaurentPoly<Tag>::from_terms(std::move(raw));
}

inline json law_set_to_json(const LawSet& s) {
  auto list = [](const std::vector<DiffPoly>& v) {
    json out = json::array();
    for (const auto& p : v) out.push_back(poly_to_json(p));
    return out;
  };
  return {{"k", s.k},
          {"G", list(s.G)},
          {"alpha", list(s.alpha)},
          {"beta", list(s.beta)},
          {"gamma", list(s.gamma)},
          {"Q", poly_to_json(s.Q)}};
}

inline LawSet law_set_from_json(const json& j) {
  auto list = [&](const char* key) {
    const json& arr = detail::json_field(j, key);
    if (!arr.is_array()) throw FormatError(std::string("field '") + key + "' must be an array");
    std::vector<DiffPoly> out;
    for (const auto& p : arr) out.push_back(poly_from_json<DiffTag>(p));
    return out;
  };
  LawSet s;
  s.k = detail::json_int(detail::json_field(j, "k"), "k");
  s.G = list("G");
  s.alpha = list("alpha");
  s.beta = list("beta");
  s.gamma = list("gamma");
  s.Q = poly_from_json<DiffTag>(detail::json_field(j, "Q"));
  return s;
}

inline json descriptor_to_json(const InvariantDescriptor& inv) {
  json terms = json::array();
  for (const auto& t : inv.terms)
    terms.push_back({{"coef", poly_to_json(t.coef)}, {"kind", std::string(1, kind_char(t.kind))}, {"index", t.index}});
  return {{"k", inv.k}, {"terms", std::move(terms)}, {"tail", poly_to_json(inv.tail)}};
}

inline InvariantDescriptor descriptor_from_json(const json& j) {
  InvariantDescriptor inv;
  inv.k = detail::json_int(detail::json_field(j, "k"), "k");
  const json& terms = detail::json_field(j, "terms");
  if (!terms.is_array()) throw FormatError("field 'terms' must be an array");
  for (const auto& t : terms) {
    const json& kind = detail::json_field(t, "kind");
    if (!kind.is_string() || kind.get<std::string>().size() != 1) throw FormatError("kind must be \"A\", \"B\" or \"X\"");
    MomentTerm term;
    term.coef = poly_from_json<DiffTag>(detail::json_field(t, "coef"));
    try {
      term.kind = kind_from_char(kind.get<std::string>()[0]);
      term.index = detail::json_int(detail::json_field(t, "index"), "index");
      moment_id(term.kind, term.index);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    inv.terms.push_back(std::move(term));
  }
  inv.tail = j.contains("tail") ? poly_from_json<DiffTag>(j.at("tail")) : DiffPoly{};
  return inv;
}

inline json certificate_to_json(const VerificationCertificate& c) {
  return {{"k", c.k}, {"verified", c.verified}, {"term_count_before_cancellation", c.term_count_before_cancellation}};
}

}  // namespace kpl
