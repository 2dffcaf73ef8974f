#pragma once

// Exact multivariate polynomials with Laurent exponents in two distinguished
// symbols (q and the parameter a) and nonnegative exponents in a family of
// indexed variables. The variable family is supplied by a tag type:
//
//   struct Tag {
//     static std::string var_name(int id);
//   };
//
// Both the differential ring (variables q', q'', ...) and the moment ring
// (variables A_j, B_j, X_j) are instances of this template.

#include "kpl/rational.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kpl {

struct VarPower {
  std::int32_t id = 0;
  std::int32_t exp = 0;
  friend bool operator==(const VarPower&, const VarPower&) = default;
  friend auto operator<=>(const VarPower&, const VarPower&) = default;
};

/// q^q_exp · a^a_exp · Π var_id^exp. `vars` is sorted by id and holds no zero exponents.
struct Monomial {
  std::int32_t q_exp = 0;
  std::int32_t a_exp = 0;
  std::vector<VarPower> vars;

  friend bool operator==(const Monomial&, const Monomial&) = default;

  friend std::strong_ordering operator<=>(const Monomial& l, const Monomial& r) {
    if (auto c = l.q_exp <=> r.q_exp; c != 0) return c;
    if (auto c = l.a_exp <=> r.a_exp; c != 0) return c;
    return std::lexicographical_compare_three_way(l.vars.begin(), l.vars.end(),
                                                  r.vars.begin(), r.vars.end());
  }

  std::int32_t exponent(std::int32_t id) const {
    auto it = std::lower_bound(vars.begin(), vars.end(), id,
                               [](const VarPower& vp, std::int32_t v) { return vp.id < v; });
    return (it != vars.end() && it->id == id) ? it->exp : 0;
  }

  std::int32_t max_var() const { return vars.empty() ? 0 : vars.back().id; }

  bool is_one() const { return q_exp == 0 && a_exp == 0 && vars.empty(); }
};

inline Monomial operator*(const Monomial& l, const Monomial& r) {
  Monomial out;
  out.q_exp = l.q_exp + r.q_exp;
  out.a_exp = l.a_exp + r.a_exp;
  out.vars.reserve(l.vars.size() + r.vars.size());
  auto i = l.vars.begin();
  auto j = r.vars.begin();
  while (i != l.vars.end() && j != r.vars.end()) {
    if (i->id < j->id) {
      out.vars.push_back(*i++);
    } else if (j->id < i->id) {
      out.vars.push_back(*j++);
    } else {
      out.vars.push_back({i->id, i->exp + j->exp});
      ++i;
      ++j;
    }
  }
  out.vars.insert(out.vars.end(), i, l.vars.end());
  out.vars.insert(out.vars.end(), j, r.vars.end());
  return out;
}

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint32_t>(m.q_exp));
    mix(static_cast<std::uint32_t>(m.a_exp));
    for (const auto& vp : m.vars)
      mix((static_cast<std::uint64_t>(static_cast<std::uint32_t>(vp.id)) << 32) |
          static_cast<std::uint32_t>(vp.exp));
    return static_cast<std::size_t>(h);
  }
};

template <class Tag>
class LaurentPoly;

/// Hash-based sink for unsorted terms; `finish` produces the normal form.
template <class Tag>
class TermAccumulator {
 public:
  void add(Monomial m, const Rational& c) {
    if (sgn(c) == 0) return;
    ++raw_terms_;
    auto [it, inserted] = terms_.try_emplace(std::move(m), c);
    if (!inserted) it->second += c;
  }

  void add_scaled(const LaurentPoly<Tag>& p, const Monomial& shift, const Rational& scale);

  std::size_t raw_terms() const { return raw_terms_; }

  LaurentPoly<Tag> finish() &&;

 private:
  std::unordered_map<Monomial, Rational, MonomialHash> terms_;
  std::size_t raw_terms_ = 0;
};

template <class Tag>
class LaurentPoly {
 public:
  using Term = std::pair<Monomial, Rational>;

  LaurentPoly() = default;

  static LaurentPoly constant(const Rational& c) { return monomial(Monomial{}, c); }

  static LaurentPoly monomial(Monomial m, const Rational& c = 1) {
    LaurentPoly p;
    if (sgn(c) != 0) p.terms_.emplace_back(std::move(m), c);
    return p;
  }

  static LaurentPoly q(std::int32_t e = 1) { return monomial(Monomial{e, 0, {}}); }
  static LaurentPoly a(std::int32_t e = 1) { return monomial(Monomial{0, e, {}}); }
  static LaurentPoly var(std::int32_t id, std::int32_t exp = 1) {
    if (exp == 0) return constant(1);
    return monomial(Monomial{0, 0, {{id, exp}}});
  }

  /// Builds the normal form from arbitrary (possibly repeated, possibly zero) terms.
  static LaurentPoly from_terms(std::vector<Term> raw) {
    TermAccumulator<Tag> acc;
    for (auto& [m, c] : raw) {
      std::sort(m.vars.begin(), m.vars.end());
      std::vector<VarPower> merged;
      for (const auto& vp : m.vars) {
        if (!merged.empty() && merged.back().id == vp.id)
          merged.back().exp += vp.exp;
        else
          merged.push_back(vp);
      }
      std::erase_if(merged, [](const VarPower& vp) { return vp.exp == 0; });
      m.vars = std::move(merged);
      acc.add(std::move(m), c);
    }
    return std::move(acc).finish();
  }

  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Coefficient of monomial `m` (zero when absent).
  Rational coefficient(const Monomial& m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& key) { return t.first < key; });
    return (it != terms_.end() && it->first == m) ? it->second : Rational(0);
  }

  /// Largest variable id present; 0 when only q and a appear.
  std::int32_t max_var() const {
    std::int32_t out = 0;
    for (const auto& [m, c] : terms_) out = std::max(out, m.max_var());
    return out;
  }

  std::int32_t min_q_exp() const {
    std::int32_t out = 0;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      out = first ? m.q_exp : std::min(out, m.q_exp);
      first = false;
    }
    return out;
  }

  LaurentPoly shift(std::int32_t dq, std::int32_t da) const {
    LaurentPoly out = *this;
    for (auto& [m, c] : out.terms_) {
      m.q_exp += dq;
      m.a_exp += da;
    }
    return out;
  }

  LaurentPoly operator-() const {
    LaurentPoly out = *this;
    for (auto& [m, c] : out.terms_) c = -c;
    return out;
  }

  LaurentPoly& operator+=(const LaurentPoly& r) { return *this = merge(*this, r, 1); }
  LaurentPoly& operator-=(const LaurentPoly& r) { return *this = merge(*this, r, -1); }
  LaurentPoly& operator*=(const LaurentPoly& r) { return *this = *this * r; }
  LaurentPoly& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      terms_.clear();
    } else {
      for (auto& [m, c] : terms_) c *= s;
    }
    return *this;
  }

  friend LaurentPoly operator+(const LaurentPoly& l, const LaurentPoly& r) { return merge(l, r, 1); }
  friend LaurentPoly operator-(const LaurentPoly& l, const LaurentPoly& r) { return merge(l, r, -1); }
  friend LaurentPoly operator*(LaurentPoly l, const Rational& s) { return l *= s; }
  friend LaurentPoly operator*(const Rational& s, LaurentPoly r) { return r *= s; }

  friend LaurentPoly operator*(const LaurentPoly& l, const LaurentPoly& r) {
    if (l.is_zero() || r.is_zero()) return {};
    if (l.size() == 1 && l.terms_[0].first.is_one()) return r * l.terms_[0].second;
    if (r.size() == 1 && r.terms_[0].first.is_one()) return l * r.terms_[0].second;
    TermAccumulator<Tag> acc;
    const LaurentPoly& small = l.size() <= r.size() ? l : r;
    const LaurentPoly& big = l.size() <= r.size() ? r : l;
    for (const auto& [m, c] : small.terms_) acc.add_scaled(big, m, c);
    return std::move(acc).finish();
  }

  friend bool operator==(const LaurentPoly&, const LaurentPoly&) = default;

  LaurentPoly pow(unsigned n) const {
    LaurentPoly out = constant(1);
    LaurentPoly base = *this;
    while (n != 0) {
      if (n & 1U) out *= base;
      n >>= 1U;
      if (n != 0) base *= base;
    }
    return out;
  }

  std::string to_string() const;

 private:
  friend class TermAccumulator<Tag>;

  static LaurentPoly merge(const LaurentPoly& l, const LaurentPoly& r, int sign) {
    LaurentPoly out;
    out.terms_.reserve(l.size() + r.size());
    auto i = l.terms_.begin();
    auto j = r.terms_.begin();
    while (i != l.terms_.end() || j != r.terms_.end()) {
      if (j == r.terms_.end() || (i != l.terms_.end() && i->first < j->first)) {
        out.terms_.push_back(*i++);
      } else if (i == l.terms_.end() || j->first < i->first) {
        out.terms_.emplace_back(j->first, sign > 0 ? j->second : Rational(-j->second));
        ++j;
      } else {
        Rational c = sign > 0 ? Rational(i->second + j->second) : Rational(i->second - j->second);
        if (sgn(c) != 0) out.terms_.emplace_back(i->first, std::move(c));
        ++i;
        ++j;
      }
    }
    return out;
  }

  std::vector<Term> terms_;
};

template <class Tag>
void TermAccumulator<Tag>::add_scaled(const LaurentPoly<Tag>& p, const Monomial& shift,
                                      const Rational& scale) {
  for (const auto& [m, c] : p.terms_) add(m * shift, c * scale);
}

template <class Tag>
LaurentPoly<Tag> TermAccumulator<Tag>::finish() && {
  LaurentPoly<Tag> out;
  out.terms_.reserve(terms_.size());
  for (auto& node : terms_)
    if (sgn(node.second) != 0) out.terms_.emplace_back(node.first, std::move(node.second));
  std::sort(out.terms_.begin(), out.terms_.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  terms_.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string superscript(long n) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string s = n < 0 ? "⁻" : "";
  const std::string dec = std::to_string(n < 0 ? -n : n);
  for (char ch : dec) s += digits[ch - '0'];
  return s;
}

inline std::string power(const std::string& base, long e) {
  return e == 1 ? base : base + superscript(e);
}

}  // namespace detail

template <class Tag>
std::string render_monomial(const Monomial& m) {
  std::string s;
  auto append = [&s](const std::string& f) {
    if (!s.empty()) s += ' ';
    s += f;
  };
  if (m.a_exp != 0) append(detail::power("a", m.a_exp));
  if (m.q_exp != 0) append(detail::power("q", m.q_exp));
  for (const auto& vp : m.vars) append(detail::power(Tag::var_name(vp.id), vp.exp));
  return s;
}

template <class Tag>
std::string LaurentPoly<Tag>::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    const bool neg = sgn(c) < 0;
    if (first) {
      if (neg) out += "−";
    } else {
      out += neg ? " − " : " + ";
    }
    first = false;
    const Rational mag = abs(c);
    const std::string mono = render_monomial<Tag>(m);
    if (mono.empty()) {
      out += kpl::to_string(mag);
    } else {
      if (mag != 1) out += kpl::to_string(mag) + " ";
      out += mono;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivations and substitutions

/// Leibniz-rule derivation. `rule` supplies the images of q and of each
/// variable id:
///   const LaurentPoly<Tag>& rule.dq();
///   const LaurentPoly<Tag>& rule.dvar(std::int32_t id);
/// The parameter a is a constant. When `raw_terms` is non-null it receives
/// the number of nonzero terms emitted before like terms were merged.
template <class Tag, class Rule>
LaurentPoly<Tag> derive(const LaurentPoly<Tag>& p, Rule& rule, std::size_t* raw_terms = nullptr) {
  TermAccumulator<Tag> acc;
  for (const auto& [m, c] : p.terms()) {
    if (m.q_exp != 0) {
      Monomial base = m;
      base.q_exp -= 1;
      acc.add_scaled(rule.dq(), base, c * m.q_exp);
    }
    for (std::size_t k = 0; k < m.vars.size(); ++k) {
      const auto [id, e] = m.vars[k];
      Monomial base = m;
      if (e == 1)
        base.vars.erase(base.vars.begin() + static_cast<std::ptrdiff_t>(k));
      else
        base.vars[k].exp -= 1;
      acc.add_scaled(rule.dvar(id), base, c * e);
    }
  }
  if (raw_terms != nullptr) *raw_terms = acc.raw_terms();
  return std::move(acc).finish();
}

/// Ring homomorphism from LaurentPoly<From> to LaurentPoly<To> that fixes q
/// and a and sends variable `id` to `image(id)`. Powers of images are cached
/// for the duration of the call; terms sharing a variable part share one product.
template <class To, class From, class Image>
LaurentPoly<To> substitute(const LaurentPoly<From>& p, Image&& image) {
  std::map<std::vector<VarPower>, std::vector<const typename LaurentPoly<From>::Term*>> groups;
  for (const auto& t : p.terms()) groups[t.first.vars].push_back(&t);

  std::map<std::pair<std::int32_t, std::int32_t>, LaurentPoly<To>> powers;
  auto power_of = [&](const VarPower& vp) -> const LaurentPoly<To>& {
    auto it = powers.find({vp.id, vp.exp});
    if (it != powers.end()) return it->second;
    const LaurentPoly<To>& img = image(vp.id);
    LaurentPoly<To> pw = vp.exp == 1 ? img : img.pow(static_cast<unsigned>(vp.exp));
    return powers.emplace(std::pair{vp.id, vp.exp}, std::move(pw)).first->second;
  };

  TermAccumulator<To> acc;
  for (const auto& [vars, members] : groups) {
    LaurentPoly<To> product = LaurentPoly<To>::constant(1);
    for (const auto& vp : vars) product *= power_of(vp);
    for (const auto* t : members)
      acc.add_scaled(product, Monomial{t->first.q_exp, t->first.a_exp, {}}, t->second);
  }
  return std::move(acc).finish();
}

}  // namespace kpl
