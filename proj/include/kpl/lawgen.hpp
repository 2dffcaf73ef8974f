#pragma once

// Constructive generation of the conserved functionals I_k of
//
//     u_tt − Δu / (a‖∇u‖² + b)² = 0,        q = a‖∇u‖² + b.
//
// The coefficient sequence G_0, G_1, ... is built purely algebraically:
// every indefinite integral that appears is produced in closed form by the
// integration-by-parts reductions below and certified by differentiation in
// the tests. All integration constants are fixed: G_0 = q, and every other
// constant is 0, so each order k has one canonical law.

#include "kpl/diffpoly.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpl {

/// Raised when a reduction needs a G_i that has not been generated yet.
class MissingLawError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Memoized G_i together with their first three time derivatives.
/// The expression of G_i does not depend on k, so one cache serves every order.
/// Not internally synchronized: share it read-only once filled.
class LawCache {
 public:
  /// G_i, generating G_0..G_i on demand.
  const DiffPoly& G(std::size_t i) {
    while (derivs_.size() <= i) append_next();
    return derivs_[i][0];
  }

  /// n-th time derivative of an already generated G_i (0 ≤ n ≤ 3).
  const DiffPoly& G_deriv(std::size_t i, std::size_t n) const {
    if (i >= derivs_.size())
      throw MissingLawError("G_" + std::to_string(i) + " has not been generated");
    return derivs_[i].at(n);
  }

  std::size_t size() const { return derivs_.size(); }

  const DiffPoly& alpha(std::size_t i) { return coeff(i).alpha; }
  const DiffPoly& beta(std::size_t i) { return coeff(i).beta; }
  const DiffPoly& gamma(std::size_t i) { return coeff(i).gamma; }

 private:
  struct Coeffs {
    DiffPoly alpha, beta, gamma;
  };

  void append_next();
  const Coeffs& coeff(std::size_t i);

  std::vector<std::array<DiffPoly, 4>> derivs_;
  std::vector<Coeffs> coeffs_;
};

namespace detail {

// G_i G_j'' − G_i' G_j' + G_i'' G_j: boundary part of integrating G_i G_j''' by parts three times.
inline DiffPoly ibp_boundary(const LawCache& c, std::size_t i, std::size_t j) {
  return c.G_deriv(i, 0) * c.G_deriv(j, 2) - c.G_deriv(i, 1) * c.G_deriv(j, 1) +
         c.G_deriv(i, 2) * c.G_deriv(j, 0);
}

// Closed-form antiderivative of G_i G_j''' for i ≤ j, obtained by repeatedly
// trading G_i''' for a derivative of G_{i+1}/q until the indices meet.
inline DiffPoly antiderivative_G_G3(const LawCache& c, std::size_t i, std::size_t j) {
  DiffPoly total;
  while (true) {
    if (i == j) {
      // ∫ G G''' = G G'' − ½ G'²
      const DiffPoly& g1 = c.G_deriv(i, 1);
      return total + c.G_deriv(i, 0) * c.G_deriv(i, 2) - make_rational(1, 2) * (g1 * g1);
    }
    if (i + 1 == j) {
      // ∫ G_i G_j''' = boundary + 4 ∫ (G_j/q)'(G_j/q) = boundary + 2 (G_j/q)²
      const DiffPoly gq = dp_divide_by_q(c.G_deriv(j, 0));
      return total + ibp_boundary(c, i, j) + Rational(2) * (gq * gq);
    }
    total += ibp_boundary(c, i, j) + Rational(4) * (c.G_deriv(i + 1, 0) * c.G_deriv(j, 0)).shift(-2, 0);
    ++i;
    --j;
  }
}

}  // namespace detail

/// Closed-form antiderivative of G_1 · G_j''' (integration constant 0).
/// Requires G_0..G_max(j,1) in the cache; throws MissingLawError otherwise.
inline DiffPoly int_G1_G3(std::size_t j, const LawCache& cache) {
  const std::size_t needed = std::max<std::size_t>(j, 1);
  if (cache.size() <= needed)
    throw MissingLawError("int_G1_G3(" + std::to_string(j) + ") needs G_0..G_" + std::to_string(needed));
  if (j == 0) {
    // ∫ G_1 q''' = ∫ (G_1/q)(q q''') = −4 ∫ (G_1/q)(G_1/q)' = −2 (G_1/q)²
    const DiffPoly g1q = dp_divide_by_q(cache.G_deriv(1, 0));
    return Rational(-2) * (g1q * g1q);
  }
  return detail::antiderivative_G_G3(cache, 1, j);
}

/// G_i from G_0..G_{i-1}. Throws MissingLawError when the predecessors are absent.
inline DiffPoly gen_G(std::size_t i, const LawCache& cache) {
  if (i == 0) return DiffPoly::q();
  if (cache.size() < i)
    throw MissingLawError("gen_G(" + std::to_string(i) + ") needs G_0..G_" + std::to_string(i - 1));
  if (i == 1) {
    // q q'²/8 − q² q''/4
    return make_rational(1, 8) * (qd(0) * qd(1, 2)) - make_rational(1, 4) * (qd(0, 2) * qd(2));
  }
  const std::size_t p = i - 1;
  DiffPoly bracket = qd(0) * cache.G_deriv(p, 2) - qd(1) * cache.G_deriv(p, 1) +
                     qd(2) * cache.G_deriv(p, 0) +
                     Rational(4) * (cache.G_deriv(1, 0) * cache.G_deriv(p, 0)).shift(-2, 0) +
                     int_G1_G3(i - 2, cache);
  return make_rational(-1, 4) * bracket.shift(1, 0);
}

inline void LawCache::append_next() {
  DiffPoly g = gen_G(derivs_.size(), *this);
  std::array<DiffPoly, 4> d;
  d[0] = std::move(g);
  for (std::size_t n = 1; n < 4; ++n) d[n] = dp_derive(d[n - 1]);
  derivs_.push_back(std::move(d));
}

inline const LawCache::Coeffs& LawCache::coeff(std::size_t i) {
  while (coeffs_.size() <= i) {
    const std::size_t n = coeffs_.size();
    G(n);
    Coeffs c;
    c.beta = -G_deriv(n, 1);
    c.gamma = make_rational(-1, 2) * G_deriv(n, 2).shift(2, 0);
    c.alpha = n == 0 ? G_deriv(0, 0) : G_deriv(n, 0) - coeffs_[n - 1].gamma;
    coeffs_.push_back(std::move(c));
  }
  return coeffs_[i];
}

/// Coefficients of the order-k quadratic form. All lists are indexed 0..k−2;
/// gamma[k−2] is the auxiliary closing term of the recursion.
struct LawSet {
  int k = 0;
  std::vector<DiffPoly> G, alpha, beta, gamma;
  DiffPoly Q;
};

inline void require_order(int k, int min, const char* what) {
  if (k < min)
    throw std::invalid_argument(std::string(what) + ": k must be ≥ " + std::to_string(min) +
                                ", got " + std::to_string(k));
}

/// G, α, β, γ for order k (Q left empty; see gen_Q / gen_law_set).
inline LawSet gen_coeffs(int k, LawCache& cache) {
  require_order(k, 3, "gen_coeffs");
  LawSet out;
  out.k = k;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(k - 2); ++i) {
    out.G.push_back(cache.G(i));
    out.alpha.push_back(cache.alpha(i));
    out.beta.push_back(cache.beta(i));
    out.gamma.push_back(cache.gamma(i));
  }
  return out;
}

inline LawSet gen_coeffs(int k) {
  LawCache cache;
  return gen_coeffs(k, cache);
}

/// Q_k with β'_{k−2} q' = (β_{k−2} q')' + Q_k'.
inline DiffPoly gen_Q(int k, const LawCache& cache) {
  require_order(k, 3, "gen_Q");
  const auto top = static_cast<std::size_t>(k - 2);
  if (cache.size() <= top) throw MissingLawError("gen_Q(" + std::to_string(k) + ") needs G_0..G_" + std::to_string(top));
  const DiffPoly& g1 = cache.G_deriv(1, 0);
  if (k == 3) {
    const DiffPoly g1q = dp_divide_by_q(g1);
    return g1 * qd(2) + Rational(2) * (g1q * g1q);
  }
  const DiffPoly& gt = cache.G_deriv(top, 0);
  return gt * qd(2) + Rational(4) * (g1 * gt).shift(-2, 0) + int_G1_G3(top - 1, cache);
}

inline LawSet gen_law_set(int k, LawCache& cache) {
  LawSet out = gen_coeffs(k, cache);
  out.Q = gen_Q(k, cache);
  return out;
}

inline LawSet gen_law_set(int k) {
  LawCache cache;
  return gen_law_set(k, cache);
}

struct LawCheck {
  std::string name;
  bool passed = false;
};

/// Exact identities the order-k law set must satisfy: the coefficient system
/// residuals, the G_i/q relation, divisibility by q, derivative-order bounds,
/// antiderivative certificates of every closed-form integral, and the Q_k certificate.
inline std::vector<LawCheck> check_law_set(const LawSet& s) {
  std::vector<LawCheck> out;
  auto add = [&out](std::string name, bool ok) { out.push_back({std::move(name), ok}); };
  auto order = [](const DiffPoly& p) { return p.is_zero() ? 0 : dp_max_order(p); };
  const auto n = s.G.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "[" + std::to_string(i) + "]";
    const DiffPoly gamma_prev = i == 0 ? DiffPoly{} : s.gamma[i - 1];
    add("residual alpha/q^2" + tag, (dp_derive(s.alpha[i].shift(-2, 0)) - s.beta[i].shift(-2, 0)).is_zero());
    add("residual alpha+beta+gamma" + tag, (dp_derive(s.alpha[i]) + s.beta[i] + dp_derive(gamma_prev)).is_zero());
    add("residual beta/gamma" + tag, (dp_derive(s.beta[i]) - Rational(2) * s.gamma[i].shift(-2, 0)).is_zero());
    if (i >= 1)
      add("G/q relation" + tag,
          (dp_derive(dp_divide_by_q(s.G[i])) + make_rational(1, 4) * dp_derive(s.G[i - 1], 3).shift(1, 0)).is_zero());
    add("G divisible by q" + tag, s.G[i].is_zero() || dp_divide_by_q(s.G[i]).min_q_exp() >= 0);
    const int bound = 2 * static_cast<int>(i);
    add("order bounds" + tag, order(s.G[i]) <= bound && order(s.alpha[i]) <= bound &&
                                  order(s.beta[i]) <= bound + 1 && order(s.gamma[i]) <= bound + 2);
  }
  LawCache cache;
  for (std::size_t i = 0; i < n; ++i) cache.G(i);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const DiffPoly integrand = s.G[1] * dp_derive(s.G[j], 3);
    add("antiderivative G_1 G_j'''[" + std::to_string(j) + "]", dp_check_antiderivative(int_G1_G3(j, cache), integrand));
  }
  const DiffPoly& bt = s.beta.back();
  add("Q certificate", (dp_derive(bt) * qd(1) - dp_derive(bt * qd(1)) - dp_derive(s.Q)).is_zero());
  add("Q order bound", order(s.Q) <= 2 * s.k - 4);
  return out;
}

// ---------------------------------------------------------------------------
// Invariant descriptors

/// A_j = ‖∇ʲu‖², B_j = ‖∇ʲu_t‖², X_j = ∫∇ʲu·∇ʲu_t dx.
enum class MomentKind { A, B, X };

inline char kind_char(MomentKind k) {
  switch (k) {
    case MomentKind::A: return 'A';
    case MomentKind::B: return 'B';
    case MomentKind::X: return 'X';
  }
  return '?';
}

inline MomentKind kind_from_char(char c) {
  switch (c) {
    case 'A': return MomentKind::A;
    case 'B': return MomentKind::B;
    case 'X': return MomentKind::X;
    default: throw std::invalid_argument(std::string("unknown moment kind '") + c + "'");
  }
}

struct MomentTerm {
  DiffPoly coef;
  MomentKind kind = MomentKind::A;
  int index = 1;
  friend bool operator==(const MomentTerm&, const MomentTerm&) = default;
};

/// I = Σ coef · (moment variable) + tail.
struct InvariantDescriptor {
  int k = 0;
  std::vector<MomentTerm> terms;
  DiffPoly tail;
  friend bool operator==(const InvariantDescriptor&, const InvariantDescriptor&) = default;
};

/// The invariant of order k. k = 2 is the classical second-order law
/// q‖∇u_t‖² + ‖Δu‖²/q − a(∫∇u·∇u_t)², written with the X_1 coefficient −q'/2
/// (q' = 2aX_1). For k ≥ 3 the terms are, in order: the principal part
/// (q on B_{k−1}, q⁻¹ on A_k, −q' on X_{k−1}), α_i on B_{k−i−1} and α_i q⁻² on
/// A_{k−i} (1 ≤ i ≤ k−2), β_i on X_{k−i−1} (1 ≤ i ≤ k−3), γ_i on B_{k−i−2}
/// (0 ≤ i ≤ k−3), and tail −Q_k/(2a).
inline InvariantDescriptor gen_invariant(int k, LawCache& cache) {
  require_order(k, 2, "gen_invariant");
  InvariantDescriptor inv;
  inv.k = k;
  if (k == 2) {
    inv.terms = {{qd(0), MomentKind::B, 1},
                 {DiffPoly::q(-1), MomentKind::A, 2},
                 {make_rational(-1, 2) * qd(1), MomentKind::X, 1}};
    return inv;
  }
  const int top = k - 2;
  inv.terms.push_back({cache.alpha(0), MomentKind::B, k - 1});
  inv.terms.push_back({cache.alpha(0).shift(-2, 0), MomentKind::A, k});
  inv.terms.push_back({cache.beta(0), MomentKind::X, k - 1});
  for (int i = 1; i <= top; ++i) {
    const DiffPoly& al = cache.alpha(static_cast<std::size_t>(i));
    inv.terms.push_back({al, MomentKind::B, k - i - 1});
    inv.terms.push_back({al.shift(-2, 0), MomentKind::A, k - i});
  }
  for (int i = 1; i <= top - 1; ++i)
    inv.terms.push_back({cache.beta(static_cast<std::size_t>(i)), MomentKind::X, k - i - 1});
  for (int i = 0; i <= top - 1; ++i)
    inv.terms.push_back({cache.gamma(static_cast<std::size_t>(i)), MomentKind::B, k - i - 2});
  inv.tail = make_rational(-1, 2) * gen_Q(k, cache).shift(0, -1);
  return inv;
}

inline InvariantDescriptor gen_invariant(int k) {
  LawCache cache;
  return gen_invariant(k, cache);
}

/// The quadratic form E_k integrated over frequencies: every α_i, β_i, γ_i
/// term including the closing β_{k−2} X_1, and no tail. Its time derivative
/// is β'_{k−2} X_1.
inline InvariantDescriptor energy_functional(int k, LawCache& cache) {
  require_order(k, 3, "energy_functional");
  InvariantDescriptor inv;
  inv.k = k;
  const int top = k - 2;
  for (int i = 0; i <= top; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    inv.terms.push_back({cache.alpha(ui), MomentKind::B, k - i - 1});
    inv.terms.push_back({cache.alpha(ui).shift(-2, 0), MomentKind::A, k - i});
    inv.terms.push_back({cache.beta(ui), MomentKind::X, k - i - 1});
    if (i < top) inv.terms.push_back({cache.gamma(ui), MomentKind::B, k - i - 2});
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

// ∇ʲ with ∇^{2i} = Δ^i and ∇^{2i+1} = ∇Δ^i.
inline std::string nabla_power(int j, const std::string& f) {
  std::string s;
  if (j % 2 == 1) s += "∇";
  const int lap = j / 2;
  if (lap >= 1) s += "Δ";
  if (lap >= 2) s += superscript(lap);
  return s + f;
}

inline std::string moment_text(MomentKind kind, int j) {
  switch (kind) {
    case MomentKind::A: return "‖" + nabla_power(j, "u") + "‖²";
    case MomentKind::B: return "‖" + nabla_power(j, "u_t") + "‖²";
    case MomentKind::X: return "∫" + nabla_power(j, "u") + "·" + nabla_power(j, "u_t") + " dx";
  }
  return {};
}

inline void append_signed(std::string& out, bool negative, const std::string& body) {
  if (out.empty())
    out += negative ? "−" + body : body;
  else
    out += (negative ? " − " : " + ") + body;
}

}  // namespace detail

/// Human-readable rendering in norm notation. Deterministic.
inline std::string render_law(const InvariantDescriptor& inv) {
  std::string out;
  for (const auto& t : inv.terms) {
    if (t.coef.is_zero()) continue;
    const std::string var = detail::moment_text(t.kind, t.index);
    if (t.coef.size() != 1) {
      detail::append_signed(out, false, "(" + t.coef.to_string() + ")" + var);
      continue;
    }
    const auto& [m, c] = t.coef.terms().front();
    const bool neg = sgn(c) < 0;
    const Rational mag = abs(c);
    const std::string mag_text = mag == 1 ? "" : to_string(mag) + " ";
    const Monomial qprime{0, 0, {{1, 1}}};
    if (t.kind == MomentKind::X && t.index == 1 && m == qprime) {
      // c q' X_1 = 2c a X_1², since q' = 2a X_1
      const Rational f = abs(Rational(2 * c));
      detail::append_signed(out, neg, (f == 1 ? "" : to_string(f) + " ") + "a(" + var + ")²");
    } else if (m == Monomial{-1, 0, {}}) {
      detail::append_signed(out, neg, mag_text + var + "/q");
    } else if (m.is_one()) {
      detail::append_signed(out, neg, mag_text + var);
    } else {
      detail::append_signed(out, neg, mag_text + render_monomial<DiffTag>(m) + var);
    }
  }
  if (!inv.tail.is_zero()) detail::append_signed(out, false, "(" + inv.tail.to_string() + ")");
  return out.empty() ? "0" : out;
}

}  // namespace kpl
