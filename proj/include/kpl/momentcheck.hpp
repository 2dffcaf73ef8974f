#pragma once

// The moment algebra: polynomials in
//   A_j = ‖∇ʲu‖²  (j ≥ 2),   B_j = ‖∇ʲu_t‖²  (j ≥ 1),   X_j = ∫∇ʲu·∇ʲu_t dx  (j ≥ 1)
// with Laurent exponents in q and a. A_1 is never a variable: it only enters
// through q = aA_1 + b. Along solutions of the mode system
//   d/dt A_j = 2X_j,   d/dt X_j = B_j − A_{j+1}/q²,   d/dt B_j = −2X_{j+1}/q²,
//   d/dt q = 2aX_1,
// which closes the algebra under time differentiation.

#include "kpl/lawgen.hpp"

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpl {

/// Variable id for moment (kind, j): 3j + {A:0, B:1, X:2}.
inline std::int32_t moment_id(MomentKind kind, int j) {
  if (j < 1 || (kind == MomentKind::A && j < 2))
    throw std::invalid_argument(std::string("invalid moment variable ") + kind_char(kind) + std::to_string(j) +
                                (kind == MomentKind::A && j == 1 ? " (A_1 is eliminated through q)" : ""));
  return 3 * j + static_cast<std::int32_t>(kind);
}

inline MomentKind moment_kind(std::int32_t id) { return static_cast<MomentKind>(id % 3); }
inline int moment_index(std::int32_t id) { return id / 3; }

struct MomentTag {
  static std::string var_name(std::int32_t id) {
    static const char* sub[] = {"₀", "₁", "₂", "₃", "₄", "₅", "₆", "₇", "₈", "₉"};
    std::string s(1, kind_char(moment_kind(id)));
    for (char c : std::to_string(moment_index(id))) s += sub[c - '0'];
    return s;
  }
};

using MomentPoly = LaurentPoly<MomentTag>;

inline MomentPoly moment_var(MomentKind kind, int j, std::int32_t exp = 1) {
  return MomentPoly::var(moment_id(kind, j), exp);
}

namespace detail {

class MomentDerivation {
 public:
  const MomentPoly& dq() const { return dq_; }

  const MomentPoly& dvar(std::int32_t id) {
    auto it = images_.find(id);
    if (it != images_.end()) return it->second;
    const int j = moment_index(id);
    MomentPoly img;
    switch (moment_kind(id)) {
      case MomentKind::A:
        img = Rational(2) * moment_var(MomentKind::X, j);
        break;
      case MomentKind::X:
        img = moment_var(MomentKind::B, j) - moment_var(MomentKind::A, j + 1).shift(-2, 0);
        break;
      case MomentKind::B:
        img = Rational(-2) * moment_var(MomentKind::X, j + 1).shift(-2, 0);
        break;
    }
    return images_.emplace(id, std::move(img)).first->second;
  }

 private:
  MomentPoly dq_ = Rational(2) * moment_var(MomentKind::X, 1).shift(0, 1);
  std::map<std::int32_t, MomentPoly> images_;
};

}  // namespace detail

/// Time derivative along the mode dynamics.
inline MomentPoly mm_derive(const MomentPoly& p, std::size_t* raw_terms = nullptr) {
  detail::MomentDerivation rule;
  return derive(p, rule, raw_terms);
}

/// Entries 0..h_max: q, 2aX_1, and successive mm_derive images.
inline std::vector<MomentPoly> q_derivative_table(int h_max) {
  std::vector<MomentPoly> table;
  table.push_back(MomentPoly::q());
  for (int h = 1; h <= h_max; ++h) table.push_back(mm_derive(table.back()));
  return table;
}

/// Lowers differential polynomials into the moment algebra, q^(h) ↦ table[h].
/// Keeps the table across calls.
class Lowerer {
 public:
  const MomentPoly& q_derivative(int h) {
    while (static_cast<int>(table_.size()) <= h) {
      if (table_.empty())
        table_.push_back(MomentPoly::q());
      else
        table_.push_back(mm_derive(table_.back()));
    }
    return table_[static_cast<std::size_t>(h)];
  }

  MomentPoly lower(const DiffPoly& p) {
    if (p.is_zero()) return {};
    q_derivative(p.max_var());
    return substitute<MomentTag>(p, [this](std::int32_t h) -> const MomentPoly& { return table_[static_cast<std::size_t>(h)]; });
  }

  MomentPoly lower_invariant(const InvariantDescriptor& inv) {
    TermAccumulator<MomentTag> acc;
    for (const auto& t : inv.terms) {
      const MomentPoly c = lower(t.coef);
      const Monomial var{0, 0, {{moment_id(t.kind, t.index), 1}}};
      acc.add_scaled(c, var, Rational(1));
    }
    acc.add_scaled(lower(inv.tail), Monomial{}, Rational(1));
    return std::move(acc).finish();
  }

 private:
  std::vector<MomentPoly> table_;
};

inline MomentPoly lower(const DiffPoly& p) { return Lowerer{}.lower(p); }

inline MomentPoly lower_invariant(const InvariantDescriptor& inv) { return Lowerer{}.lower_invariant(inv); }

struct VerificationCertificate {
  int k = 0;
  bool verified = false;
  std::size_t term_count_before_cancellation = 0;
};

inline VerificationCertificate certify_invariant(const InvariantDescriptor& inv, Lowerer& lowerer) {
  VerificationCertificate cert;
  cert.k = inv.k;
  const MomentPoly lowered = lowerer.lower_invariant(inv);
  const MomentPoly rate = mm_derive(lowered, &cert.term_count_before_cancellation);
  cert.verified = rate.is_zero();
  return cert;
}

inline VerificationCertificate certify_invariant(const InvariantDescriptor& inv) {
  Lowerer lowerer;
  return certify_invariant(inv, lowerer);
}

/// True iff the lowered functional has identically vanishing time derivative.
inline bool verify_invariant(const InvariantDescriptor& inv) { return certify_invariant(inv).verified; }

}  // namespace kpl
