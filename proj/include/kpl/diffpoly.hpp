#pragma once

// The differential ring Q[q, q⁻¹, a, a⁻¹][q', q'', ...] with time derivation
// d/dt q^(h) = q^(h+1). Variable id h ≥ 1 stands for q^(h).

#include "kpl/laurent_poly.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace kpl {

struct DiffTag {
  static std::string var_name(std::int32_t h) {
    switch (h) {
      case 1: return "q′";
      case 2: return "q″";
      case 3: return "q‴";
      default: return "q⁽" + detail::superscript(h) + "⁾";
    }
  }
};

using DiffPoly = LaurentPoly<DiffTag>;

/// q^(h); h = 0 gives q itself.
inline DiffPoly qd(std::int32_t h, std::int32_t exp = 1) {
  return h == 0 ? DiffPoly::q(exp) : DiffPoly::var(h, exp);
}

namespace detail {

class TimeDerivation {
 public:
  const DiffPoly& dq() const { return dq_; }
  const DiffPoly& dvar(std::int32_t h) {
    auto idx = static_cast<std::size_t>(h);
    while (images_.size() <= idx) images_.push_back(DiffPoly::var(static_cast<std::int32_t>(images_.size()) + 1));
    return images_[idx];
  }

 private:
  DiffPoly dq_ = DiffPoly::var(1);
  std::vector<DiffPoly> images_;
};

}  // namespace detail

inline DiffPoly dp_add(const DiffPoly& p, const DiffPoly& r) { return p + r; }
inline DiffPoly dp_mul(const DiffPoly& p, const DiffPoly& r) { return p * r; }

/// Time derivative: d/dt q^e = e q^(e-1) q', d/dt q^(h) = q^(h+1), a constant.
inline DiffPoly dp_derive(const DiffPoly& p) {
  detail::TimeDerivation rule;
  return derive(p, rule);
}

inline DiffPoly dp_derive(const DiffPoly& p, unsigned times) {
  DiffPoly out = p;
  for (unsigned i = 0; i < times; ++i) out = dp_derive(out);
  return out;
}

/// True iff d/dt F = f exactly.
inline bool dp_check_antiderivative(const DiffPoly& F, const DiffPoly& f) {
  return (dp_derive(F) - f).is_zero();
}

/// Highest derivative order of q present; 0 when only powers of q and a appear.
inline int dp_max_order(const DiffPoly& p) {
  if (p.is_zero()) throw std::domain_error("dp_max_order: order of the zero polynomial is undefined");
  return p.max_var();
}

inline DiffPoly dp_divide_by_q(const DiffPoly& p) { return p.shift(-1, 0); }

}  // namespace kpl
