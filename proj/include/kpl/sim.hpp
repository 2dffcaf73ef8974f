#pragma once

// Galerkin truncation of the Kirchhoff–Pokhozhaev equation on a finite set of
// Fourier modes with weights μ_j and squared wavenumbers xi2_j:
//
//     w_j'' + xi2_j w_j / q² = 0,     q = a Σ μ_j xi2_j |w_j|² + b.
//
// The truncated flow conserves every lowered I_k exactly, so the drift of an
// invariant along a numerical trajectory measures integrator error only.
// Trajectories can be integrated in double or in quad precision.

#include "kpl/momentcheck.hpp"
#include "kpl/precision.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpl::sim {

struct Mode {
  double xi2 = 1.0;
  double weight = 1.0;
};

class ModeSystem {
 public:
  ModeSystem(std::vector<Mode> modes, double a, double b) : modes_(std::move(modes)), a_(a), b_(b) {
    if (modes_.empty()) throw std::invalid_argument("mode system needs at least one mode");
    if (a_ == 0.0 || !std::isfinite(a_)) throw std::invalid_argument("parameter a must be finite and nonzero");
    if (!std::isfinite(b_)) throw std::invalid_argument("parameter b must be finite");
    for (const auto& m : modes_)
      if (!(m.xi2 > 0.0) || !(m.weight > 0.0) || !std::isfinite(m.xi2) || !std::isfinite(m.weight))
        throw std::invalid_argument("mode xi2 and weight must be positive and finite");
    std::stable_sort(modes_.begin(), modes_.end(), [](const Mode& l, const Mode& r) { return l.xi2 < r.xi2; });
  }

  /// xi2_j = j², unit weights, j = 1..n.
  static ModeSystem default_layout(std::size_t n, double a, double b) {
    std::vector<Mode> modes;
    for (std::size_t j = 1; j <= n; ++j) modes.push_back({static_cast<double>(j * j), 1.0});
    return {std::move(modes), a, b};
  }

  const std::vector<Mode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  double a() const { return a_; }
  double b() const { return b_; }
  /// |q| at or below this aborts a run.
  double q_floor() const { return 1e-9 * (std::abs(a_) + std::abs(b_)); }

 private:
  std::vector<Mode> modes_;
  double a_;
  double b_;
};

template <class Scalar>
struct BasicModeState {
  Scalar t{};
  std::vector<std::complex<Scalar>> w;
  std::vector<std::complex<Scalar>> v;
};

using ModeState = BasicModeState<double>;

template <class To, class From>
BasicModeState<To> convert_state(const BasicModeState<From>& s) {
  BasicModeState<To> out;
  out.t = To(s.t);
  for (const auto& z : s.w) out.w.emplace_back(To(z.real()), To(z.imag()));
  for (const auto& z : s.v) out.v.emplace_back(To(z.real()), To(z.imag()));
  return out;
}

/// q came within q_floor of zero, or changed sign between samples: the
/// standing hypothesis q ≠ 0 failed.
class QNearZero : public std::runtime_error {
 public:
  QNearZero(double q, double t, const char* what = "reached the zero guard")
      : std::runtime_error("q = " + std::to_string(q) + " " + what + " at t = " + std::to_string(t)),
        q_(q),
        t_(t) {}
  double q() const { return q_; }
  double t() const { return t_; }

 private:
  double q_;
  double t_;
};

namespace detail {

template <class Scalar>
Scalar squared_modulus(const std::complex<Scalar>& z) {
  return z.real() * z.real() + z.imag() * z.imag();
}

// Re(w̄ v)
template <class Scalar>
Scalar real_inner(const std::complex<Scalar>& w, const std::complex<Scalar>& v) {
  return w.real() * v.real() + w.imag() * v.imag();
}

template <class Scalar>
void check_shape(const BasicModeState<Scalar>& s, const ModeSystem& sys) {
  if (s.w.size() != sys.size() || s.v.size() != sys.size())
    throw std::invalid_argument("state length does not match the mode list");
}

template <class Scalar>
void guard_q(Scalar q, Scalar t, const ModeSystem& sys) {
  if (abs_value(q) <= Scalar(sys.q_floor())) throw QNearZero(static_cast<double>(q), static_cast<double>(t));
}

}  // namespace detail

template <class Scalar>
Scalar q_of(const BasicModeState<Scalar>& s, const ModeSystem& sys) {
  detail::check_shape(s, sys);
  Scalar grad2 = 0;
  for (std::size_t j = 0; j < sys.size(); ++j)
    grad2 += Scalar(sys.modes()[j].weight) * Scalar(sys.modes()[j].xi2) * detail::squared_modulus(s.w[j]);
  return Scalar(sys.a()) * grad2 + Scalar(sys.b());
}

template <class Scalar>
struct Derivative {
  std::vector<std::complex<Scalar>> dw;
  std::vector<std::complex<Scalar>> dv;
};

/// dw = v, dv = −xi2 w / q². Throws QNearZero when |q| ≤ q_floor.
template <class Scalar>
Derivative<Scalar> rhs(const BasicModeState<Scalar>& s, const ModeSystem& sys) {
  const Scalar q = q_of(s, sys);
  detail::guard_q(q, s.t, sys);
  const Scalar inv_q2 = Scalar(1) / (q * q);
  Derivative<Scalar> d{s.v, std::vector<std::complex<Scalar>>(sys.size())};
  for (std::size_t j = 0; j < sys.size(); ++j) d.dv[j] = s.w[j] * (-Scalar(sys.modes()[j].xi2) * inv_q2);
  return d;
}

/// Classical fourth-order Runge–Kutta step; q is re-evaluated at every stage.
/// Negative dt integrates backwards.
template <class Scalar>
BasicModeState<Scalar> step_rk4(const BasicModeState<Scalar>& s, const ModeSystem& sys, Scalar dt) {
  if (dt == Scalar(0) || !(abs_value(dt) < Scalar(1e300)))
    throw std::invalid_argument("step_rk4: dt must be finite and nonzero");
  const std::size_t n = sys.size();
  auto shifted = [&](const Derivative<Scalar>& d, Scalar h) {
    BasicModeState<Scalar> out{s.t + h, s.w, s.v};
    for (std::size_t j = 0; j < n; ++j) {
      out.w[j] += d.dw[j] * h;
      out.v[j] += d.dv[j] * h;
    }
    return out;
  };
  const Scalar half = dt / Scalar(2);
  const auto k1 = rhs(s, sys);
  const auto k2 = rhs(shifted(k1, half), sys);
  const auto k3 = rhs(shifted(k2, half), sys);
  const auto k4 = rhs(shifted(k3, dt), sys);
  BasicModeState<Scalar> out{s.t + dt, s.w, s.v};
  const Scalar h6 = dt / Scalar(6);
  const Scalar two = 2;
  for (std::size_t j = 0; j < n; ++j) {
    out.w[j] += (k1.dw[j] + k2.dw[j] * two + k3.dw[j] * two + k4.dw[j]) * h6;
    out.v[j] += (k1.dv[j] + k2.dv[j] * two + k3.dv[j] * two + k4.dv[j]) * h6;
  }
  return out;
}

/// Moment values at a state. Vectors are indexed by j directly:
/// A[j] = Σ μ xi2ʲ |w|², B[j] = Σ μ xi2ʲ |v|², X[j] = Σ μ xi2ʲ Re(w̄v).
template <class Scalar>
struct BasicMoments {
  Scalar q = 0;
  Scalar a = 0;
  std::vector<Scalar> A, B, X;

  Scalar value(std::int32_t id) const {
    const auto j = static_cast<std::size_t>(moment_index(id));
    const auto& vec = moment_kind(id) == MomentKind::A ? A : moment_kind(id) == MomentKind::B ? B : X;
    if (j >= vec.size()) throw std::out_of_range("moment index beyond the evaluated range");
    return vec[j];
  }
};

using Moments = BasicMoments<double>;

template <class Scalar>
BasicMoments<Scalar> moments(const BasicModeState<Scalar>& s, const ModeSystem& sys, int j_max) {
  if (j_max < 2) throw std::invalid_argument("moments: j_max must be ≥ 2");
  detail::check_shape(s, sys);
  const auto len = static_cast<std::size_t>(j_max) + 1;
  BasicMoments<Scalar> m;
  m.q = q_of(s, sys);
  m.a = Scalar(sys.a());
  m.A.assign(len, Scalar(0));
  m.B.assign(len, Scalar(0));
  m.X.assign(len, Scalar(0));
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Scalar w2 = detail::squared_modulus(s.w[i]);
    const Scalar v2 = detail::squared_modulus(s.v[i]);
    const Scalar wv = detail::real_inner(s.w[i], s.v[i]);
    const Scalar xi2 = Scalar(sys.modes()[i].xi2);
    Scalar scale = Scalar(sys.modes()[i].weight);
    for (std::size_t j = 0; j < len; ++j) {
      m.A[j] += scale * w2;
      m.B[j] += scale * v2;
      m.X[j] += scale * wv;
      scale *= xi2;
    }
  }
  return m;
}

/// A moment polynomial with coefficients converted to Scalar.
template <class Scalar>
class CompiledPoly {
 public:
  CompiledPoly() = default;

  explicit CompiledPoly(const MomentPoly& p) {
    terms_.reserve(p.size());
    for (const auto& [m, c] : p.terms()) terms_.push_back({rational_to<Scalar>(c), m});
    for (const auto& t : terms_) max_var_ = std::max(max_var_, t.mono.max_var());
  }

  Scalar operator()(const BasicMoments<Scalar>& mom) const {
    Scalar sum = 0;
    for (const auto& t : terms_) {
      Scalar v = t.coef * ipow(mom.q, t.mono.q_exp) * ipow(mom.a, t.mono.a_exp);
      for (const auto& vp : t.mono.vars) v *= ipow(mom.value(vp.id), vp.exp);
      sum += v;
    }
    return sum;
  }

  std::int32_t max_var() const { return max_var_; }
  std::size_t size() const { return terms_.size(); }

 private:
  static Scalar ipow(Scalar x, std::int32_t e) {
    if (e < 0) return Scalar(1) / ipow(x, -e);
    Scalar r = 1;
    for (std::int32_t i = 0; i < e; ++i) r *= x;
    return r;
  }

  struct Term {
    Scalar coef;
    Monomial mono;
  };
  std::vector<Term> terms_;
  std::int32_t max_var_ = 0;
};

/// A lowered invariant ready for repeated numerical evaluation.
template <class Scalar>
class CompiledInvariant {
 public:
  CompiledInvariant(const InvariantDescriptor& inv, Lowerer& lowerer)
      : CompiledInvariant(lowerer.lower_invariant(inv), inv.k) {}

  explicit CompiledInvariant(const MomentPoly& p, int k = 0) : poly_(p), k_(k) {
    max_index_ = std::max(2, moment_index(poly_.max_var()));
  }

  Scalar operator()(const BasicMoments<Scalar>& m) const { return poly_(m); }

  /// Largest moment index the polynomial reads.
  int max_index() const { return max_index_; }
  int k() const { return k_; }

 private:
  CompiledPoly<Scalar> poly_;
  int k_;
  int max_index_;
};

/// Value of the lowered invariant at a state. Throws QNearZero when |q| ≤ q_floor.
template <class Scalar>
Scalar eval_invariant(const InvariantDescriptor& inv, const BasicModeState<Scalar>& s, const ModeSystem& sys) {
  Lowerer lowerer;
  const CompiledInvariant<Scalar> ci(inv, lowerer);
  const auto m = moments(s, sys, ci.max_index());
  detail::guard_q(m.q, s.t, sys);
  return ci(m);
}

/// w_j = r e^{iθ} xi2^{-(d+1)/2}, v_j = r' e^{iθ'} xi2^{-d/2}, r ∈ [0.5, 1],
/// θ uniform; d = decay_order. Deterministic in the seed.
inline ModeState random_initial_state(const ModeSystem& sys, std::uint64_t seed, int decay_order) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.5, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  ModeState s;
  for (const auto& mode : sys.modes()) {
    const double rw = radius(rng);
    const double tw = angle(rng);
    const double rv = radius(rng);
    const double tv = angle(rng);
    s.w.push_back(std::polar(rw * std::pow(mode.xi2, -(decay_order + 1) / 2.0), tw));
    s.v.push_back(std::polar(rv * std::pow(mode.xi2, -decay_order / 2.0), tv));
  }
  return s;
}

struct NamedInvariant {
  std::string name;
  InvariantDescriptor descriptor;
};

/// max_t |I(t) − I(0)| / max(|I(0)|, 1e-12), computed in quad precision.
inline double relative_drift(std::span<const quad> series) {
  if (series.empty()) return 0.0;
  const quad ref = series.front();
  quad worst = 0;
  for (quad v : series) worst = std::max(worst, abs_value(v - ref));
  const quad scale = std::max(abs_value(ref), quad(1e-12));
  return static_cast<double>(worst / scale);
}

inline double relative_drift(std::span<const double> series) {
  std::vector<quad> wide(series.begin(), series.end());
  return relative_drift(std::span<const quad>(wide));
}

/// Sampled trajectory of a run. Series are stored in quad so that runs of
/// either precision share one representation; values from double runs are exact.
struct DriftReport {
  std::vector<std::string> names;
  std::vector<quad> times;
  std::vector<quad> q;
  std::vector<std::vector<quad>> values;  // values[i][n]: invariant i at sample n
  std::vector<double> drift;
  double dt = 0.0;
  std::size_t steps = 0;
  std::string method = "rk4";
  Precision precision = Precision::Double;
  bool valid = true;
  std::string error;
};

/// Fixed-step RK4 from `initial` over `horizon`, sampling every step.
/// A QNearZero abort returns the partial report with valid = false.
template <class Scalar>
DriftReport run(const ModeSystem& sys, const ModeState& initial, double horizon, double dt,
                const std::vector<NamedInvariant>& invariants) {
  if (!(horizon > 0.0)) throw std::invalid_argument("run: horizon must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("run: dt must be positive");
  detail::check_shape(initial, sys);

  Lowerer lowerer;
  std::vector<CompiledInvariant<Scalar>> compiled;
  int j_max = 2;
  DriftReport report;
  report.dt = dt;
  report.precision = std::is_same_v<Scalar, quad> ? Precision::Quad : Precision::Double;
  for (const auto& ni : invariants) {
    compiled.emplace_back(ni.descriptor, lowerer);
    j_max = std::max(j_max, compiled.back().max_index());
    report.names.push_back(ni.name);
  }
  report.values.resize(invariants.size());
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

  int q_sign = 0;
  auto sample = [&](const BasicModeState<Scalar>& s) {
    const auto m = moments(s, sys, j_max);
    detail::guard_q(m.q, s.t, sys);
    const int sign = m.q > Scalar(0) ? 1 : -1;
    if (q_sign == 0) q_sign = sign;
    if (sign != q_sign) throw QNearZero(static_cast<double>(m.q), static_cast<double>(s.t), "crossed zero");
    report.times.push_back(quad(s.t));
    report.q.push_back(quad(m.q));
    for (std::size_t i = 0; i < compiled.size(); ++i) report.values[i].push_back(quad(compiled[i](m)));
  };

  const Scalar step = Scalar(dt);
  BasicModeState<Scalar> state = convert_state<Scalar>(initial);
  const Scalar t0 = state.t;
  try {
    sample(state);
    for (std::size_t n = 1; n <= steps; ++n) {
      state = step_rk4(state, sys, step);
      state.t = t0 + Scalar(static_cast<double>(n)) * step;
      sample(state);
      report.steps = n;
    }
  } catch (const QNearZero& e) {
    report.valid = false;
    report.error = e.what();
  }
  for (const auto& series : report.values) report.drift.push_back(relative_drift(std::span<const quad>(series)));
  return report;
}

inline DriftReport run(const ModeSystem& sys, const ModeState& initial, double horizon, double dt,
                       const std::vector<NamedInvariant>& invariants, Precision precision = Precision::Double) {
  return precision == Precision::Quad ? run<quad>(sys, initial, horizon, dt, invariants)
                                      : run<double>(sys, initial, horizon, dt, invariants);
}

/// Drift reports for dt, dt/2, ..., dt/2^halvings, with per-invariant orders.
struct ConvergenceStudy {
  std::vector<DriftReport> runs;
  std::vector<std::vector<double>> pairwise_order;  // [invariant][pair]
  std::vector<double> fitted_order;                 // least-squares slope of log drift against log dt
};

/// log2(coarse / fine) for a dt-halving pair.
inline double pairwise_order(double coarse_drift, double fine_drift) { return std::log2(coarse_drift / fine_drift); }

inline double fitted_order(std::span<const double> dts, std::span<const double> drifts) {
  if (dts.size() != drifts.size() || dts.size() < 2)
    throw std::invalid_argument("fitted_order: need at least two (dt, drift) pairs");
  const auto n = static_cast<double>(dts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log2(dts[i]);
    const double y = std::log2(drifts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Fills pairwise and fitted orders from runs sorted by decreasing dt.
inline void summarize_orders(ConvergenceStudy& study) {
  study.pairwise_order.clear();
  study.fitted_order.clear();
  if (study.runs.size() < 2) return;
  const std::size_t n_inv = study.runs.front().drift.size();
  study.pairwise_order.assign(n_inv, {});
  study.fitted_order.assign(n_inv, 0.0);
  for (std::size_t i = 0; i < n_inv; ++i) {
    std::vector<double> dts, drifts;
    for (std::size_t r = 0; r < study.runs.size(); ++r) {
      dts.push_back(study.runs[r].dt);
      drifts.push_back(study.runs[r].drift[i]);
      if (r > 0) study.pairwise_order[i].push_back(pairwise_order(study.runs[r - 1].drift[i], study.runs[r].drift[i]));
    }
    study.fitted_order[i] = fitted_order(dts, drifts);
  }
}

/// Runs the dt-halving sweep. Independent runs execute concurrently; results
/// are stored in dt order regardless of completion order.
inline ConvergenceStudy convergence_study(const ModeSystem& sys, const ModeState& initial, double horizon, double dt,
                                          int halvings, const std::vector<NamedInvariant>& invariants,
                                          Precision precision = Precision::Double) {
  if (halvings < 0) throw std::invalid_argument("convergence_study: halvings must be ≥ 0");
  std::vector<std::future<DriftReport>> jobs;
  for (int h = 0; h <= halvings; ++h) {
    const double step = std::ldexp(dt, -h);
    jobs.push_back(std::async(std::launch::async,
                              [&, step] { return run(sys, initial, horizon, step, invariants, precision); }));
  }
  ConvergenceStudy study;
  for (auto& j : jobs) study.runs.push_back(j.get());
  summarize_orders(study);
  return study;
}

}  // namespace kpl::sim
