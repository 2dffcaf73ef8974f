#include "generators.hpp"

#include <gtest/gtest.h>

using namespace kpl;

namespace {

MomentPoly A(int j) { return moment_var(MomentKind::A, j); }
MomentPoly B(int j) { return moment_var(MomentKind::B, j); }
MomentPoly X(int j) { return moment_var(MomentKind::X, j); }
MomentPoly q(int e = 1) { return MomentPoly::q(e); }
MomentPoly a(int e = 1) { return MomentPoly::a(e); }

int max_index(const MomentPoly& p) {
  int out = 0;
  for (const auto& [m, c] : p.terms())
    for (const auto& vp : m.vars) out = std::max(out, moment_index(vp.id));
  return out;
}

}  // namespace

TEST(MomentVariables, IdsRoundTrip) {
  for (int j = 1; j <= 6; ++j)
    for (MomentKind kind : {MomentKind::A, MomentKind::B, MomentKind::X}) {
      if (kind == MomentKind::A && j == 1) continue;
      const auto id = moment_id(kind, j);
      EXPECT_EQ(moment_kind(id), kind);
      EXPECT_EQ(moment_index(id), j);
    }
}

TEST(MomentVariables, FirstDirichletMomentIsNotAVariable) {
  EXPECT_THROW(moment_id(MomentKind::A, 1), std::invalid_argument);
  EXPECT_THROW(moment_id(MomentKind::B, 0), std::invalid_argument);
}

TEST(MomentVariables, Names) { EXPECT_EQ((a() * q(-2) * A(2) * X(1)).to_string(), "a q⁻² X₁ A₂"); }

TEST(MmDerive, Rules) {
  EXPECT_EQ(mm_derive(q()), Rational(2) * a() * X(1));
  EXPECT_EQ(mm_derive(X(1)), B(1) - A(2) * q(-2));
  EXPECT_EQ(mm_derive(A(2)), Rational(2) * X(2));
  EXPECT_EQ(mm_derive(B(3)), Rational(-2) * X(4) * q(-2));
  EXPECT_TRUE(mm_derive(a(-1)).is_zero());
}

TEST(MmDerive, LeibnizRule) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const MomentPoly p = testgen::random_momentpoly(rng);
    const MomentPoly r = testgen::random_momentpoly(rng);
    EXPECT_EQ(mm_derive(p * r), mm_derive(p) * r + p * mm_derive(r));
  }
}

TEST(QDerivativeTable, FirstEntries) {
  const auto t = q_derivative_table(3);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], q());
  EXPECT_EQ(t[1], Rational(2) * a() * X(1));
  EXPECT_EQ(t[2], Rational(2) * a() * (B(1) - A(2) * q(-2)));
  // 2a(−2X₂q⁻² − 2X₂q⁻² + 2A₂q⁻³·2aX₁)
  EXPECT_EQ(t[3], Rational(-8) * a() * X(2) * q(-2) + Rational(8) * a(2) * A(2) * X(1) * q(-3));
}

TEST(Lower, Examples) {
  EXPECT_EQ(lower(qd(1)), Rational(2) * a() * X(1));
  EXPECT_EQ(lower(qd(1, 2)), Rational(4) * a(2) * X(1) * X(1));
  EXPECT_EQ(lower(make_rational(-1, 2) * DiffPoly::q(2) * qd(2)), -(a() * q(2) * B(1)) + a() * A(2));
  EXPECT_EQ(lower(DiffPoly::q(-3) * DiffPoly::a(2)), q(-3) * a(2));
}

TEST(Lower, CommutesWithDifferentiation) {
  std::mt19937_64 rng(22);
  Lowerer lw;
  for (int trial = 0; trial < 60; ++trial) {
    const DiffPoly p = testgen::random_diffpoly(rng, 4, 4);
    EXPECT_EQ(mm_derive(lw.lower(p)), lw.lower(dp_derive(p))) << p.to_string();
  }
}

TEST(LowerInvariant, OrderTwo) {
  EXPECT_EQ(lower_invariant(gen_invariant(2)), q() * B(1) + q(-1) * A(2) - a() * X(1) * X(1));
}

TEST(LowerInvariant, OrderThreePrincipalPart) {
  InvariantDescriptor principal = gen_invariant(3);
  principal.terms.resize(3);
  principal.tail = DiffPoly{};
  EXPECT_EQ(lower_invariant(principal), q() * B(2) + q(-1) * A(3) - Rational(2) * a() * X(1) * X(2));
}

TEST(LowerInvariant, TailOnly) {
  InvariantDescriptor inv;
  inv.tail = DiffPoly::constant(1);
  EXPECT_EQ(lower_invariant(inv), MomentPoly::constant(1));
}

TEST(VerifyInvariant, GeneratedLawsAreConserved) {
  Lowerer lw;
  LawCache cache;
  for (int k = 2; k <= 7; ++k) {
    const auto cert = certify_invariant(gen_invariant(k, cache), lw);
    EXPECT_TRUE(cert.verified) << k;
    EXPECT_EQ(cert.k, k);
    EXPECT_GT(cert.term_count_before_cancellation, 0u);
  }
}

TEST(VerifyInvariant, BareVelocityNormIsNotConserved) {
  InvariantDescriptor bad;
  bad.k = 2;
  bad.terms = {{DiffPoly::constant(1), MomentKind::B, 1}};
  EXPECT_FALSE(verify_invariant(bad));
  EXPECT_EQ(mm_derive(lower_invariant(bad)), Rational(-2) * X(2) * q(-2));
}

TEST(VerifyInvariant, TamperedCoefficientFails) {
  for (int k = 2; k <= 5; ++k) {
    InvariantDescriptor inv = gen_invariant(k);
    inv.terms.back().coef *= Rational(3);
    EXPECT_FALSE(verify_invariant(inv)) << k;
  }
}

TEST(VerifyInvariant, RateStaysWithinIndexK) {
  for (int k = 2; k <= 6; ++k) {
    const MomentPoly lowered = lower_invariant(gen_invariant(k));
    EXPECT_LE(max_index(lowered), k);
    for (const auto& [m, c] : lowered.terms()) EXPECT_LE(max_index(mm_derive(MomentPoly::monomial(m, c))), k);
  }
}

TEST(EnergyFunctional, RateIsBetaPrimeTimesX1) {
  LawCache cache;
  for (int k = 3; k <= 6; ++k) {
    const InvariantDescriptor e = energy_functional(k, cache);
    const DiffPoly beta_rate = dp_derive(cache.beta(static_cast<std::size_t>(k - 2)));
    EXPECT_TRUE((mm_derive(lower_invariant(e)) - lower(beta_rate) * X(1)).is_zero()) << k;
  }
}

TEST(ReferenceOrderThree, AgreesWithGeneratedLaw) {
  auto mono = [](Rational c, int qe, std::vector<VarPower> vars = {}, int ae = 0) {
    return DiffPoly::monomial(Monomial{qe, ae, std::move(vars)}, c);
  };
  InvariantDescriptor pub;
  pub.k = 3;
  pub.terms = {{mono(1, 1), MomentKind::B, 2},
               {mono(1, -1), MomentKind::A, 3},
               {mono(-1, 0, {{1, 1}}), MomentKind::X, 2},
               {mono(make_rational(1, 8), 1, {{1, 2}}), MomentKind::B, 1},
               {mono(make_rational(1, 8), -1, {{1, 2}}), MomentKind::A, 2}};
  pub.tail = mono(make_rational(-1, 64), 0, {{1, 4}}, -1) + mono(make_rational(-1, 16), 2, {{2, 2}}, -1);
  EXPECT_TRUE(verify_invariant(pub));
  EXPECT_EQ(lower_invariant(pub), lower_invariant(gen_invariant(3)));
}
