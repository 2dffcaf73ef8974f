#include "kpl/serialize.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <future>
#include <sstream>

using namespace kpl;

namespace {

DiffPoly mono(Rational c, int qe, std::vector<VarPower> vars = {}, int ae = 0) {
  return DiffPoly::monomial(Monomial{qe, ae, std::move(vars)}, c);
}

const DiffPoly& G1_by_hand() {
  static const DiffPoly g = mono(make_rational(1, 8), 1, {{1, 2}}) + mono(make_rational(-1, 4), 2, {{2, 1}});
  return g;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int order_of(const DiffPoly& p) { return p.is_zero() ? 0 : dp_max_order(p); }

}  // namespace

TEST(GenG, FirstTwo) {
  LawCache cache;
  EXPECT_EQ(gen_G(0, cache), qd(0));
  cache.G(0);
  EXPECT_EQ(gen_G(1, cache), G1_by_hand());
}

TEST(GenG, SecondMatchesHandExpansion) {
  // −(q/4)[q G₁″ − q′G₁′ + q″G₁ + 2(G₁/q)²] expanded term by term.
  const DiffPoly expected = mono(make_rational(3, 128), 1, {{1, 4}}) + mono(make_rational(-3, 32), 2, {{1, 2}, {2, 1}}) +
                            mono(make_rational(1, 8), 3, {{1, 1}, {3, 1}}) + mono(make_rational(3, 32), 3, {{2, 2}}) +
                            mono(make_rational(1, 16), 4, {{4, 1}});
  LawCache cache;
  EXPECT_EQ(cache.G(2), expected);
}

TEST(GenG, RequiresPredecessors) {
  LawCache cache;
  EXPECT_THROW(gen_G(3, cache), MissingLawError);
  EXPECT_THROW(int_G1_G3(2, cache), MissingLawError);
}

TEST(GenG, DoesNotDependOnGenerationOrder) {
  LawCache shared;
  const LawSet big = gen_coeffs(7, shared);
  const LawSet small = gen_coeffs(4);
  for (std::size_t i = 0; i < small.G.size(); ++i) {
    EXPECT_EQ(small.G[i], big.G[i]);
    EXPECT_EQ(small.alpha[i], big.alpha[i]);
    EXPECT_EQ(small.gamma[i], big.gamma[i]);
  }
}

TEST(GenG, IndependentCachesAgreeAcrossThreads) {
  auto job = [] { return gen_law_set(6); };
  auto f1 = std::async(std::launch::async, job);
  auto f2 = std::async(std::launch::async, job);
  const LawSet a = f1.get(), b = f2.get();
  EXPECT_EQ(a.G, b.G);
  EXPECT_EQ(a.Q, b.Q);
}

TEST(IntG1G3, ClosedFormsForSmallIndices) {
  LawCache cache;
  cache.G(3);
  const DiffPoly g1q = G1_by_hand() * qd(0, -1);
  EXPECT_EQ(int_G1_G3(0, cache), Rational(-2) * g1q * g1q);

  const DiffPoly g1p = dp_derive(G1_by_hand());
  EXPECT_EQ(int_G1_G3(1, cache), G1_by_hand() * dp_derive(G1_by_hand(), 2) - make_rational(1, 2) * g1p * g1p);

  const DiffPoly& g2 = cache.G(2);
  const DiffPoly g2q = g2 * qd(0, -1);
  EXPECT_EQ(int_G1_G3(2, cache), G1_by_hand() * dp_derive(g2, 2) - g1p * dp_derive(g2) +
                                     dp_derive(G1_by_hand(), 2) * g2 + Rational(2) * g2q * g2q);
}

TEST(IntG1G3, EveryIntegralIsCertified) {
  LawCache cache;
  cache.G(7);
  for (std::size_t j = 0; j <= 6; ++j)
    EXPECT_TRUE(dp_check_antiderivative(int_G1_G3(j, cache), cache.G(1) * dp_derive(cache.G(j), 3))) << j;
}

TEST(GenCoeffs, OrderThreeClosedForms) {
  const LawSet s = gen_coeffs(3);
  EXPECT_EQ(s.alpha[0], qd(0));
  EXPECT_EQ(s.beta[0], -qd(1));
  EXPECT_EQ(s.gamma[0], mono(make_rational(-1, 2), 2, {{2, 1}}));
  // β₁ = −(q′³/8 − q q′ q″/4 − q² q‴/4)
  EXPECT_EQ(s.beta[1], mono(make_rational(-1, 8), 0, {{1, 3}}) + mono(make_rational(1, 4), 1, {{1, 1}, {2, 1}}) +
                           mono(make_rational(1, 4), 2, {{3, 1}}));
  EXPECT_EQ(s.alpha[0], s.G[0]);
}

TEST(GenCoeffs, RejectsLowOrder) {
  EXPECT_THROW(gen_coeffs(2), std::invalid_argument);
  EXPECT_THROW(gen_law_set(1), std::invalid_argument);
  EXPECT_THROW(gen_invariant(1), std::invalid_argument);
}

TEST(GenCoeffs, SystemResidualsVanish) {
  LawCache cache;
  for (int k = 3; k <= 7; ++k) {
    const LawSet s = gen_coeffs(k, cache);
    for (std::size_t i = 0; i < s.G.size(); ++i) {
      const DiffPoly gprev = i == 0 ? DiffPoly{} : s.gamma[i - 1];
      EXPECT_TRUE((dp_derive(s.alpha[i] * qd(0, -2)) - s.beta[i] * qd(0, -2)).is_zero());
      EXPECT_TRUE((dp_derive(s.alpha[i]) + s.beta[i] + dp_derive(gprev)).is_zero());
      EXPECT_TRUE((dp_derive(s.beta[i]) - Rational(2) * s.gamma[i] * qd(0, -2)).is_zero());
    }
  }
}

TEST(GenCoeffs, StructureBounds) {
  const LawSet s = gen_law_set(7);
  EXPECT_EQ(s.G[0], qd(0));
  for (std::size_t i = 0; i < s.G.size(); ++i) {
    const int b = 2 * static_cast<int>(i);
    EXPECT_GE((s.G[i] * qd(0, -1)).min_q_exp(), 0);
    EXPECT_LE(order_of(s.G[i]), b);
    EXPECT_LE(order_of(s.alpha[i]), b);
    EXPECT_LE(order_of(s.beta[i]), b + 1);
    EXPECT_LE(order_of(s.gamma[i]), b + 2);
    if (i >= 1) {
      EXPECT_TRUE((dp_derive(s.G[i] * qd(0, -1)) + make_rational(1, 4) * qd(0) * dp_derive(s.G[i - 1], 3)).is_zero());
    }
  }
  EXPECT_LE(order_of(s.Q), 2 * 7 - 4);
}

TEST(GenQ, ClosedForms) {
  LawCache cache;
  cache.G(3);
  const DiffPoly g1q = G1_by_hand() * qd(0, -1);
  EXPECT_EQ(gen_Q(3, cache), G1_by_hand() * qd(2) + Rational(2) * g1q * g1q);
  const DiffPoly& g2 = cache.G(2);
  const DiffPoly g1p = dp_derive(G1_by_hand());
  EXPECT_EQ(gen_Q(4, cache), g2 * qd(2) + Rational(4) * G1_by_hand() * g2 * qd(0, -2) +
                                 G1_by_hand() * dp_derive(G1_by_hand(), 2) - make_rational(1, 2) * g1p * g1p);
  EXPECT_THROW(gen_Q(2, cache), std::invalid_argument);
  EXPECT_THROW(gen_Q(9, cache), MissingLawError);
}

TEST(GenQ, Certificate) {
  LawCache cache;
  for (int k = 3; k <= 7; ++k) {
    const LawSet s = gen_law_set(k, cache);
    const DiffPoly& b = s.beta.back();
    EXPECT_TRUE(dp_check_antiderivative(s.Q, dp_derive(b) * qd(1) - dp_derive(b * qd(1)))) << k;
  }
}

TEST(CheckLawSet, AllPassForGeneratedSets) {
  LawCache cache;
  for (int k = 3; k <= 7; ++k)
    for (const auto& c : check_law_set(gen_law_set(k, cache))) EXPECT_TRUE(c.passed) << k << " " << c.name;
}

TEST(CheckLawSet, DetectsTampering) {
  LawSet s = gen_law_set(5);
  s.alpha[2] += qd(1, 2);
  s.Q += DiffPoly::q(3);
  int failed = 0;
  for (const auto& c : check_law_set(s)) failed += c.passed ? 0 : 1;
  EXPECT_GE(failed, 2);
}

TEST(GenInvariant, OrderTwo) {
  const InvariantDescriptor inv = gen_invariant(2);
  ASSERT_EQ(inv.terms.size(), 3u);
  EXPECT_EQ(inv.terms[0], (MomentTerm{qd(0), MomentKind::B, 1}));
  EXPECT_EQ(inv.terms[1], (MomentTerm{DiffPoly::q(-1), MomentKind::A, 2}));
  EXPECT_EQ(inv.terms[2].kind, MomentKind::X);
  EXPECT_EQ(inv.terms[2].index, 1);
  EXPECT_TRUE(inv.tail.is_zero());
}

TEST(GenInvariant, OrderThreeLayout) {
  LawCache cache;
  const InvariantDescriptor inv = gen_invariant(3, cache);
  ASSERT_EQ(inv.terms.size(), 6u);
  EXPECT_EQ(inv.terms[0], (MomentTerm{qd(0), MomentKind::B, 2}));
  EXPECT_EQ(inv.terms[1], (MomentTerm{DiffPoly::q(-1), MomentKind::A, 3}));
  EXPECT_EQ(inv.terms[2], (MomentTerm{-qd(1), MomentKind::X, 2}));
  EXPECT_EQ(inv.terms[3], (MomentTerm{cache.alpha(1), MomentKind::B, 1}));
  EXPECT_EQ(inv.terms[4], (MomentTerm{cache.alpha(1) * qd(0, -2), MomentKind::A, 2}));
  EXPECT_EQ(inv.terms[5], (MomentTerm{cache.gamma(0), MomentKind::B, 1}));
  EXPECT_EQ(inv.tail, make_rational(-1, 2) * DiffPoly::a(-1) * gen_Q(3, cache));
}

TEST(GenInvariant, OrderFourHasOneBetaTerm) {
  LawCache cache;
  const InvariantDescriptor inv = gen_invariant(4, cache);
  int beta_terms = 0;
  for (std::size_t t = 3; t < inv.terms.size(); ++t)
    if (inv.terms[t].kind == MomentKind::X) {
      ++beta_terms;
      EXPECT_EQ(inv.terms[t], (MomentTerm{cache.beta(1), MomentKind::X, 2}));
    }
  EXPECT_EQ(beta_terms, 1);
}

TEST(GenInvariant, IndexBoundsAndPrincipalPart) {
  for (int k = 3; k <= 7; ++k) {
    const InvariantDescriptor inv = gen_invariant(k);
    EXPECT_EQ(inv.terms[0], (MomentTerm{qd(0), MomentKind::B, k - 1}));
    EXPECT_EQ(inv.terms[1], (MomentTerm{DiffPoly::q(-1), MomentKind::A, k}));
    EXPECT_EQ(inv.terms[2], (MomentTerm{-qd(1), MomentKind::X, k - 1}));
    for (const auto& t : inv.terms) {
      EXPECT_GE(t.index, t.kind == MomentKind::A ? 2 : 1);
      EXPECT_LE(t.index, t.kind == MomentKind::A ? k : k - 1);
    }
  }
}

TEST(RenderLaw, OrderTwo) {
  EXPECT_EQ(render_law(gen_invariant(2)), "q‖∇u_t‖² + ‖Δu‖²/q − a(∫∇u·∇u_t dx)²");
}

TEST(RenderLaw, OrderThreePrincipalPart) {
  const std::string s = render_law(gen_invariant(3));
  const std::string principal = "q‖Δu_t‖² + ‖∇Δu‖²/q − q′∫Δu·Δu_t dx";
  EXPECT_EQ(s.substr(0, principal.size()), principal);
}

TEST(RenderLaw, StableAcrossCalls) { EXPECT_EQ(render_law(gen_invariant(5)), render_law(gen_invariant(5))); }

class Golden : public ::testing::TestWithParam<int> {};

TEST_P(Golden, LawSetAndInvariantMatchStoredFiles) {
  const int k = GetParam();
  LawCache cache;
  const InvariantDescriptor inv = gen_invariant(k, cache);
  const json doc = {{"invariant", descriptor_to_json(inv)}, {"law_set", law_set_to_json(gen_law_set(k, cache))}};
  const std::string dir = KPL_GOLDEN_DIR;
  EXPECT_EQ(doc.dump(2) + "\n", read_file(dir + "/laws_k" + std::to_string(k) + ".json"));
  EXPECT_EQ(render_law(inv) + "\n", read_file(dir + "/render_k" + std::to_string(k) + ".txt"));
}

INSTANTIATE_TEST_SUITE_P(Orders, Golden, ::testing::Values(3, 4, 5));
