#include <gtest/gtest.h>

#include <random>

#include "dil/opcalc.hpp"
#include "dil/random.hpp"
#include "dil/susy.hpp"

using namespace dil;
using E = OperatorExpression;

namespace {

// Applies an operator to a plain polynomial p(z, z̄) with the Wirtinger rules,
// independently of the normal-ordering code.
Polynomial apply_to_polynomial(const E& op, const Polynomial& p) {
  Polynomial out;
  for (const auto& t : op.terms()) {
    Polynomial q = p;
    for (unsigned k = 0; k < t.pow_dbar; ++k) q = q.dbar();
    for (unsigned k = 0; k < t.pow_d; ++k) q = q.d();
    out = out + q.times(t.coeff, t.pow_z, t.pow_zbar);
  }
  return out;
}

OperatorTerm mono(unsigned pz, unsigned pzb, unsigned pd, unsigned pdb) { return {ComplexRational(1), pz, pzb, pd, pdb}; }

BlockOperator flat_defect() { return build_defect_operator(ModelSpec{}); }

E oscillator() { return E::term(-1, 0, 0, 1, 1) + E::term(1, 1, 1, 0, 0); }

}  // namespace

TEST(NormalOrder, DerivativePastZ) {
  // ∂ ∘ z = z∂ + 1
  EXPECT_EQ(normal_order(mono(0, 0, 1, 0), mono(1, 0, 0, 0)), E::term(1, 1, 0, 1, 0) + E::constant(1));
}

TEST(NormalOrder, AlreadyOrderedIsUnchanged) {
  EXPECT_EQ(normal_order(mono(1, 0, 0, 0), mono(0, 0, 1, 0)), E::term(1, 1, 0, 1, 0));
}

TEST(NormalOrder, MixedPairsCommute) {
  // ∂ ∘ z̄ = z̄∂ and ∂̄ ∘ z = z∂̄
  EXPECT_EQ(normal_order(mono(0, 0, 1, 0), mono(0, 1, 0, 0)), E::term(1, 0, 1, 1, 0));
  EXPECT_EQ(normal_order(mono(0, 0, 0, 1), mono(1, 0, 0, 0)), E::term(1, 1, 0, 0, 1));
}

TEST(NormalOrder, DbarPastZbarSquaredOnTestFunctions) {
  const E expected = E::term(1, 0, 2, 0, 1) + E::term(2, 0, 1, 0, 0);
  const E got = normal_order(mono(0, 0, 0, 1), mono(0, 2, 0, 0));
  EXPECT_EQ(got, expected);
  for (unsigned k = 0; k <= 3; ++k) {
    const Polynomial f = Polynomial::monomial(1, 0, k);
    // direct: ∂̄ (z̄² · z̄^k) = (k + 2) z̄^{k+1}
    const Polynomial direct = Polynomial::monomial(ComplexRational(static_cast<long long>(k + 2)), 0, k + 1);
    EXPECT_EQ(apply_to_polynomial(got, f), direct) << "k = " << k;
  }
}

TEST(NormalOrder, HigherPowersAgreeWithDirectApplication) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const E a = random_expression(rng, 3, 2);
    const E b = random_expression(rng, 3, 2);
    const E ab = compose(a, b);
    const Polynomial f = random_ansatz(rng, 1, 4, 3).poly;
    EXPECT_EQ(apply_to_polynomial(ab, f), apply_to_polynomial(a, apply_to_polynomial(b, f)));
  }
}

TEST(Canonical, FromTermsMergesAndDropsZeros) {
  const E e = E::from_terms({{ComplexRational(2), 1, 0, 0, 0}, {ComplexRational(-2), 1, 0, 0, 0}, {ComplexRational(3), 0, 0, 1, 0}});
  EXPECT_EQ(e, E::term(3, 0, 0, 1, 0));
  EXPECT_TRUE((E::z() - E::z()).is_zero());
}

TEST(Canonical, NormalOrderIsIdempotent) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const E a = random_expression(rng);
    EXPECT_EQ(E::from_terms(a.terms()), a);
    EXPECT_EQ(compose(E::constant(1), a), a);
    EXPECT_EQ(compose(a, E::constant(1)), a);
  }
}

TEST(Compose, IdentityLaw) {
  EXPECT_EQ(compose(BlockOperator::identity(2), flat_defect()), flat_defect());
  EXPECT_EQ(compose(flat_defect(), BlockOperator::identity(2)), flat_defect());
}

TEST(Compose, DimensionMismatchThrows) {
  EXPECT_THROW(compose(BlockOperator(2, 3), BlockOperator(2, 2)), DimensionError);
}

TEST(Compose, PartnerHamiltoniansClosedForms) {
  const BlockOperator D = flat_defect();
  BlockOperator hm(2, 2);
  hm.at(0, 0) = oscillator();
  hm.at(1, 1) = oscillator();
  hm.at(0, 1) = E::constant(-1);
  hm.at(1, 0) = E::constant(-1);
  BlockOperator hp(2, 2);
  hp.at(0, 0) = oscillator();
  hp.at(1, 1) = oscillator();
  EXPECT_EQ(compose(adjoint(D), D), hm);
  EXPECT_EQ(compose(D, adjoint(D)), hp);
}

TEST(Compose, PartnerHamiltonianAgreesOnAnsatzInputs) {
  const BlockOperator D = flat_defect();
  const BlockOperator hm = compose(adjoint(D), D);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<GaussianAnsatz> f = {random_ansatz(rng, Rational(3, 2)), random_ansatz(rng, Rational(3, 2))};
    EXPECT_EQ(gaussian_apply(hm, f), gaussian_apply(adjoint(D), gaussian_apply(D, f)));
  }
}

TEST(Compose, AssociativeOnRandomTriples) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const BlockOperator a = random_block(rng, 2, 2, 2, 2);
    const BlockOperator b = random_block(rng, 2, 2, 2, 2);
    const BlockOperator c = random_block(rng, 2, 2, 2, 2);
    EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
  }
}

TEST(Adjoint, DefectOperator) {
  BlockOperator expected(2, 2);
  expected.at(0, 0) = -E::dbar();
  expected.at(0, 1) = E::zbar();
  expected.at(1, 0) = E::z();
  expected.at(1, 1) = -E::d();
  EXPECT_EQ(adjoint(flat_defect()), expected);
  EXPECT_EQ(adjoint(adjoint(flat_defect())), flat_defect());
}

TEST(Adjoint, PerturbationMovesToLowerLeft) {
  ModelSpec spec;
  spec.epsilon = 0.5;
  spec.f1 = 0.6;
  const BlockOperator K = build_perturbation(spec);
  BlockOperator expected(2, 2);
  expected.at(1, 0) = ComplexRational(Rational(-3, 10)) * E::z();
  EXPECT_EQ(adjoint(K), expected);
}

TEST(Adjoint, ComplexCoefficientsAreConjugated) {
  const E a = E::term(ComplexRational(Rational(1), Rational(2)), 2, 0, 0, 0);
  EXPECT_EQ(adjoint(a), E::term(ComplexRational(Rational(1), Rational(-2)), 0, 2, 0, 0));
}

TEST(Adjoint, InvolutionAndAntiHomomorphismOnRandomOperators) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const BlockOperator a = random_block(rng, 2, 2);
    const BlockOperator b = random_block(rng, 2, 2);
    ASSERT_EQ(adjoint(adjoint(a)), a);
    ASSERT_EQ(adjoint(compose(a, b)), compose(adjoint(b), adjoint(a)));
  }
}

TEST(GaussianApply, DerivativeOfGaussian) {
  const GaussianAnsatz g(1, Polynomial::constant(1));
  EXPECT_EQ(gaussian_apply(E::d(), g), GaussianAnsatz(1, Polynomial::monomial(-1, 0, 1)));
  EXPECT_EQ(gaussian_apply(E::dbar(), g), GaussianAnsatz(1, Polynomial::monomial(-1, 1, 0)));
}

TEST(GaussianApply, FlatZeroModeIsAnnihilated) {
  const std::vector<GaussianAnsatz> pair(2, GaussianAnsatz(1, Polynomial::constant(1)));
  for (const auto& out : gaussian_apply(flat_defect(), pair)) EXPECT_TRUE(out.poly.is_zero());
}

TEST(GaussianApply, PerturbedZeroModeIsAnnihilated) {
  ModelSpec spec;
  spec.epsilon = 1.0;
  spec.f1 = 0.19;
  const Rational a(9, 10);
  const std::vector<GaussianAnsatz> pair = {GaussianAnsatz(a, Polynomial::constant(ComplexRational(a))),
                                            GaussianAnsatz(a, Polynomial::constant(1))};
  for (const auto& out : gaussian_apply(build_defect_operator(spec), pair)) EXPECT_TRUE(out.poly.is_zero());
  // A wrong decay rate leaves a remainder.
  const Rational b(1);
  const std::vector<GaussianAnsatz> wrong = {GaussianAnsatz(b, Polynomial::constant(1)),
                                             GaussianAnsatz(b, Polynomial::constant(1))};
  EXPECT_FALSE(gaussian_apply(build_defect_operator(spec), wrong)[0].poly.is_zero());
}

TEST(GaussianApply, LinearAndConsistentWithCompose) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    const E a = random_expression(rng, 2, 3);
    const E b = random_expression(rng, 2, 3);
    const Rational alpha(1 + trial % 3, 2);
    const GaussianAnsatz f = random_ansatz(rng, alpha);
    const GaussianAnsatz g = random_ansatz(rng, alpha);
    EXPECT_EQ(gaussian_apply(compose(a, b), f), gaussian_apply(a, gaussian_apply(b, f)));
    EXPECT_EQ(gaussian_apply(a, f + g), gaussian_apply(a, f) + gaussian_apply(a, g));
  }
}

TEST(GaussianApply, MatchesPointwiseEvaluationOfDerivative) {
  // ∂(z̄ e^{-|z|²}) = -z̄² e^{-|z|²}: check numerically at a point.
  const GaussianAnsatz f(1, Polynomial::monomial(1, 0, 1));
  const GaussianAnsatz out = gaussian_apply(E::d(), f);
  const std::complex<double> z(0.3, -0.7);
  EXPECT_NEAR(std::abs(out.evaluate(z) - (-std::conj(z) * std::conj(z) * std::exp(-std::norm(z)))), 0.0, 1e-14);
}

TEST(Render, CanonicalText) {
  EXPECT_EQ(render(E::term(-1, 0, 1, 0, 0)), "(-1+0i)*z^0*zb^1*d^0*db^0");
  EXPECT_EQ(render(E()), "0");
  EXPECT_EQ(render(BlockOperator(1, 2)), "[0, 0]");
}

TEST(Render, RoundTripsThroughParser) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const BlockOperator a = random_block(rng, 2, 2);
    EXPECT_EQ(parse_block(render(a)), a);
    EXPECT_EQ(parse_expression(render(a.at(0, 1))), a.at(0, 1));
  }
  EXPECT_THROW(parse_expression("(1+0i)*z^1"), ParseError);
  EXPECT_THROW(parse_block("[0, 0; 0]"), ParseError);
}

TEST(DerivativeOrder, CountsHighestTotalDerivative) {
  EXPECT_EQ(flat_defect().derivative_order(), 1u);
  EXPECT_EQ(compose(adjoint(flat_defect()), flat_defect()).derivative_order(), 2u);
  EXPECT_EQ(E::z().derivative_order(), 0u);
}
