#include <gtest/gtest.h>

#include <random>

#include "dil/susy.hpp"

using namespace dil;
using E = OperatorExpression;

namespace {

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

ModelSpec perturbed(double eps, double f1, std::vector<double> series = {}) {
  ModelSpec s;
  s.epsilon = eps;
  s.f1 = f1;
  s.f1_series = std::move(series);
  return s;
}

SparseMatrix random_sparse(std::mt19937_64& rng, Eigen::Index n, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (p(rng) < density) t.emplace_back(i, j, Complex(u(rng), u(rng)));
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace

TEST(DefectOperator, Unperturbed) {
  const BlockOperator D = build_defect_operator(ModelSpec{});
  EXPECT_EQ(D.at(0, 0), E::d());
  EXPECT_EQ(D.at(0, 1), E::zbar());
  EXPECT_EQ(D.at(1, 0), E::z());
  EXPECT_EQ(D.at(1, 1), E::dbar());
}

TEST(DefectOperator, LinearMultiplier) {
  const BlockOperator D = build_defect_operator(perturbed(1.0, 0.3));
  EXPECT_EQ(D.at(0, 1), ComplexRational(Rational(7, 10)) * E::zbar());
  EXPECT_EQ(D.at(1, 0), E::z());
}

TEST(DefectOperator, HigherOrderSeries) {
  // 1 - 0.5*0.4 - 0.25*0.2 - 0.125*0.4 = 0.7
  const ModelSpec s = perturbed(0.5, 0.4, {0.2, 0.4});
  EXPECT_EQ(s.multiplier_exact(), Rational(7, 10));
  EXPECT_EQ(build_defect_operator(s).at(0, 1), ComplexRational(Rational(7, 10)) * E::zbar());
}

TEST(DefectOperator, CouplingScalesMassEntries) {
  ModelSpec s;
  s.t = 2.0;
  const BlockOperator D = build_defect_operator(s);
  EXPECT_EQ(D.at(0, 1), ComplexRational(2) * E::zbar());
  EXPECT_EQ(D.at(1, 0), ComplexRational(2) * E::z());
}

TEST(DefectOperator, RejectsNonPositiveMultiplier) {
  EXPECT_THROW(build_defect_operator(perturbed(1.0, 1.0)), InvariantError);
  EXPECT_THROW(build_defect_operator(perturbed(2.0, 0.6)), InvariantError);
  EXPECT_THROW(build_defect_operator(perturbed(-0.1, 0.0)), InvariantError);
  ModelSpec zero_t;
  zero_t.t = 0.0;
  EXPECT_THROW(build_defect_operator(zero_t), InvariantError);
}

TEST(DefectOperator, SplitIntoFlatPlusPerturbation) {
  const ModelSpec s = perturbed(0.5, 0.6);
  const BlockOperator K = build_perturbation(s);
  EXPECT_EQ(build_defect_operator(ModelSpec{}) + K, build_defect_operator(s));
  // strictly upper triangular
  EXPECT_TRUE(K.at(0, 0).is_zero());
  EXPECT_TRUE(K.at(1, 0).is_zero());
  EXPECT_TRUE(K.at(1, 1).is_zero());
  EXPECT_EQ(K.at(0, 1), ComplexRational(Rational(-3, 10)) * E::zbar());
}

TEST(OperatorSet, HamiltoniansAreCompositions) {
  const DefectOperatorSet set = build_operator_set(perturbed(1.0, 0.3));
  EXPECT_EQ(set.H_minus, compose(set.D_adj, set.D));
  EXPECT_EQ(set.H_plus, compose(set.D, set.D_adj));
  EXPECT_EQ(set.D_adj, adjoint(set.D));
  EXPECT_NEAR(set.gap_scale, 0.49, 1e-15);
}

TEST(Quartet, StructuralIdentitiesAreExact) {
  const GridSpec g(3, 16);
  const SparseMatrix D = discretize(build_defect_operator(perturbed(1.0, 0.3)), g);
  const SusyQuartet q = build_susy_quartet(D);
  const auto n = q.W.rows();
  SparseMatrix I(n, n);
  I.setIdentity();
  EXPECT_EQ(max_abs(SparseMatrix(q.W * q.W - I)), 0.0);
  EXPECT_EQ(max_abs(SparseMatrix(q.Q * q.Q)), 0.0);
  EXPECT_EQ(max_abs(SparseMatrix(q.Q_dag * q.Q_dag)), 0.0);
  EXPECT_EQ(max_abs(SparseMatrix(SparseMatrix(q.Q * q.Q_dag) + SparseMatrix(q.Q_dag * q.Q) - q.Ham)), 0.0);
  EXPECT_EQ(max_abs(SparseMatrix(SparseMatrix(q.W * q.Q) + SparseMatrix(q.Q * q.W))), 0.0);
}

TEST(Quartet, RejectsNonSquare) {
  EXPECT_THROW(build_susy_quartet(SparseMatrix(4, 6)), DimensionError);
}

TEST(Parity, ClassifiesQuartetMembers) {
  const GridSpec g(2, 10);
  const DefectOperatorSet set = build_operator_set(perturbed(0.5, 0.6));
  const SusyQuartet q = build_susy_quartet(discretize(set.D, g));
  EXPECT_EQ(parity_classify(q.Ham, q.W), Parity::even);
  EXPECT_EQ(parity_classify(q.Q, q.W), Parity::odd);
  EXPECT_EQ(parity_classify(q.Q_dag, q.W), Parity::odd);
  EXPECT_EQ(parity_classify(embed_odd(discretize(set.K, g)), q.W), Parity::odd);
  EXPECT_EQ(parity_classify(SparseMatrix(q.Q + q.Ham), q.W), Parity::indefinite);
  EXPECT_EQ(parity_classify(SparseMatrix(q.Q * q.Q_dag), q.W), Parity::even);  // odd ∘ odd
  EXPECT_THROW(parity_classify(SparseMatrix(3, 3), q.W), DimensionError);
}

TEST(Projection, ParityEigenstates) {
  const GridSpec g(2, 8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  auto random_field = [&] {
    Vector v(static_cast<Eigen::Index>(2 * g.nodes()));
    for (auto& x : v) x = Complex(nd(rng), nd(rng));
    return Field(g, 2, v);
  };
  const GradedVector plus(random_field(), Field(g, 2));
  EXPECT_EQ(project(plus, +1).stacked(), plus.stacked());
  EXPECT_EQ(project(plus, -1).stacked().norm(), 0.0);

  const GradedVector v(random_field(), random_field());
  const Vector sum = project(v, +1).stacked() + project(v, -1).stacked();
  EXPECT_EQ((sum - v.stacked()).norm(), 0.0);
  EXPECT_EQ((project(project(v, -1), -1).stacked() - project(v, -1).stacked()).norm(), 0.0);
  EXPECT_THROW(project(v, 0), InvalidArgument);
}

TEST(GradedApply, ModuleTable) {
  const Eigen::Index half = 40;
  std::mt19937_64 rng(5);
  const SparseMatrix W = witten_parity(half);
  const SparseMatrix A = random_sparse(rng, 2 * half, 0.2);
  const GradedOperator even = make_graded(SparseMatrix(0.5 * (A + W * A * W)));
  const GradedOperator odd = make_graded(SparseMatrix(0.5 * (A - W * A * W)));
  ASSERT_EQ(even.parity, Parity::even);
  ASSERT_EQ(odd.parity, Parity::odd);

  // One-component fields on an 8x8 grid: 64 unknowns per sector.
  std::normal_distribution<double> nd;
  const GridSpec g8(1, 8);
  const SparseMatrix W64 = witten_parity(64);
  const SparseMatrix B = random_sparse(rng, 128, 0.1);
  const GradedOperator e64 = make_graded(SparseMatrix(0.5 * (B + W64 * B * W64)));
  const GradedOperator o64 = make_graded(SparseMatrix(0.5 * (B - W64 * B * W64)));
  Vector pv(64);
  for (auto& c : pv) c = Complex(nd(rng), nd(rng));
  const GradedVector pure_plus(Field(g8, 1, pv), Field(g8, 1));
  const GradedVector pure_minus(Field(g8, 1), Field(g8, 1, pv));

  const GradedVector ep = graded_apply(e64, pure_plus);
  EXPECT_EQ(ep.minus.values().norm(), 0.0);
  EXPECT_GT(ep.plus.values().norm(), 0.0);
  const GradedVector op = graded_apply(o64, pure_plus);
  EXPECT_EQ(op.plus.values().norm(), 0.0);
  EXPECT_GT(op.minus.values().norm(), 0.0);
  const GradedVector om = graded_apply(o64, pure_minus);
  EXPECT_EQ(om.minus.values().norm(), 0.0);

  const GradedOperator indefinite{B, Parity::indefinite};
  EXPECT_THROW(graded_apply(indefinite, pure_plus), InvalidArgument);
  // A mislabelled operator is caught by the leakage assertion.
  const GradedOperator lying{e64.matrix, Parity::odd};
  EXPECT_THROW(graded_apply(lying, pure_plus), InvariantError);
}

TEST(PhysicalState, EmbedsInOddSector) {
  const GridSpec g(4, 33);
  const Field pair = sample(g, std::vector<GaussianAnsatz>(2, GaussianAnsatz(1, Polynomial::constant(1))));
  const GradedVector v = physical_state_embed(pair);
  EXPECT_EQ(v.plus.values().norm(), 0.0);
  const SparseMatrix W = witten_parity(v.sector_dim());
  EXPECT_EQ((W * v.stacked() + v.stacked()).norm(), 0.0);  // W-eigenvalue -1
  EXPECT_EQ((project(v, -1).minus.values() - pair.values()).norm(), 0.0);

  const GradedVector z = physical_state_embed(Field(g, 2));
  EXPECT_EQ(z.stacked().norm(), 0.0);
  EXPECT_THROW(physical_state_embed(Field(g, 1)), InvalidArgument);
}
