#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dil/lattice.hpp"
#include "dil/random.hpp"
#include "dil/susy.hpp"

using namespace dil;
using E = OperatorExpression;

namespace {

const GaussianAnsatz kGauss(1, Polynomial::constant(1));

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]) / h.size();
    my += std::log(err[i]) / h.size();
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
  }
  return sxy / sxx;
}

// Max-norm error of discretize(op)·sample(f) against sample(gaussian_apply(op, f)).
double apply_error(const E& op, const GaussianAnsatz& f, const GridSpec& g) {
  const Vector num = discretize(op, g) * sample(g, f).values();
  const Vector exact = sample(g, gaussian_apply(op, f)).values();
  return max_abs(Vector(num - exact));
}

const std::vector<GridSpec> kHalving = {GridSpec(5, 41), GridSpec(5, 81), GridSpec(5, 161)};

}  // namespace

TEST(GridSpec, Geometry) {
  const GridSpec g(5, 11);
  EXPECT_DOUBLE_EQ(g.h(), 1.0);
  EXPECT_EQ(g.nodes(), 121u);
  EXPECT_EQ(g.coordinate(0), Complex(-5, -5));
  EXPECT_EQ(g.coordinate(1), Complex(-4, -5));
  EXPECT_EQ(g.coordinate(11), Complex(-5, -4));
  EXPECT_EQ(g.coordinate(60), Complex(0, 0));
}

TEST(GridSpec, RejectsInvalid) {
  EXPECT_THROW(GridSpec(5, 4), InvalidArgument);
  EXPECT_THROW(GridSpec(0, 16), InvalidArgument);
  EXPECT_THROW(GridSpec(-1, 16), InvalidArgument);
}

TEST(Sample, ConstantAndGaussianValues) {
  const GridSpec g(5, 41);
  const Field one = sample(g, GaussianAnsatz(Rational(1, 1000000000), Polynomial::constant(1)));
  EXPECT_EQ(one.components(), 1);
  const Field ones = sample(g, [](Complex) { return Complex(1, 0); });
  for (Eigen::Index k = 0; k < ones.values().size(); ++k) ASSERT_EQ(ones.values()[k], Complex(1, 0));
  const Field f = sample(g, kGauss);
  const std::size_t center = 20 * 41 + 20;
  EXPECT_EQ(g.coordinate(center), Complex(0, 0));
  EXPECT_DOUBLE_EQ(f.at(0, center).real(), 1.0);
  const std::size_t at2 = 20 * 41 + 28;  // x = 2
  EXPECT_NEAR(std::abs(g.coordinate(at2) - Complex(2, 0)), 0.0, 1e-14);
  EXPECT_NEAR(f.at(0, at2).real(), std::exp(-4.0), 1e-15);
}

TEST(Sample, GaussianNorm) {
  for (const GridSpec& g : {GridSpec(4, 64), GridSpec(5, 96)}) {
    EXPECT_NEAR(sample(g, kGauss).norm_squared(), std::numbers::pi / 2, 0.01 * std::numbers::pi / 2);
  }
}

TEST(Field, InnerProductAndStack) {
  const GridSpec g(3, 16);
  const Field a = sample(g, kGauss);
  const Field b = sample(g, [](Complex z) { return z; });
  EXPECT_NEAR(std::abs(a.inner(a) - Complex(a.norm_squared(), 0)), 0.0, 1e-14);
  const Field s = Field::stack({a, b});
  EXPECT_EQ(s.components(), 2);
  EXPECT_EQ(s.at(1, 5), b.at(0, 5));
  EXPECT_NEAR(s.norm_squared(), a.norm_squared() + b.norm_squared(), 1e-12);
  EXPECT_THROW(a.inner(sample(GridSpec(3, 17), kGauss)), DimensionError);
}

TEST(Localization, UniformFieldAreaRatio) {
  const GridSpec g(5, 161);
  const Field ones = sample(g, [](Complex) { return Complex(1, 0); });
  const double L = g.half_width();
  const double frac = localization_fraction(ones, L);
  const double expected = std::numbers::pi / 4.0;
  EXPECT_NEAR(frac, expected, expected * g.h() / L);

  // Direct summation: interior nodes strictly inside the disk over the
  // trapezoid-weighted node count of the box.
  const int n = g.n();
  double inside = 0.0;
  for (int j = 1; j + 1 < n; ++j) {
    for (int i = 1; i + 1 < n; ++i) {
      const double x = -L + i * g.h();
      const double y = -L + j * g.h();
      if (x * x + y * y < L * L) inside += 1.0;
    }
  }
  EXPECT_NEAR(frac, inside / ((n - 1.0) * (n - 1.0)), 1e-12);
}

TEST(Localization, GaussianMassInsideRadiusTwo) {
  const Field f = sample(GridSpec(5, 96), kGauss);
  EXPECT_NEAR(localization_fraction(f, 2.0), 1.0 - std::exp(-8.0), 1e-3);
}

TEST(Localization, SupportedInsideGivesOne) {
  const GridSpec g(5, 41);
  const Field f = sample(g, [](Complex z) { return std::abs(z) < 1.0 ? Complex(1, 0) : Complex(0, 0); });
  EXPECT_DOUBLE_EQ(localization_fraction(f, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(localization_fraction(f, 1.5), 1.0);
}

TEST(Localization, Errors) {
  const GridSpec g(5, 16);
  EXPECT_THROW(localization_fraction(Field(g, 1), 2.0), InvalidArgument);
  EXPECT_THROW(localization_fraction(sample(g, kGauss), 6.0), InvalidArgument);
  EXPECT_THROW(localization_fraction(sample(g, kGauss), 0.0), InvalidArgument);
}

TEST(Discretize, MultiplicationIsDiagonal) {
  const GridSpec g(2, 9);
  const SparseMatrix m = discretize(E::z(), g);
  EXPECT_EQ(m.nonZeros(), static_cast<Eigen::Index>(g.nodes()) - 1);  // z = 0 at the centre is pruned
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    EXPECT_EQ(m.coeff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)), g.coordinate(k));
  }
}

TEST(Discretize, BlockIdentity) {
  const GridSpec g(2, 9);
  const SparseMatrix I = discretize(BlockOperator::identity(2), g);
  ASSERT_EQ(I.rows(), 2 * 81);
  SparseMatrix ref(2 * 81, 2 * 81);
  ref.setIdentity();
  EXPECT_EQ(max_abs(SparseMatrix(I - ref)), 0.0);
}

TEST(Discretize, DerivativeOnGaussianIsSecondOrder) {
  std::vector<double> hs, errs;
  for (const auto& g : kHalving) {
    const Vector num = discretize(E::d(), g) * sample(g, kGauss).values();
    const Vector exact = sample(g, [](Complex z) { return -std::conj(z) * std::exp(-std::norm(z)); }).values();
    hs.push_back(g.h());
    errs.push_back(max_abs(Vector(num - exact)));
  }
  EXPECT_LT(errs[1], errs[0]);
  EXPECT_LT(errs[2], errs[1]);
  EXPECT_NEAR(loglog_slope(hs, errs), 2.0, 0.3);
}

TEST(Discretize, AgreesWithSymbolicApplicationAtSecondOrder) {
  std::mt19937_64 rng(29);
  const std::vector<E> ops = {E::d(),
                              E::dbar(),
                              E::term(-1, 0, 0, 1, 1) + E::term(1, 1, 1, 0, 0),
                              E::term(1, 0, 0, 2, 0),
                              E::term(ComplexRational(Rational(1, 2), Rational(1)), 0, 1, 0, 2),
                              E::term(2, 1, 0, 1, 1) + E::term(-1, 0, 1, 1, 0),
                              random_expression(rng, 2, 3)};
  for (const auto& op : ops) {
    if (op.derivative_order() > 2 || op.derivative_order() == 0) continue;
    const GaussianAnsatz f = random_ansatz(rng, 1, 2, 3);
    std::vector<double> hs, errs;
    for (const auto& g : kHalving) {
      hs.push_back(g.h());
      errs.push_back(apply_error(op, f, g));
    }
    EXPECT_NEAR(loglog_slope(hs, errs), 2.0, 0.3) << render(op);
  }
}

TEST(Discretize, IsLinear) {
  std::mt19937_64 rng(31);
  const GridSpec g(3, 20);
  for (int trial = 0; trial < 20; ++trial) {
    const BlockOperator a = random_block(rng, 2, 2, 2, 3);
    const BlockOperator b = random_block(rng, 2, 2, 2, 3);
    const SparseMatrix sum = discretize(a + b, g);
    const SparseMatrix parts = SparseMatrix(discretize(a, g) + discretize(b, g));
    const double scale = std::max(1.0, max_abs(parts));
    EXPECT_LE(max_abs(SparseMatrix(sum - parts)), 1e-14 * scale);
  }
}

TEST(Discretize, ConjugateTransposeMatchesSymbolicAdjointOnInteriorRows) {
  const GridSpec g(3, 24);
  const BlockOperator D = build_defect_operator(ModelSpec{});
  const SparseMatrix lhs = discretize(D, g).adjoint();
  const SparseMatrix rhs = discretize(adjoint(D), g);
  const SparseMatrix diff = lhs - rhs;
  const int n = g.n();
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> rows(diff);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Eigen::Index node = r % static_cast<Eigen::Index>(g.nodes());
    const int i = static_cast<int>(node % n);
    const int j = static_cast<int>(node / n);
    if (i == 0 || j == 0 || i == n - 1 || j == n - 1) continue;
    for (decltype(rows)::InnerIterator it(rows, r); it; ++it) ASSERT_EQ(it.value(), Complex(0, 0)) << "row " << r;
  }
}

TEST(Field, RotationInvariantNorms) {
  const GridSpec g(4, 33);
  const int n = g.n();
  const Field f = sample(g, [](Complex z) { return Complex(std::exp(-std::norm(z)) * (1 + std::norm(z)), 0); });
  const Field u = sample(g, [](Complex z) { return Complex(std::exp(-0.5 * std::norm(z)), 0); });
  // (i, j) -> (n-1-j, i) is the 90° rotation about the centre.
  auto rotate = [&](const Field& x) {
    Vector v(x.values().size());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) v[(i) * n + (n - 1 - j)] = x.values()[j * n + i];
    }
    return Field(g, 1, v);
  };
  const Field fr = rotate(f);
  const Field ur = rotate(u);
  EXPECT_NEAR(max_abs(Vector(fr.values().cwiseAbs() - f.values().cwiseAbs())), 0.0, 1e-12);
  EXPECT_NEAR(fr.norm_squared(), f.norm_squared(), 1e-12);
  EXPECT_NEAR(std::abs(fr.inner(ur) - f.inner(u)), 0.0, 1e-12);
}

TEST(Csv, MatrixRoundTrip) {
  const GridSpec g(2, 8);
  const SparseMatrix a = discretize(build_defect_operator(ModelSpec{}), g);
  std::stringstream ss;
  write_matrix_csv(ss, a);
  const SparseMatrix b = read_matrix_csv(ss, a.rows(), a.cols());
  EXPECT_EQ(max_abs(SparseMatrix(a - b)), 0.0);
  std::stringstream bad("row,col\n");
  EXPECT_THROW(read_matrix_csv(bad, 2, 2), ParseError);
}

TEST(Csv, FieldRoundTrip) {
  const GridSpec g(2, 8);
  const Field f = Field::stack({sample(g, kGauss), sample(g, [](Complex z) { return z * 0.1; })});
  std::stringstream ss;
  write_field_csv(ss, f);
  const Field h = read_field_csv(ss, g, 2);
  EXPECT_EQ(max_abs(Vector(f.values() - h.values())), 0.0);
}

TEST(Apply, ShapesAndErrors) {
  const GridSpec g(2, 8);
  const SparseMatrix D = discretize(build_defect_operator(ModelSpec{}), g);
  const Field pair = sample(g, std::vector<GaussianAnsatz>(2, kGauss));
  EXPECT_EQ(dil::apply(D, pair).components(), 2);
  EXPECT_THROW(dil::apply(D, sample(g, kGauss)), DimensionError);
}
