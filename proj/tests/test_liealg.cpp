#include "hololab/liealg.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hololab;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix unit(int n, int i, int j) {
  Matrix m = Matrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m * (scale / m.norm());
}

}  // namespace

TEST(Bracket, Commutator) {
  const Matrix e = unit(2, 0, 1), f = unit(2, 1, 0);
  EXPECT_EQ(bracket(e, f), m2(1, 0, 0, -1));
  EXPECT_ERROR_CODE(bracket(e, Matrix::Zero(3, 3)), ErrorCode::ShapeMismatch);
}

TEST(MatExp, AgreesWithTaylorAndReferenceOracles) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 4;
    const Matrix a = random_matrix(rng, n, 0.05 + 0.05 * trial);
    const Matrix e = mat_exp(a);
    const double scale = std::max(1.0, max_abs(e));
    EXPECT_LT(max_abs(e - oracle::taylor_exp(a)) / scale, 1e-13) << "trial " << trial;
    EXPECT_LT(max_abs(e - oracle::reference_exp(a)) / scale, 1e-13) << "trial " << trial;
  }
}

TEST(MatExp, ExactCases) {
  EXPECT_EQ(mat_exp(Matrix::Zero(3, 3)), Matrix::Identity(3, 3));
  const Matrix n = unit(3, 0, 1) * 2.0 + unit(3, 1, 2) * 3.0;
  Matrix expected = Matrix::Identity(3, 3) + n;
  expected(0, 2) = 3.0;  // N^2 / 2
  EXPECT_LT(max_abs(mat_exp(n) - expected), 1e-14);
  const double t = 0.8;
  EXPECT_LT(max_abs(mat_exp(m2(0, -t, t, 0)) - m2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t))), 1e-15);
  EXPECT_LT(max_abs(mat_exp(m2(0, t, t, 0)) - m2(std::cosh(t), std::sinh(t), std::sinh(t), std::cosh(t))), 1e-15);
  EXPECT_NEAR(mat_exp(Matrix::Constant(1, 1, 30.0))(0, 0) / std::exp(30.0), 1.0, 1e-13);
}

TEST(MatLog, InvertsExpAndMatchesReference) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 4;
    const Matrix a = random_matrix(rng, n, 0.1 + 0.04 * trial);  // spectrum well inside the principal strip
    const Matrix p = mat_exp(a);
    const Matrix l = mat_log(p);
    EXPECT_LT(max_abs(l - a), 1e-10) << "trial " << trial;
    EXPECT_LT(max_abs(l - oracle::reference_log(p)), 1e-10) << "trial " << trial;
    EXPECT_LT(max_abs(mat_exp(l) - p) / std::max(1.0, max_abs(p)), 1e-12);
  }
  EXPECT_LT(max_abs(mat_log(Matrix::Identity(4, 4))), 1e-15);
  const double e = std::exp(1.0);
  EXPECT_LT(max_abs(mat_log(m2(1 / e, 2.0, 0, e)) - m2(-1, 4.0 / (e - 1 / e), 0, 1)), 1e-12);
}

TEST(MatLog, UndefinedOnTheNegativeAxis) {
  EXPECT_ERROR_CODE(mat_log(m2(-1, 0, 0, -1)), ErrorCode::LogUndefined);
  EXPECT_ERROR_CODE(mat_log(m2(-2, 0, 0, -0.5)), ErrorCode::LogUndefined);
  EXPECT_ERROR_CODE(mat_log(m2(0, 0, 0, 1)), ErrorCode::LogUndefined);
  EXPECT_ERROR_CODE(mat_log(Matrix::Zero(2, 3)), ErrorCode::ShapeMismatch);
  // A rotation by less than pi has a real principal log.
  EXPECT_LT(max_abs(mat_log(m2(std::cos(3.0), -std::sin(3.0), std::sin(3.0), std::cos(3.0))) - m2(0, -3, 3, 0)), 1e-12);
}

TEST(Basis, OrthonormalInsertionAndResidual) {
  LieAlgebraBasis b(2);
  EXPECT_TRUE(b.insert(m2(1, 2, 0, -1)));
  EXPECT_FALSE(b.insert(m2(2, 4, 0, -2)));
  EXPECT_FALSE(b.insert(Matrix::Zero(2, 2)));
  EXPECT_TRUE(b.insert(m2(0, 1, 0, 0)));
  EXPECT_EQ(b.dim(), 2);
  EXPECT_NEAR(b.residual(m2(3, -1, 0, -3)), 0.0, 1e-14);
  EXPECT_NEAR(b.residual(unit(2, 1, 0)), 1.0, 1e-14);
  const auto& el = b.elements();
  EXPECT_NEAR((el[0].array() * el[1].array()).sum(), 0.0, 1e-15);
  EXPECT_NEAR(el[1].norm(), 1.0, 1e-15);
  EXPECT_ERROR_CODE(b.insert(Matrix::Zero(3, 3)), ErrorCode::ShapeMismatch);

  auto [b2, grew] = span_insert(b, unit(2, 1, 0));
  EXPECT_TRUE(grew);
  EXPECT_EQ(b2.dim(), 3);
  EXPECT_EQ(b.dim(), 2);
  // Below the rank tolerance relative to the element's own size.
  EXPECT_FALSE(span_insert(b, m2(1, 0, 1e-10, -1)).second);
}

TEST(Closure, KnownAlgebras) {
  EXPECT_EQ(closure({unit(2, 0, 1), unit(2, 1, 0)}).dim(), 3);                 // sl2
  EXPECT_EQ(closure({unit(3, 0, 1), unit(3, 1, 2)}).dim(), 3);                 // Heisenberg
  EXPECT_EQ(closure({unit(3, 0, 1) - unit(3, 1, 0), unit(3, 1, 2) - unit(3, 2, 1)}).dim(), 3);  // so3
  EXPECT_EQ(closure({Matrix(unit(3, 0, 0)), Matrix(unit(3, 1, 1))}).dim(), 2);      // abelian
  EXPECT_EQ(closure({unit(3, 0, 1), unit(3, 1, 0), unit(3, 1, 2), unit(3, 2, 1)}).dim(), 8);  // sl3
  EXPECT_EQ(closure({unit(3, 0, 1), unit(3, 1, 0), unit(3, 1, 2), unit(3, 2, 1)}, 5).dim(), 5);
  EXPECT_ERROR_CODE(closure({}), ErrorCode::InvalidArgument);
}

TEST(Closure, ResultIsClosedUnderBrackets) {
  std::mt19937_64 rng(5);
  Matrix a = random_matrix(rng, 4, 1.0), b = random_matrix(rng, 4, 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = b(i, j) = 0.0;  // strictly upper: nilpotent algebra
  const LieAlgebraBasis basis = closure({a, b});
  EXPECT_LE(basis.dim(), 6);
  for (const Matrix& x : basis.elements())
    for (const Matrix& y : basis.elements()) EXPECT_LT(basis.residual(bracket(x, y)) * bracket(x, y).norm(), 1e-8);
}

TEST(Classify, Tags) {
  using K = AlgebraTag::Kind;
  EXPECT_EQ(classify(LieAlgebraBasis(2)).kind, K::Trivial);
  EXPECT_EQ(classify(closure({unit(2, 0, 1)})).kind, K::Abelian1D_Nilpotent);
  EXPECT_EQ(classify(closure({m2(0, -1, 1, 0)}), Matrix::Identity(2, 2)).kind, K::SO2);
  EXPECT_EQ(classify(closure({m2(0, 1, 1, 0)}), m2(1, 0, 0, -1)).kind, K::SOplus11);
  EXPECT_EQ(classify(closure({m2(-1, 0.3, 0, 1), m2(0, 1, 0, 0)})).kind, K::Borel2D);
  EXPECT_EQ(classify(closure({unit(2, 0, 1), unit(2, 1, 0)})).kind, K::SL);
  EXPECT_EQ(classify(closure({unit(3, 0, 1), unit(3, 1, 2)})).kind, K::Heisenberg);
  EXPECT_EQ(classify(closure({unit(4, 0, 1), unit(4, 1, 2), unit(4, 2, 3)})).kind, K::StrictlyUpperTriangular);

  Matrix eta = Matrix::Identity(3, 3);
  eta(2, 2) = -1;
  const Matrix boost1 = unit(3, 0, 2) + unit(3, 2, 0), boost2 = unit(3, 1, 2) + unit(3, 2, 1);
  const AlgebraTag so21 = classify(closure({boost1, boost2}), eta);
  EXPECT_EQ(so21, (AlgebraTag{K::SOpq, 2, 1}));
  EXPECT_EQ(so21.name(), "SOpq(2,1)");
  // Same algebra without the form is not recognized.
  EXPECT_EQ(classify(closure({boost1, boost2})).kind, K::Unclassified);
  EXPECT_EQ(classify(closure({Matrix(unit(3, 0, 0))})).name(), "Unclassified(1)");
  EXPECT_ERROR_CODE(classify(closure({boost1}), Matrix::Identity(2, 2)), ErrorCode::ShapeMismatch);
}
