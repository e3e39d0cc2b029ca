#include "hololab/catalog.hpp"
#include "hololab/manifold.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hololab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Polar coordinates on the plane, optionally weighted by phi = c * r.
WeightedManifold polar(double c) {
  auto g = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), x[0] * x[0]};
  });
  auto phi = DensityField::analytic(2, [c](const auto& x) { return c * x[0]; });
  return WeightedManifold(CoordinateChart({"r", "t"}, {Interval{0.1, 10}, Interval{}}, {std::nullopt, 2 * M_PI}),
                          MetricField(g, {2, 0}), phi);
}

Vector random_point(const CatalogEntry& e, std::mt19937_64& rng) {
  Vector x(e.manifold.dim());
  for (int i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(e.region.lo[i], e.region.hi[i])(rng);
  return x;
}

}  // namespace

TEST(Chart, DomainsAndPeriods) {
  const CoordinateChart chart({"r", "t"}, {Interval{0, 1}, Interval{}}, {std::nullopt, 2 * M_PI});
  EXPECT_TRUE(chart.contains(vec({0.5, 100.0})));
  EXPECT_FALSE(chart.contains(vec({1.0, 0.0})));
  EXPECT_ERROR_CODE(chart.require_contains(vec({1.5, 0.0})), ErrorCode::OutOfDomain);
  EXPECT_ERROR_CODE(chart.require_contains(vec({0.5})), ErrorCode::ShapeMismatch);
  EXPECT_TRUE(chart.same_point(vec({0.5, 0.0}), vec({0.5, 4 * M_PI})));
  EXPECT_FALSE(chart.same_point(vec({0.5, 0.0}), vec({0.5, M_PI})));
  EXPECT_EQ(chart.sample_grid().size(), 9u);
  EXPECT_ERROR_CODE(CoordinateChart({"x"}, {Interval{1, 1}}), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(CoordinateChart({}, {}), ErrorCode::BadDimension);
}

TEST(Signature, CountsEigenvalueSigns) {
  Matrix m(3, 3);
  m << 2, 0, 0, 0, -1, 0, 0, 0, 3;
  EXPECT_EQ(signature_of(m), (Signature{2, 1}));
  EXPECT_TRUE((Signature{3, 0}).riemannian());
  EXPECT_FALSE((Signature{2, 1}).riemannian());
}

TEST(WeightedManifoldValidation, RejectsBadMetrics) {
  const CoordinateChart chart({"x", "y"}, {});
  auto singular = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), x[0] - x[0]};
  });
  EXPECT_ERROR_CODE(WeightedManifold(chart, MetricField(singular, {2, 0}), DensityField::constant(2, 0)),
                    ErrorCode::SingularMetric);
  auto lorentz = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), T(-1.0)};
  });
  EXPECT_ERROR_CODE(WeightedManifold(chart, MetricField(lorentz, {2, 0}), DensityField::constant(2, 0)),
                    ErrorCode::BadSignature);
  EXPECT_NO_THROW(WeightedManifold(chart, MetricField(lorentz, {1, 1}), DensityField::constant(2, 0)));
  auto skew = BilinearField::analytic(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), T(0.5), T(0.0), T(1.0)};
  });
  EXPECT_ERROR_CODE(WeightedManifold(chart, MetricField(skew, {2, 0}), DensityField::constant(2, 0)),
                    ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(WeightedManifold(chart, MetricField(lorentz, {1, 1}), DensityField::constant(3, 0)),
                    ErrorCode::BadDimension);
}

TEST(Christoffel, PolarLeviCivita) {
  const WeightedManifold m = polar(0.0);
  const Vector x = vec({2.0, 0.3});
  const auto g = christoffel(m, ConnectionKind::LeviCivita, x);
  EXPECT_NEAR(g(0, 1, 1), -2.0, 1e-14);
  EXPECT_NEAR(g(1, 0, 1), 0.5, 1e-14);
  EXPECT_NEAR(g(1, 1, 0), 0.5, 1e-14);
  EXPECT_NEAR(g(0, 0, 0), 0.0, 1e-14);
  // A constant density leaves every connection equal to Levi-Civita.
  const auto w = christoffel(m, ConnectionKind::Weighted, x);
  const auto d = christoffel(m, ConnectionKind::DualWeighted, x);
  EXPECT_LT(w.gamma.max_abs_diff(g.gamma), 1e-15);
  EXPECT_LT(d.gamma.max_abs_diff(g.gamma), 1e-15);
}

TEST(Christoffel, WeightedAndDualFormulas) {
  const double c = 0.7;
  const WeightedManifold m = polar(c);
  const Vector x = vec({1.5, -0.4});
  const auto lc = christoffel(m, ConnectionKind::LeviCivita, x).gamma;
  const auto w = christoffel(m, ConnectionKind::Weighted, x).gamma;
  const auto d = christoffel(m, ConnectionKind::DualWeighted, x).gamma;
  const double dphi[2] = {c, 0.0};
  const double ginv_dphi[2] = {c, 0.0};  // g^{-1} dphi
  Matrix g(2, 2);
  g << 1, 0, 0, x[0] * x[0];
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double expected_w = lc(k, i, j) - dphi[i] * (j == k) - dphi[j] * (i == k);
        const double expected_d = lc(k, i, j) + g(i, j) * ginv_dphi[k];
        EXPECT_NEAR(w(k, i, j), expected_w, 1e-14);
        EXPECT_NEAR(d(k, i, j), expected_d, 1e-14);
      }
}

TEST(Christoffel, ConnectionMatrixContractsFirstLowerIndex) {
  const CatalogEntry e = make_entry("triangular(3)");
  const Vector x = vec({0.2, -0.1, 0.4}), v = vec({0.3, -1.0, 2.0});
  const auto g = christoffel(e.manifold, ConnectionKind::Weighted, x);
  const Matrix a = connection_matrix(e.manifold, ConnectionKind::Weighted, x, v);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int i = 0; i < 3; ++i) s += g(k, i, j) * v[i];
      EXPECT_NEAR(a(k, j), s, 1e-14);
    }
}

// d_k h(e_i, e_j) = h(nabla_k e_i, e_j) + h(e_i, nabla*_k e_j), h = e^{-phi} g.
TEST(Duality, MetricCompatibilityOfThePair) {
  for (const char* name : {"sphere2", "borel2d", "triangular(3)", "so_pq(1,2)"}) {
    const CatalogEntry e = make_entry(name);
    const int n = e.manifold.dim();
    std::mt19937_64 rng(3);
    for (int p = 0; p < 5; ++p) {
      const Vector x = random_point(e, rng);
      const auto w = christoffel(e.manifold, ConnectionKind::Weighted, x);
      const auto d = christoffel(e.manifold, ConnectionKind::DualWeighted, x);
      const Matrix h = weighted_metric_at(e.manifold, x);
      for (int k = 0; k < n; ++k) {
        Vector step = Vector::Zero(n);
        step[k] = 1e-5;
        const Matrix dh = (weighted_metric_at(e.manifold, x + step) - weighted_metric_at(e.manifold, x - step)) / 2e-5;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double rhs = 0;
            for (int l = 0; l < n; ++l) rhs += w(l, k, i) * h(l, j) + d(l, k, j) * h(i, l);
            EXPECT_NEAR(dh(i, j), rhs, 1e-7 * std::max(1.0, std::abs(dh(i, j)))) << name;
          }
      }
    }
  }
}

TEST(Derivatives, FiniteDifferenceModeAgrees) {
  for (const char* name : {"sphere2", "borel2d", "so11_2d"}) {
    const CatalogEntry e = make_entry(name);
    const WeightedManifold fd = e.manifold.with_finite_differences();
    EXPECT_EQ(fd.metric().mode(), DerivativeMode::FiniteDifference);
    std::mt19937_64 rng(4);
    for (int p = 0; p < 5; ++p) {
      const Vector x = random_point(e, rng);
      for (auto kind : {ConnectionKind::LeviCivita, ConnectionKind::Weighted, ConnectionKind::DualWeighted})
        EXPECT_LT(christoffel(fd, kind, x).gamma.max_abs_diff(christoffel(e.manifold, kind, x).gamma), 1e-6) << name;
      EXPECT_LT((ricci_at(fd, ConnectionKind::Weighted, x) - ricci_at(e.manifold, ConnectionKind::Weighted, x))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-4)
          << name;
    }
  }
}

TEST(Curvature, RoundSphereAndFlatPlane) {
  auto g = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), sin(x[0]) * sin(x[0])};
  });
  const WeightedManifold s2(CoordinateChart({"r", "t"}, {Interval{0.05, 3.09}, Interval{}}, {std::nullopt, 2 * M_PI}),
                            MetricField(g, {2, 0}), DensityField::constant(2, 0));
  const Vector x = vec({1.1, 0.2});
  const Matrix ric = ricci_at(s2, ConnectionKind::LeviCivita, x);
  EXPECT_LT((ric - metric_at(s2, x)).cwiseAbs().maxCoeff(), 1e-12);
  const Tensor4 r = curvature_at(s2, ConnectionKind::LeviCivita, x);
  EXPECT_NEAR(r(0, 1, 0, 1), -std::sin(1.1) * std::sin(1.1), 1e-12);  // R^r_{t r t}
  EXPECT_NEAR(r(0, 0, 1, 1), std::sin(1.1) * std::sin(1.1), 1e-12);
  EXPECT_LT(curvature_at(polar(0.0), ConnectionKind::LeviCivita, vec({2.0, 1.0})).max_abs(), 1e-12);
}

TEST(Codazzi, WeightedDerivativeOfHIsAmariChentsov) {
  const CatalogEntry e = make_entry("sphere2");
  const BilinearField h = weighted_metric_field(e.manifold);
  const Vector x = vec({1.2, 0.4});
  const Tensor3 dw = covariant_derivative_of_tensor(e.manifold, ConnectionKind::Weighted, h, x);
  const Tensor3 dd = covariant_derivative_of_tensor(e.manifold, ConnectionKind::DualWeighted, h, x);
  const Tensor3 ac = amari_chentsov(e.manifold, x);
  EXPECT_LT(dw.max_abs_diff(ac), 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(dd(i, j, k), -ac(i, j, k), 1e-12);
        EXPECT_NEAR(dw(i, j, k), dw(j, i, k), 1e-12);
      }
  EXPECT_GT(ac.max_abs(), 0.1);
}

TEST(ConnectionKindNames, RoundTrip) {
  for (auto k : {ConnectionKind::LeviCivita, ConnectionKind::Weighted, ConnectionKind::DualWeighted})
    EXPECT_EQ(connection_kind_from_string(to_string(k)), k);
  EXPECT_ERROR_CODE(connection_kind_from_string("affine"), ErrorCode::ConfigError);
}
