#include "hololab/catalog.hpp"
#include "oracles.hpp"
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

const char* kPrintedHeisenberg = "unit square loop, entry (1,2) as printed";

}  // namespace

TEST(Catalog, EveryListedEntryBuilds) {
  for (const auto& name : catalog_names()) {
    const CatalogEntry e = make_entry(name);
    EXPECT_EQ(e.name, name);
    const auto& chart = e.manifold.chart();
    EXPECT_TRUE(chart.contains(e.basepoint)) << name;
    EXPECT_TRUE(chart.contains(e.region.lo) && chart.contains(e.region.hi)) << name;
    EXPECT_TRUE((e.region.lo.array() < e.region.hi.array()).all()) << name;
  }
  EXPECT_EQ(make_entry("triangular(4)").manifold.dim(), 4);
  EXPECT_EQ(make_entry("so_pq(2, 2)").manifold.dim(), 4);
  EXPECT_EQ(make_entry("lc_random(3,9)").name, "lc_random(3,9)");
}

TEST(Catalog, UnknownAndInvalidNames) {
  EXPECT_ERROR_CODE(make_entry("torus"), ErrorCode::UnknownExample);
  EXPECT_ERROR_CODE(make_entry("sphereN(1)"), ErrorCode::BadDimension);
  EXPECT_ERROR_CODE(make_entry("triangular(1)"), ErrorCode::BadDimension);
  EXPECT_ERROR_CODE(make_entry("so_pq(2,0)"), ErrorCode::BadSignature);
}

TEST(Catalog, ClosedFormTablesMatch) {
  for (const char* name : {"sphere2", "borel2d", "triangular(2)", "triangular(3)", "so11_2d"}) {
    const CatalogEntry e = make_entry(name);
    const GoldenResult r = check_christoffel_table(e, 20, 3);
    EXPECT_TRUE(r.passed) << name << " delta " << r.delta;
    EXPECT_LT(r.delta, 1e-8) << name;
  }
}

TEST(Catalog, GoldensPass) {
  int seen_printed = 0;
  for (const char* name : {"sphere2", "sphereN(3)", "borel2d", "triangular(2)", "triangular(3)", "so_pq(1,2)", "so11_2d"}) {
    const CatalogEntry e = make_entry(name);
    EXPECT_FALSE(e.goldens.empty()) << name;
    for (const Golden& g : e.goldens) {
      // Checked, and reported as failing, by the acceptance run.
      if (g.label == kPrintedHeisenberg) {
        ++seen_printed;
        continue;
      }
      const GoldenResult r = evaluate_golden(g);
      EXPECT_TRUE(r.passed) << name << ": " << g.label << " delta " << r.delta << " tol " << r.tol;
    }
  }
  EXPECT_EQ(seen_printed, 1);
}

TEST(Catalog, XiConstantMatchesBisection) {
  EXPECT_NEAR(xi_constant(), oracle::bisect_xi(), 1e-14);
  EXPECT_NEAR(1.0 / std::tan(xi_constant()) + std::sin(xi_constant()), 0.0, 1e-14);
}

TEST(Catalog, TriangularOmegaMatchesQuadrature) {
  const CatalogEntry e = make_entry("triangular(2)");
  const std::vector<Eigen::Vector2d> tri{{0, 0}, {0.8, 0}, {0.8, -0.6}, {0, 0}};
  const Loop loop = Loop::polyline({vec({0, 0}), vec({0.8, 0}), vec({0.8, -0.6}), vec({0, 0})});
  const Matrix p = holonomy(e.manifold, ConnectionKind::Weighted, loop).matrix;
  EXPECT_NEAR(p(0, 1), oracle::triangular2_omega(tri), 1e-9);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(p(1, 1), 1.0, 1e-10);
  EXPECT_NEAR(p(1, 0), 0.0, 1e-10);
}

TEST(Catalog, SelfDualityMapOfTheTriangularFamily) {
  // F(x) = -reverse(x) pulls g back to e^{-2 phi} g and phi to -phi.
  const CatalogEntry e = make_entry("triangular(3)");
  ASSERT_TRUE(e.self_duality.has_value());
  const Matrix& df = *e.self_duality;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 10; ++k) {
    const Vector x = vec({u(rng), u(rng), u(rng)});
    const Vector fx = df * x;
    const Matrix pulled = df.transpose() * metric_at(e.manifold, fx) * df;
    const double phi = e.manifold.density().value(x);
    EXPECT_LT((pulled - std::exp(-2 * phi) * metric_at(e.manifold, x)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(e.manifold.density().value(fx), -phi, 1e-14);
  }
}

TEST(Catalog, SoPqCompanionSignatures) {
  EXPECT_EQ(make_entry("so_pq(1,2)").companion->metric().signature(), (Signature{1, 2}));
  EXPECT_EQ(make_entry("so_pq(2,1)").companion->metric().signature(), (Signature{2, 1}));
  EXPECT_EQ(make_entry("so_pq(1,1)").companion->metric().signature(), (Signature{1, 1}));
  EXPECT_EQ(make_entry("so_pq(0,2)").companion->metric().signature(), (Signature{2, 0}));
  EXPECT_EQ(make_entry("so11_2d").companion->metric().signature(), (Signature{1, 1}));
  EXPECT_TRUE(make_entry("so_pq(1,2)").riemannian());
}

TEST(Catalog, LeviCivitaPairValidation) {
  const std::vector<std::string> names{"x", "y"};
  const Box box{vec({-1, -1}), vec({1, 1})};
  EXPECT_NO_THROW(levi_civita_pair("ok", names, {"-1", "2+cos(y)"}, {"1", "1"}, box));
  EXPECT_ERROR_CODE(levi_civita_pair("order", names, {"2", "1"}, {"1", "1"}, box), ErrorCode::OrderingViolated);
  EXPECT_ERROR_CODE(levi_civita_pair("overlap", names, {"1+x", "1.5"}, {"1", "1"}, box), ErrorCode::OrderingViolated);
  EXPECT_ERROR_CODE(levi_civita_pair("zero", names, {"x", "3"}, {"1", "1"}, box), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(levi_civita_pair("mixed", names, {"1+0.1*y", "3"}, {"1", "1"}, box), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(levi_civita_pair("a", names, {"1", "3"}, {"x", "1"}, box), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(levi_civita_pair("dim", names, {"1"}, {"1"}, box), ErrorCode::BadDimension);
  EXPECT_ERROR_CODE(levi_civita_pair("syntax", names, {"1+", "3"}, {"1", "1"}, box), ErrorCode::SyntaxError);
}

TEST(Catalog, RandomFamiliesAreSeeded) {
  const CatalogEntry a = make_entry("lc_random(3,5)"), b = make_entry("lc_random(3,5)"), c = make_entry("lc_random(3,6)");
  EXPECT_EQ(a.lc->phis, b.lc->phis);
  EXPECT_NE(a.lc->phis, c.lc->phis);
  ASSERT_TRUE(a.companion.has_value());
  EXPECT_EQ(a.manifold.dim(), 3);
}

TEST(Catalog, FamiliesStartAtTheIdentity) {
  const CatalogEntry e = make_entry("sphere2");
  ASSERT_EQ(e.families.size(), 2u);
  for (const auto& f : e.families) {
    const Matrix p0 = holonomy(e.manifold, ConnectionKind::Weighted, f.family(0.0)).matrix;
    EXPECT_LT((p0 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}
