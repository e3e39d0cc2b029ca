#include "hololab/catalog.hpp"
#include "hololab/liealg.hpp"
#include "hololab/transport.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hololab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Loop unit_square() { return Loop::polyline({vec({0, 0}), vec({1, 0}), vec({1, 1}), vec({0, 1}), vec({0, 0})}); }

}  // namespace

TEST(Integrator, ConstantCoefficientsGiveTheExponential) {
  Matrix a(3, 3);
  a << 0.1, -0.7, 0.3, 0.5, 0.0, -0.2, 0.4, 0.9, -0.3;
  const auto sol = integrate_linear([&](double) { return a; }, Matrix::Identity(3, 3), {});
  EXPECT_LT(max_abs(sol.value - oracle::reference_exp(a)), 1e-12);
  EXPECT_LT(sol.est_error, 1e-12);
}

TEST(Integrator, ScalarTimeDependentEquation) {
  // y' = 2t y has y(1) = e.
  const auto sol = integrate_linear([](double t) { return Matrix::Constant(1, 1, 2 * t); }, Matrix::Identity(1, 1), {});
  EXPECT_NEAR(sol.value(0, 0), std::exp(1.0), 1e-12);
}

TEST(Integrator, StepDoublingAndUnderflow) {
  auto stiff = [](double) { return Matrix::Constant(1, 1, 20.0); };
  IntegratorOptions opts;
  opts.steps = 4;
  opts.max_steps = 4096;
  const auto sol = integrate_linear(stiff, Matrix::Identity(1, 1), opts);
  EXPECT_GT(sol.steps_used, 8);
  EXPECT_NEAR(sol.value(0, 0) / std::exp(20.0), 1.0, 1e-8);
  opts.max_steps = 8;
  EXPECT_ERROR_CODE(integrate_linear(stiff, Matrix::Identity(1, 1), opts), ErrorCode::StepUnderflow);
  opts.steps = 0;
  EXPECT_ERROR_CODE(integrate_linear(stiff, Matrix::Identity(1, 1), opts), ErrorCode::InvalidArgument);
}

TEST(Integrator, FourthOrderConvergence) {
  const CatalogEntry e = make_entry("borel2d");
  const Matrix exact = [] {
    const double E = std::exp(1.0);
    Matrix m(2, 2);
    m << 1 / E, (3 - E * E) / (2 * E), 0, E;
    return m;
  }();
  IntegratorOptions opts;
  opts.tolerance = 1e6;  // no doubling
  std::vector<double> errs;
  for (int steps : {4, 8, 16, 32}) {
    opts.steps = steps;
    errs.push_back(max_abs(holonomy(e.manifold, ConnectionKind::Weighted, unit_square(), opts).matrix - exact));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) EXPECT_GT(std::log2(errs[i - 1] / errs[i]), 3.8);
}

TEST(Loops, Validation) {
  const CoordinateChart chart({"x", "y"}, {});
  EXPECT_NO_THROW(unit_square().validate(chart));
  const Loop open = Loop::polyline({vec({0, 0}), vec({1, 0}), vec({1, 1})});
  EXPECT_ERROR_CODE(open.validate(chart), ErrorCode::NotClosed);
  const Loop gap({PathSegment::line(vec({0, 0}), vec({1, 0})), PathSegment::line(vec({1, 0.5}), vec({0, 0}))}, vec({0, 0}));
  EXPECT_ERROR_CODE(gap.validate(chart), ErrorCode::NotClosed);
  const CoordinateChart periodic({"r", "t"}, {Interval{0, 2}, Interval{}}, {std::nullopt, 2 * M_PI});
  const Loop wrap = Loop::polyline({vec({1, 0}), vec({1, 2 * M_PI})});
  EXPECT_NO_THROW(wrap.validate(periodic));
  EXPECT_ERROR_CODE(wrap.validate(chart), ErrorCode::NotClosed);
  EXPECT_ERROR_CODE(PathSegment::line(vec({0}), vec({0, 1})), ErrorCode::ShapeMismatch);
}

TEST(Loops, CurvedSegmentsCheckTheirVelocity) {
  auto pos = [](double t) { return vec({std::cos(2 * M_PI * t), std::sin(2 * M_PI * t)}); };
  auto vel = [](double t) { return vec({-2 * M_PI * std::sin(2 * M_PI * t), 2 * M_PI * std::cos(2 * M_PI * t)}); };
  EXPECT_NO_THROW(PathSegment::curve(pos, vel));
  EXPECT_ERROR_CODE(PathSegment::curve(pos, [](double) { return vec({1, 0}); }), ErrorCode::InvalidArgument);
}

TEST(Holonomy, ReversalInvertsAndConcatenationComposes) {
  const CatalogEntry e = make_entry("sphere2");
  const Vector b = e.basepoint;
  const Loop l1 = Loop::polyline({b, b + vec({0.3, 0}), b + vec({0.3, 0.5}), b + vec({0, 0.5}), b});
  const Loop l2 = Loop::polyline({b, b + vec({0, -0.4}), b + vec({-0.2, -0.4}), b});
  const Matrix p1 = holonomy(e.manifold, ConnectionKind::Weighted, l1).matrix;
  const Matrix p2 = holonomy(e.manifold, ConnectionKind::Weighted, l2).matrix;
  const Matrix p1r = holonomy(e.manifold, ConnectionKind::Weighted, l1.reversed()).matrix;
  EXPECT_LT(max_abs(p1 * p1r - Matrix::Identity(2, 2)), 1e-10);
  // Traverse l1, then l2: transport matrices compose right to left.
  const Matrix p12 = holonomy(e.manifold, ConnectionKind::Weighted, l1.concatenated(l2)).matrix;
  EXPECT_LT(max_abs(p12 - p2 * p1), 1e-10);
  EXPECT_GT(max_abs(p1 - Matrix::Identity(2, 2)), 1e-3);
}

TEST(Holonomy, VectorAndCovectorTransportAgreeWithMatrices) {
  const CatalogEntry e = make_entry("triangular(3)");
  const std::vector<PathSegment> path{PathSegment::line(vec({0, 0, 0}), vec({0.5, -0.3, 0.2})),
                                      PathSegment::line(vec({0.5, -0.3, 0.2}), vec({0.1, 0.4, -0.5}))};
  const Vector v0 = vec({1, -2, 0.5});
  const Matrix p = transport_matrix(e.manifold, ConnectionKind::Weighted, path).value;
  EXPECT_LT((transport_vector(e.manifold, ConnectionKind::Weighted, path, v0) - p * v0).cwiseAbs().maxCoeff(), 1e-12);
  // A parallel covector pairs constantly with a parallel vector of the same connection.
  const Vector a0 = vec({0.3, 1.0, -0.7});
  const Vector a1 = transport_covector(e.manifold, ConnectionKind::Weighted, path, a0);
  EXPECT_NEAR(a1.dot(p * v0), a0.dot(v0), 1e-10);
  const Matrix c = covector_transport_matrix(e.manifold, ConnectionKind::Weighted, path).value;
  EXPECT_LT(max_abs(c - p.inverse().transpose()), 1e-10);
}

TEST(Holonomy, FlatMetricWithConstantDensityIsTrivial) {
  auto g = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{T(1.0), T(1.0)};
  });
  const CoordinateChart chart({"x", "y"}, {});
  const WeightedManifold flat(chart, MetricField(g, {2, 0}), DensityField::constant(2, 0.3));
  EXPECT_LT(max_abs(holonomy(flat, ConnectionKind::Weighted, unit_square()).matrix - Matrix::Identity(2, 2)), 1e-13);
}

TEST(RandomLoops, DeterministicClosedAndBorelUpperTriangular) {
  const CatalogEntry e = make_entry("borel2d");
  const auto a = random_rectangle_loops(e.manifold, e.region, 5, 42);
  const auto b = random_rectangle_loops(e.manifold, e.region, 5, 42);
  const auto c = random_rectangle_loops(e.manifold, e.region, 5, 43);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_TRUE(random_rectangle_loops(e.manifold, e.region, 0, 1).empty());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NO_THROW(a[i].validate(e.manifold.chart()));
    EXPECT_LT((a[i].basepoint() - e.region.center()).norm(), 1e-15);
    ASSERT_EQ(a[i].segments().size(), b[i].segments().size());
    for (std::size_t s = 0; s < a[i].segments().size(); ++s)
      EXPECT_EQ(a[i].segments()[s].end(), b[i].segments()[s].end());
    differs = differs || a[i].segments().size() != c[i].segments().size() ||
              a[i].segments()[1].end() != c[i].segments()[1].end();
    const Matrix p = holonomy(e.manifold, ConnectionKind::Weighted, a[i]).matrix;
    EXPECT_LT(std::abs(p(1, 0)), 1e-10);
    EXPECT_NEAR(p.determinant(), 1.0, 1e-10);
  }
  EXPECT_TRUE(differs);
  Box empty{vec({0, 0}), vec({0, 1})};
  EXPECT_ERROR_CODE(random_rectangle_loops(e.manifold, empty, 1, 1), ErrorCode::EmptyRegion);
}

TEST(Families, DerivativeOfAConstantFamilyVanishes) {
  const CatalogEntry e = make_entry("borel2d");
  LoopFamily trivial{[](double) { return Loop::polyline({vec({0, 0}), vec({0.5, 0}), vec({0, 0})}); }, 1.0, true};
  EXPECT_LT(max_abs(family_derivative(e.manifold, ConnectionKind::Weighted, trivial)), 1e-9);

  // Rectangles [0,s] x [0,1]: P'(0) is the s-derivative of the closed-form holonomy.
  LoopFamily rect{[](double s) { return Loop::polyline({vec({0, 0}), vec({s, 0}), vec({s, 1}), vec({0, 1}), vec({0, 0})}); },
                  1.0, true};
  const Matrix d = family_derivative(e.manifold, ConnectionKind::Weighted, rect);
  const Matrix h = holonomy(e.manifold, ConnectionKind::Weighted, rect.family(1e-4)).matrix;
  EXPECT_LT(max_abs(d - (h - Matrix::Identity(2, 2)) / 1e-4), 1e-3);

  LoopFamily shifted{[](double s) { return Loop::polyline({vec({0, 0}), vec({1, 0}), vec({1, 1 + s}), vec({0, 1 + s}), vec({0, 0})}); },
                     1.0, true};
  EXPECT_ERROR_CODE(family_derivative(e.manifold, ConnectionKind::Weighted, shifted), ErrorCode::FamilyNotTrivial);
  EXPECT_ERROR_CODE(family_derivative(e.manifold, ConnectionKind::Weighted, rect, 2.0), ErrorCode::InvalidArgument);
}

TEST(Slices, TriangularPlaneIsTotallyGeodesicAndBlocksMatch) {
  const CatalogEntry e = make_entry("triangular(3)");
  ASSERT_FALSE(e.slices.empty());
  const GeodesicSlice& sl = e.slices.front();
  const Loop& loop = sl.loops.front();
  EXPECT_NO_THROW(require_totally_geodesic(e.manifold, sl.spec, loop));
  const BlockTransport bt = predicted_block_transport(e.manifold, sl.spec, loop);
  const Matrix ambient = holonomy(e.manifold, ConnectionKind::Weighted, loop).matrix;
  EXPECT_LT(max_abs(bt.predicted - ambient), 1e-9);
  // The slice is the n = 2 member of the family.
  const CatalogEntry two = make_entry("triangular(2)");
  EXPECT_LT(max_abs(bt.tangent - holonomy(two.manifold, ConnectionKind::Weighted, unit_square()).matrix), 1e-9);

  // {x = 0} carries normal Christoffels e^{...} in Gamma^x_{yy}: not totally geodesic.
  const SliceSpec yz{{1, 2}, Vector::Zero(3)};
  const Loop in_yz = Loop::polyline({vec({0, 0, 0}), vec({0, 1, 0}), vec({0, 1, 1}), vec({0, 0, 0})});
  EXPECT_ERROR_CODE(require_totally_geodesic(e.manifold, yz, in_yz), ErrorCode::NotTotallyGeodesic);
}

TEST(Slices, RestrictionKeepsTheInducedMetric) {
  const CatalogEntry e = make_entry("sphereN(3)");
  const SliceSpec& spec = e.slices.front().spec;
  const WeightedManifold s = restrict_to_slice(e.manifold, spec);
  EXPECT_EQ(s.dim(), 2);
  const Vector y = vec({1.3, 0.4});
  const Matrix g = metric_at(e.manifold, spec.embed(y));
  EXPECT_NEAR(metric_at(s, y)(0, 0), g(0, 0), 1e-15);
  EXPECT_NEAR(metric_at(s, y)(1, 1), g(2, 2), 1e-15);
  EXPECT_NEAR(s.density().value(y), e.manifold.density().value(spec.embed(y)), 1e-15);
}

TEST(Frames, TraceEndsAtTheHolonomy) {
  const CatalogEntry e = make_entry("borel2d");
  const auto frames = trace_frame(e.manifold, ConnectionKind::Weighted, unit_square(), 10);
  ASSERT_FALSE(frames.empty());
  EXPECT_LT(max_abs(frames.front().frame - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(frames.back().frame - holonomy(e.manifold, ConnectionKind::Weighted, unit_square()).matrix), 1e-9);
}
