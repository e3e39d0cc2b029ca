#include "hololab/verify.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace hololab;

namespace {

CatalogEntry lorentzian_plane() {
  auto g = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{exp(x[1]), -1.0 + 0.0 * x[0]};
  });
  WeightedManifold m(CoordinateChart({"x", "y"}, {}), MetricField(g, {1, 1}),
                     DensityField::analytic(2, [](const auto& x) { return 0.3 * x[0] * x[1]; }));
  CatalogEntry e("lorentz", m);
  e.basepoint = Vector::Zero(2);
  e.region = {Vector::Constant(2, -0.5), Vector::Constant(2, 0.5)};
  return e;
}

void expect_sorted_details(const CheckReport& r) {
  EXPECT_LE(r.details.size(), 5u);
  for (std::size_t i = 1; i < r.details.size(); ++i) EXPECT_GE(r.details[i - 1].value, r.details[i].value);
  if (!r.details.empty()) {
    EXPECT_DOUBLE_EQ(r.details.front().value, r.max_violation);
  }
}

}  // namespace

TEST(Checks, PassOnTheBorelExample) {
  const CatalogEntry e = make_entry("borel2d");
  for (const CheckReport& r : {check_duality_pairing(e, 4), check_dual_holonomy(e, 4), check_dual_vector_fields(e, 4),
                               check_codazzi(e, 10), check_unimodularity(e, 4)}) {
    EXPECT_TRUE(r.passed) << r.check_name << " " << r.max_violation;
    EXPECT_EQ(r.entry_name, "borel2d");
    EXPECT_GT(r.samples, 0);
    EXPECT_LE(r.max_violation, r.tol);
    expect_sorted_details(r);
  }
}

TEST(Checks, SampleCountsAndTolerances) {
  const CatalogEntry e = make_entry("sphere2");
  const CheckReport c = check_codazzi(e, 7);
  EXPECT_EQ(c.samples, 7);
  EXPECT_DOUBLE_EQ(c.tol, 1e-6);
  const CheckReport u = check_unimodularity(e, 3, 9);
  EXPECT_EQ(u.samples, 3);
  EXPECT_TRUE(u.passed);
}

TEST(Checks, IndefiniteMetricsSkipThePairing) {
  const CatalogEntry e = lorentzian_plane();
  EXPECT_ERROR_CODE(check_duality_pairing(e, 2), ErrorCode::BadSignature);
  EXPECT_TRUE(check_dual_holonomy(e, 3).passed);
  EXPECT_TRUE(check_codazzi(e, 5).passed);
  const auto reports = run_checks({e}, SuiteOptions{{}, 5, 2, 2, 1, 1.0});
  for (const auto& r : reports) EXPECT_NE(r.check_name, "duality_pairing");
}

TEST(Checks, ProjectiveEquivalenceDetectsAWrongCompanion) {
  CatalogEntry e = make_entry("so11_2d");
  EXPECT_TRUE(check_projective_equivalence(e, 10).passed);
  EXPECT_DOUBLE_EQ(check_projective_equivalence(e, 10).tol, 1e-7);
  e.companion = make_entry("borel2d").manifold;
  const CheckReport bad = check_projective_equivalence(e, 10);
  EXPECT_FALSE(bad.passed);
  expect_sorted_details(bad);
  e.companion.reset();
  EXPECT_ERROR_CODE(check_projective_equivalence(e, 10), ErrorCode::InvalidArgument);
}

TEST(Checks, BlocksOnBothSlices) {
  for (const char* name : {"triangular(3)", "sphereN(3)"}) {
    const CatalogEntry e = make_entry(name);
    ASSERT_EQ(e.slices.size(), 1u) << name;
    const CheckReport r = check_totally_geodesic_blocks(e, e.slices.front());
    EXPECT_TRUE(r.passed) << name << " " << r.max_violation;
  }
}

TEST(Checks, ReportJsonRoundTrip) {
  const CheckReport r = check_codazzi(make_entry("borel2d"), 6);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j.at("check_name"), "codazzi");
  const CheckReport back = check_report_from_json(j);
  EXPECT_EQ(back.check_name, r.check_name);
  EXPECT_EQ(back.entry_name, r.entry_name);
  EXPECT_EQ(back.samples, r.samples);
  EXPECT_EQ(back.max_violation, r.max_violation);
  EXPECT_EQ(back.passed, r.passed);
  ASSERT_EQ(back.details.size(), r.details.size());
  for (std::size_t i = 0; i < r.details.size(); ++i) {
    EXPECT_EQ(back.details[i].where, r.details[i].where);
    EXPECT_EQ(back.details[i].point, r.details[i].point);
    EXPECT_EQ(back.details[i].value, r.details[i].value);
  }
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Suite, SelectionOrderingAndDeterminism) {
  const std::vector<CatalogEntry> entries{make_entry("so11_2d"), make_entry("borel2d")};
  SuiteOptions opts{{"unimodularity", "codazzi", "projective_equivalence"}, 5, 2, 2, 3, 1.0};
  const auto a = run_checks(entries, opts);
  // borel2d has no companion, so five reports.
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 1; i < a.size(); ++i)
    EXPECT_LE(std::tie(a[i - 1].check_name, a[i - 1].entry_name), std::tie(a[i].check_name, a[i].entry_name));
  const auto b = run_checks(entries, opts);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_json(a[i]).dump(), to_json(b[i]).dump());

  opts.tol_scale = 0.0;
  for (const auto& r : run_checks(entries, opts)) EXPECT_EQ(r.passed, r.max_violation == 0.0);

  opts.checks = {"curl"};
  EXPECT_ERROR_CODE(run_checks(entries, opts), ErrorCode::ConfigError);
  const auto names = check_names();
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  EXPECT_EQ(names.size(), 7u);
}
