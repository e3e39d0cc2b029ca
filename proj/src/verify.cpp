#include "hololab/verify.hpp"

#include "hololab/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace hololab {

namespace {

constexpr double kPairingTol = 1e-6;
constexpr double kHolonomyTol = 1e-6;
constexpr double kVectorFieldTol = 1e-6;
constexpr double kCodazziTol = 1e-6;
constexpr double kProjectiveTol = 1e-7;
constexpr double kBlockTol = 1e-6;
constexpr double kDetTol = 1e-6;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Vector random_point(const Box& region, Rng& rng) {
  Vector x(region.lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(region.lo[i], region.hi[i]);
  return x;
}

// Three straight pieces between random points of the (convex) region.
std::vector<std::vector<PathSegment>> random_paths(const Box& region, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<PathSegment>> out;
  for (int p = 0; p < count; ++p) {
    std::vector<PathSegment> path;
    Vector a = random_point(region, rng);
    for (int k = 0; k < 3; ++k) {
      Vector b = random_point(region, rng);
      path.push_back(PathSegment::line(a, b));
      a = b;
    }
    out.push_back(std::move(path));
  }
  return out;
}

std::vector<Vector> random_points(const Box& region, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (int p = 0; p < count; ++p) out.push_back(random_point(region, rng));
  return out;
}

CheckReport assemble(std::string check, const CatalogEntry& entry, double tol, std::vector<CheckDetail> samples) {
  CheckReport r;
  r.check_name = std::move(check);
  r.entry_name = entry.name;
  r.samples = static_cast<int>(samples.size());
  r.tol = tol;
  for (const auto& s : samples) {
    const double v = std::isnan(s.value) ? std::numeric_limits<double>::infinity() : s.value;
    r.max_violation = std::max(r.max_violation, v);
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const CheckDetail& a, const CheckDetail& b) { return a.value > b.value; });
  if (samples.size() > 5) samples.resize(5);
  r.details = std::move(samples);
  r.passed = r.max_violation <= r.tol;
  return r;
}

template <class Item, class F>
std::vector<CheckDetail> sample_all(const std::vector<Item>& items, const char* kind, F fn) {
  return parallel_map<CheckDetail>(items.size(), [&](std::size_t i) {
    auto [point, value] = fn(items[i]);
    return CheckDetail{std::string(kind) + " " + std::to_string(i), to_std(point), value};
  });
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json details = nlohmann::json::array();
  for (const auto& d : r.details) details.push_back({{"where", d.where}, {"point", d.point}, {"value", d.value}});
  return {{"check_name", r.check_name}, {"entry_name", r.entry_name}, {"samples", r.samples},
          {"max_violation", r.max_violation}, {"tol", r.tol}, {"passed", r.passed}, {"details", details}};
}

CheckReport check_report_from_json(const nlohmann::json& j) {
  CheckReport r;
  r.check_name = j.at("check_name").get<std::string>();
  r.entry_name = j.at("entry_name").get<std::string>();
  r.samples = j.at("samples").get<int>();
  r.max_violation = j.at("max_violation").get<double>();
  r.tol = j.at("tol").get<double>();
  r.passed = j.at("passed").get<bool>();
  for (const auto& d : j.at("details"))
    r.details.push_back({d.at("where").get<std::string>(), d.at("point").get<std::vector<double>>(),
                         d.at("value").get<double>()});
  return r;
}

CheckReport check_duality_pairing(const CatalogEntry& entry, int n_paths, std::uint64_t seed) {
  if (!entry.riemannian()) throw Error(ErrorCode::BadSignature, entry.name + " is not Riemannian");
  const auto& m = entry.manifold;
  const auto paths = random_paths(entry.region, n_paths, seed);
  auto samples = sample_all(paths, "path", [&](const std::vector<PathSegment>& path) {
    const Matrix p = transport_matrix(m, ConnectionKind::Weighted, path).value;
    const Matrix q = transport_matrix(m, ConnectionKind::DualWeighted, path).value;
    const Matrix h0 = weighted_metric_at(m, path.front().start());
    const Matrix h1 = weighted_metric_at(m, path.back().end());
    // Entry (j, i) is h(P e_i, P* e_j) - h(e_i, e_j).
    return std::pair{path.front().start(), max_abs(q.transpose() * h1 * p - h0)};
  });
  return assemble("duality_pairing", entry, kPairingTol, std::move(samples));
}

CheckReport check_dual_holonomy(const CatalogEntry& entry, int n_loops, std::uint64_t seed) {
  const auto& m = entry.manifold;
  const auto loops = random_rectangle_loops(m, entry.region, n_loops, seed, entry.basepoint);
  const Matrix H = weighted_metric_at(m, entry.basepoint);
  auto samples = sample_all(loops, "loop", [&](const Loop& loop) {
    const Matrix p = holonomy(m, ConnectionKind::Weighted, loop).matrix;
    const Matrix q = holonomy(m, ConnectionKind::DualWeighted, loop).matrix;
    const Matrix predicted = H.partialPivLu().solve(p.transpose().partialPivLu().inverse() * H);
    return std::pair{loop.basepoint(), max_abs(q - predicted)};
  });
  return assemble("dual_holonomy", entry, kHolonomyTol, std::move(samples));
}

CheckReport check_dual_vector_fields(const CatalogEntry& entry, int n_paths, std::uint64_t seed) {
  const auto& m = entry.manifold;
  const auto paths = random_paths(entry.region, n_paths, seed);
  auto samples = sample_all(paths, "path", [&](const std::vector<PathSegment>& path) {
    const Matrix p = transport_matrix(m, ConnectionKind::Weighted, path).value;
    const Matrix c = covector_transport_matrix(m, ConnectionKind::DualWeighted, path).value;
    const Matrix h0 = weighted_metric_at(m, path.front().start());
    const Matrix h1 = weighted_metric_at(m, path.back().end());
    // Column i compares the transported h(e_i, .) with h(P e_i, .).
    return std::pair{path.front().start(), max_abs(c * h0 - h1 * p)};
  });
  return assemble("dual_vector_fields", entry, kVectorFieldTol, std::move(samples));
}

CheckReport check_codazzi(const CatalogEntry& entry, int n_points, std::uint64_t seed) {
  const auto& m = entry.manifold;
  const BilinearField h = weighted_metric_field(m);
  const auto points = random_points(entry.region, n_points, seed);
  auto samples = sample_all(points, "point", [&](const Vector& x) {
    const Tensor3 t = covariant_derivative_of_tensor(m, ConnectionKind::Weighted, h, x);
    const Tensor3 s = covariant_derivative_of_tensor(m, ConnectionKind::DualWeighted, h, x);
    const Tensor3 d = amari_chentsov(m, x);
    const int n = m.dim();
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          v = std::max(v, std::abs(t(i, j, k) - t(j, i, k)));
          v = std::max(v, std::abs(t(i, j, k) - t(k, j, i)));
          v = std::max(v, std::abs(t(i, j, k) - d(i, j, k)));
          v = std::max(v, std::abs(s(i, j, k) + d(i, j, k)));
        }
    return std::pair{x, v};
  });
  return assemble("codazzi", entry, kCodazziTol, std::move(samples));
}

CheckReport check_projective_equivalence(const CatalogEntry& entry, int n_points, std::uint64_t seed) {
  if (!entry.companion) throw Error(ErrorCode::InvalidArgument, entry.name + " has no companion metric");
  const auto points = random_points(entry.region, n_points, seed);
  auto samples = sample_all(points, "point", [&](const Vector& x) {
    const Tensor3 lc = christoffel(*entry.companion, ConnectionKind::LeviCivita, x).gamma;
    const Tensor3 w = christoffel(entry.manifold, ConnectionKind::Weighted, x).gamma;
    return std::pair{x, lc.max_abs_diff(w)};
  });
  return assemble("projective_equivalence", entry, kProjectiveTol, std::move(samples));
}

CheckReport check_totally_geodesic_blocks(const CatalogEntry& entry, const GeodesicSlice& slice) {
  const auto& m = entry.manifold;
  auto samples = sample_all(slice.loops, "loop", [&](const Loop& loop) {
    require_totally_geodesic(m, slice.spec, loop);
    const BlockTransport b = predicted_block_transport(m, slice.spec, loop);
    const Matrix full = holonomy(m, ConnectionKind::Weighted, loop).matrix;
    double v = max_abs(b.predicted - full);
    if (slice.coupling_vanishes) v = std::max(v, max_abs(b.x_sigma));
    return std::pair{loop.basepoint(), v};
  });
  return assemble("totally_geodesic_blocks", entry, kBlockTol, std::move(samples));
}

CheckReport check_unimodularity(const CatalogEntry& entry, int n_loops, std::uint64_t seed) {
  const auto& m = entry.manifold;
  const auto loops = random_rectangle_loops(m, entry.region, n_loops, seed, entry.basepoint);
  auto samples = sample_all(loops, "loop", [&](const Loop& loop) {
    return std::pair{loop.basepoint(), std::abs(holonomy(m, ConnectionKind::Weighted, loop).matrix.determinant() - 1.0)};
  });
  return assemble("unimodularity", entry, kDetTol, std::move(samples));
}

std::vector<std::string> check_names() {
  return {"codazzi",        "dual_holonomy",          "dual_vector_fields", "duality_pairing",
          "projective_equivalence", "totally_geodesic_blocks", "unimodularity"};
}

std::vector<CheckReport> run_checks(const std::vector<CatalogEntry>& entries, const SuiteOptions& opts) {
  const auto known = check_names();
  for (const auto& c : opts.checks)
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw Error(ErrorCode::ConfigError, "unknown check '" + c + "'");
  auto selected = [&](const std::string& c) {
    return opts.checks.empty() || std::find(opts.checks.begin(), opts.checks.end(), c) != opts.checks.end();
  };

  std::vector<std::function<CheckReport()>> jobs;
  for (const auto& e : entries) {
    const CatalogEntry* p = &e;
    if (selected("codazzi")) jobs.push_back([=] { return check_codazzi(*p, opts.points, opts.seed); });
    if (selected("dual_holonomy")) jobs.push_back([=] { return check_dual_holonomy(*p, opts.loops, opts.seed); });
    if (selected("dual_vector_fields"))
      jobs.push_back([=] { return check_dual_vector_fields(*p, opts.paths, opts.seed); });
    if (selected("duality_pairing") && e.riemannian())
      jobs.push_back([=] { return check_duality_pairing(*p, opts.paths, opts.seed); });
    if (selected("projective_equivalence") && e.companion)
      jobs.push_back([=] { return check_projective_equivalence(*p, opts.points, opts.seed); });
    if (selected("totally_geodesic_blocks"))
      for (const auto& s : e.slices) jobs.push_back([=, &s] { return check_totally_geodesic_blocks(*p, s); });
    if (selected("unimodularity")) jobs.push_back([=] { return check_unimodularity(*p, opts.loops, opts.seed); });
  }
  // Checks already fan out over samples; run the jobs themselves in order.
  std::vector<CheckReport> out;
  for (const auto& job : jobs) {
    CheckReport r = job();
    r.tol *= opts.tol_scale;
    r.passed = r.max_violation <= r.tol;
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const CheckReport& a, const CheckReport& b) {
    return std::tie(a.check_name, a.entry_name) < std::tie(b.check_name, b.entry_name);
  });
  return out;
}

std::vector<CatalogEntry> default_suite_entries() {
  std::vector<CatalogEntry> out;
  for (const auto& name : catalog_names()) out.push_back(make_entry(name));
  for (std::uint64_t seed : {1, 2, 3}) out.push_back(random_levi_civita_family(3, seed));
  return out;
}

}  // namespace hololab
