#include "hololab/experiment.hpp"

#include "hololab/parallel.hpp"

#include <cmath>
#include <limits>

namespace hololab {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}  // namespace

double norm1(const Matrix& a) { return a.size() ? a.cwiseAbs().colwise().sum().maxCoeff() : 0.0; }

Matrix self_dual_image(const Matrix& a, const Matrix& dF, const Matrix& h) {
  const Matrix c = dF * a * dF.inverse();
  return -h.partialPivLu().solve(c.transpose() * h);
}

AlgebraResult algebra_experiment(const CatalogEntry& entry, ConnectionKind kind, std::uint64_t seed,
                                 const AlgebraOptions& opts, const std::vector<Loop>& extra_loops,
                                 const std::vector<LoopFamily>& extra_families) {
  const auto& m = entry.manifold;
  const int n = m.dim();
  const Matrix I = Matrix::Identity(n, n);

  std::vector<Loop> loops = random_rectangle_loops(m, entry.region, opts.random_loops, seed, entry.basepoint);
  loops.insert(loops.end(), extra_loops.begin(), extra_loops.end());
  const auto holonomies = parallel_map<std::pair<Matrix, double>>(loops.size(), [&](std::size_t i) {
    HolonomyElement h = holonomy(m, kind, loops[i], opts.integrator);
    return std::pair{std::move(h.matrix), h.est_error};
  });

  AlgebraResult r;
  r.loops_sampled = static_cast<int>(loops.size());
  for (std::size_t i = 0; i < holonomies.size(); ++i) {
    const Matrix& p = holonomies[i].first;
    r.max_det_deviation = std::max(r.max_det_deviation, std::abs(p.determinant() - 1.0));
    if (!(norm1(p - I) < opts.log_radius)) continue;
    // Near-identity holonomies are mostly rounding noise once normalized.
    const Matrix a = mat_log(p);
    const double noise = holonomies[i].second + 64.0 * kEps * norm1(p);
    if (!(noise < 0.1 * opts.rank_tol * a.norm())) continue;
    r.generators.push_back({"loop " + std::to_string(i), a});
    ++r.loops_used;
  }

  std::vector<LoopFamily> families = extra_families;
  if (opts.use_families) families.insert(families.begin(), entry.families.begin(), entry.families.end());
  const auto derivatives = parallel_map<std::pair<Matrix, double>>(families.size(), [&](std::size_t i) {
    FamilyDerivative d = family_derivative_estimate(m, kind, families[i], 1e-2, opts.integrator);
    return std::pair{std::move(d.value), d.est_error};
  });
  // Finite-difference residue in a family derivative must not pass for a new
  // direction, so the rank test runs at no less than the derivatives' own error.
  r.closure_tol = opts.rank_tol;
  for (std::size_t i = 0; i < derivatives.size(); ++i) {
    const auto& [d, err] = derivatives[i];
    r.generators.push_back({"family " + std::to_string(i), d});
    const double norm = d.norm();
    if (norm > 0.0) r.closure_tol = std::max(r.closure_tol, 10.0 * err / norm);
  }

  if (opts.use_self_duality && entry.self_duality && kind == ConnectionKind::Weighted) {
    const Matrix h = weighted_metric_at(m, entry.basepoint);
    const std::size_t count = r.generators.size();
    for (std::size_t i = 0; i < count; ++i)
      r.generators.push_back({"dual of " + r.generators[i].source,
                              self_dual_image(r.generators[i].element, *entry.self_duality, h)});
  }

  if (entry.companion) r.form = metric_at(*entry.companion, entry.basepoint);
  if (r.generators.empty()) {
    r.basis = LieAlgebraBasis(n, r.closure_tol);
  } else {
    std::vector<Matrix> elements;
    for (const auto& g : r.generators) elements.push_back(g.element);
    r.basis = closure(elements, n * n, r.closure_tol);
  }
  r.tag = classify(r.basis, r.form, opts.classify_tol);
  r.strictly_upper_triangular = r.basis.dim() > 0;
  for (const Matrix& a : r.basis.elements()) {
    r.max_trace = std::max(r.max_trace, std::abs(a.trace()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        if (std::abs(a(i, j)) > opts.classify_tol) r.strictly_upper_triangular = false;
  }
  return r;
}

}  // namespace hololab
