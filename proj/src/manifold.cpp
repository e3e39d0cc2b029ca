#include "hololab/manifold.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace hololab {

namespace {

std::string describe(const Vector& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

std::vector<double> axis_samples(const Interval& dom, const std::optional<double>& period) {
  if (period) return {0.0, *period / 3.0, 2.0 * *period / 3.0};
  const bool lo = std::isfinite(dom.lo);
  const bool hi = std::isfinite(dom.hi);
  if (lo && hi) {
    const double w = dom.hi - dom.lo;
    return {dom.lo + 0.25 * w, dom.lo + 0.5 * w, dom.lo + 0.75 * w};
  }
  if (lo) return {dom.lo + 0.5, dom.lo + 1.0, dom.lo + 2.0};
  if (hi) return {dom.hi - 2.0, dom.hi - 1.0, dom.hi - 0.5};
  return {-1.0, 0.0, 1.0};
}

Matrix inverse_checked(const Matrix& g, const Vector& x) {
  const double det = g.determinant();
  if (!(std::abs(det) > 1e-10))
    throw Error(ErrorCode::SingularMetric, "|det g| <= 1e-10 at " + describe(x));
  return g.partialPivLu().inverse();
}

}  // namespace

// ---------------------------------------------------------------------------
// CoordinateChart

CoordinateChart::CoordinateChart(std::vector<std::string> names, std::vector<Interval> domain,
                                 std::vector<std::optional<double>> periods)
    : names_(std::move(names)), domain_(std::move(domain)), periods_(std::move(periods)) {
  if (names_.empty()) throw Error(ErrorCode::BadDimension, "chart needs at least one coordinate");
  if (domain_.empty()) domain_.resize(names_.size());
  if (periods_.empty()) periods_.resize(names_.size());
  if (domain_.size() != names_.size() || periods_.size() != names_.size())
    throw Error(ErrorCode::BadDimension, "chart field lengths differ");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (periods_[i] && !(*periods_[i] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "period of " + names_[i] + " must be positive");
    if (!periods_[i] && !(domain_[i].lo < domain_[i].hi))
      throw Error(ErrorCode::InvalidArgument, "empty domain for " + names_[i]);
  }
}

bool CoordinateChart::contains(const Vector& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (!periods_[static_cast<std::size_t>(i)] && !domain(i).contains(x[i])) return false;
  }
  return true;
}

void CoordinateChart::require_contains(const Vector& x) const {
  if (x.size() != dim())
    throw Error(ErrorCode::ShapeMismatch, "point has " + std::to_string(x.size()) + " coordinates");
  if (!contains(x)) throw Error(ErrorCode::OutOfDomain, "point " + describe(x) + " outside chart");
}

bool CoordinateChart::same_point(const Vector& a, const Vector& b, double tol) const {
  if (a.size() != dim() || b.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    double diff = a[i] - b[i];
    if (const auto& p = periods_[static_cast<std::size_t>(i)]) diff -= *p * std::round(diff / *p);
    if (std::abs(diff) > tol) return false;
  }
  return true;
}

std::vector<Vector> CoordinateChart::sample_grid() const {
  std::vector<std::vector<double>> axes;
  for (int i = 0; i < dim(); ++i) axes.push_back(axis_samples(domain(i), period(i)));
  std::vector<Vector> grid;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Vector p(dim());
    for (int i = 0; i < dim(); ++i) p[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    grid.push_back(p);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == axes[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return grid;
}

Signature signature_of(const Matrix& symmetric, double zero_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (symmetric + symmetric.transpose()),
                                           Eigen::EigenvaluesOnly);
  Signature s;
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (ev > zero_tol * scale) ++s.positive;
    else if (ev < -zero_tol * scale) ++s.negative;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Fields

BilinearField BilinearField::finite_difference(int n, std::function<Matrix(const Vector&)> f,
                                               FiniteDifferenceSteps steps) {
  return BilinearField(n, DerivativeMode::FiniteDifference, [f = std::move(f), n, steps](const Vector& x, int order) {
    MatrixJet jet;
    jet.value = f(x);
    if (order < 1) return jet;
    const double h = steps.first;
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      jet.d.push_back((f(xp) - f(xm)) / (2.0 * h));
    }
    if (order < 2) return jet;
    const double H = steps.second;
    jet.dd.assign(static_cast<std::size_t>(n) * n, Matrix());
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Matrix value;
        if (i == j) {
          Vector xp = x, xm = x;
          xp[i] += H;
          xm[i] -= H;
          value = (f(xp) - 2.0 * jet.value + f(xm)) / (H * H);
        } else {
          Vector pp = x, pm = x, mp = x, mm = x;
          pp[i] += H; pp[j] += H;
          pm[i] += H; pm[j] -= H;
          mp[i] -= H; mp[j] += H;
          mm[i] -= H; mm[j] -= H;
          value = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * H * H);
        }
        jet.dd[static_cast<std::size_t>(i * n + j)] = value;
        jet.dd[static_cast<std::size_t>(j * n + i)] = value;
      }
    }
    return jet;
  });
}

BilinearField BilinearField::as_finite_difference(FiniteDifferenceSteps steps) const {
  auto jet = jet_;
  return finite_difference(dim_, [jet](const Vector& x) { return jet(x, 0).value; }, steps);
}

DensityField DensityField::constant(int n, double c) {
  return DensityField(n, DerivativeMode::Analytic, [n, c](const Vector&, int order) {
    ScalarJet jet;
    jet.value = c;
    if (order >= 1) jet.grad = Vector::Zero(n);
    if (order >= 2) jet.hess = Matrix::Zero(n, n);
    return jet;
  });
}

DensityField DensityField::finite_difference(int n, std::function<double(const Vector&)> f,
                                             FiniteDifferenceSteps steps) {
  return DensityField(n, DerivativeMode::FiniteDifference, [f = std::move(f), n, steps](const Vector& x, int order) {
    ScalarJet jet;
    jet.value = f(x);
    if (order < 1) return jet;
    const double h = steps.first;
    jet.grad = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      jet.grad[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    if (order < 2) return jet;
    const double H = steps.second;
    jet.hess = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double value;
        if (i == j) {
          Vector xp = x, xm = x;
          xp[i] += H;
          xm[i] -= H;
          value = (f(xp) - 2.0 * jet.value + f(xm)) / (H * H);
        } else {
          Vector pp = x, pm = x, mp = x, mm = x;
          pp[i] += H; pp[j] += H;
          pm[i] += H; pm[j] -= H;
          mp[i] -= H; mp[j] += H;
          mm[i] -= H; mm[j] -= H;
          value = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * H * H);
        }
        jet.hess(i, j) = jet.hess(j, i) = value;
      }
    }
    return jet;
  });
}

DensityField DensityField::as_finite_difference(FiniteDifferenceSteps steps) const {
  auto jet = jet_;
  return finite_difference(dim_, [jet](const Vector& x) { return jet(x, 0).value; }, steps);
}

// ---------------------------------------------------------------------------
// WeightedManifold

WeightedManifold::WeightedManifold(CoordinateChart chart, MetricField metric, DensityField density,
                                   std::optional<std::vector<Vector>> samples)
    : chart_(std::move(chart)), metric_(std::move(metric)), density_(std::move(density)) {
  const int n = chart_.dim();
  if (metric_.dim() != n || density_.dim() != n)
    throw Error(ErrorCode::BadDimension, "chart, metric and density dimensions differ");
  if (metric_.signature().dim() != n)
    throw Error(ErrorCode::BadSignature, "declared signature does not sum to the dimension");
  const std::vector<Vector> grid = samples ? *samples : chart_.sample_grid();
  for (const Vector& x : grid) {
    const Matrix g = metric_.value(x);
    if (g.rows() != n || g.cols() != n) throw Error(ErrorCode::ShapeMismatch, "metric is not n x n");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::InvalidArgument, "metric not symmetric at " + describe(x));
    if (!(std::abs(g.determinant()) > 1e-10))
      throw Error(ErrorCode::SingularMetric, "|det g| <= 1e-10 at " + describe(x));
    if (signature_of(g) != metric_.signature())
      throw Error(ErrorCode::BadSignature, "eigenvalue signs disagree with declared signature at " + describe(x));
    if (!std::isfinite(density_.value(x)))
      throw Error(ErrorCode::DomainError, "density not finite at " + describe(x));
  }
}

WeightedManifold WeightedManifold::with_finite_differences(FiniteDifferenceSteps steps) const {
  return WeightedManifold(chart_, MetricField(metric_.field().as_finite_difference(steps), metric_.signature()),
                          density_.as_finite_difference(steps), std::vector<Vector>{});
}

std::string_view to_string(ConnectionKind kind) {
  switch (kind) {
    case ConnectionKind::LeviCivita: return "levi_civita";
    case ConnectionKind::Weighted: return "weighted";
    case ConnectionKind::DualWeighted: return "dual_weighted";
  }
  return "?";
}

ConnectionKind connection_kind_from_string(std::string_view name) {
  if (name == "levi_civita" || name == "LeviCivita") return ConnectionKind::LeviCivita;
  if (name == "weighted" || name == "Weighted") return ConnectionKind::Weighted;
  if (name == "dual_weighted" || name == "DualWeighted") return ConnectionKind::DualWeighted;
  throw Error(ErrorCode::ConfigError, "unknown connection kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Pointwise quantities

Matrix metric_at(const WeightedManifold& m, const Vector& x) {
  m.chart().require_contains(x);
  return m.metric().value(x);
}

Matrix weighted_metric_at(const WeightedManifold& m, const Vector& x) {
  m.chart().require_contains(x);
  return std::exp(-m.density().value(x)) * m.metric().value(x);
}

Matrix conformal_metric_at(const WeightedManifold& m, const Vector& x) {
  m.chart().require_contains(x);
  return std::exp(-2.0 * m.density().value(x)) * m.metric().value(x);
}

Vector dphi_at(const WeightedManifold& m, const Vector& x) {
  m.chart().require_contains(x);
  return m.density().gradient(x);
}

BilinearField weighted_metric_field(const WeightedManifold& m) {
  const MetricField metric = m.metric();
  const DensityField density = m.density();
  const int n = m.dim();
  return BilinearField(n, metric.mode(), [metric, density, n](const Vector& x, int order) {
    const MatrixJet g = metric.jet(x, order);
    const ScalarJet phi = density.jet(x, order);
    const double w = std::exp(-phi.value);
    MatrixJet h;
    h.value = w * g.value;
    if (order < 1) return h;
    for (int i = 0; i < n; ++i) h.d.push_back(w * (g.d[static_cast<std::size_t>(i)] - phi.grad[i] * g.value));
    if (order < 2) return h;
    h.dd.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        h.dd[static_cast<std::size_t>(i * n + j)] =
            w * (g.second(i, j) - phi.grad[i] * g.d[static_cast<std::size_t>(j)] -
                 phi.grad[j] * g.d[static_cast<std::size_t>(i)] +
                 (phi.grad[i] * phi.grad[j] - phi.hess(i, j)) * g.value);
    return h;
  });
}

namespace {

// Gamma^k_ij from the metric jet and the density gradient.
Tensor3 coefficients(int n, ConnectionKind kind, const Matrix& g, const Matrix& ginv,
                     const std::vector<Matrix>& dg, const Vector& dphi) {
  Tensor3 first(n);  // first(i, j, l) = [ij, l]
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        first(i, j, l) = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                dg[static_cast<std::size_t>(l)](i, j));
  Tensor3 gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ginv(k, l) * first(i, j, l);
        gamma(k, i, j) = s;
      }
  if (kind == ConnectionKind::Weighted) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        gamma(j, i, j) -= dphi[i];
        gamma(i, i, j) -= dphi[j];
      }
  } else if (kind == ConnectionKind::DualWeighted) {
    const Vector grad = ginv * dphi;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gamma(k, i, j) += g(i, j) * grad[k];
  }
  return gamma;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

ConnectionCoefficients christoffel(const WeightedManifold& m, ConnectionKind kind, const Vector& x) {
  m.chart().require_contains(x);
  const int n = m.dim();
  MatrixJet jet = m.metric().jet(x, 1);
  jet.value = symmetrized(jet.value);
  for (auto& d : jet.d) d = symmetrized(d);
  const Matrix ginv = inverse_checked(jet.value, x);
  Vector dphi = kind == ConnectionKind::LeviCivita ? Vector::Zero(n) : m.density().gradient(x);
  return {coefficients(n, kind, jet.value, ginv, jet.d, dphi), x};
}

ChristoffelJet christoffel_jet(const WeightedManifold& m, ConnectionKind kind, const Vector& x) {
  m.chart().require_contains(x);
  const int n = m.dim();
  const std::size_t un = static_cast<std::size_t>(n);
  MatrixJet jet = m.metric().jet(x, 2);
  jet.value = symmetrized(jet.value);
  for (auto& d : jet.d) d = symmetrized(d);
  for (auto& d : jet.dd) d = symmetrized(d);
  const Matrix ginv = inverse_checked(jet.value, x);
  ScalarJet phi;
  if (kind == ConnectionKind::LeviCivita) {
    phi.grad = Vector::Zero(n);
    phi.hess = Matrix::Zero(n, n);
  } else {
    phi = m.density().jet(x, 2);
  }

  ChristoffelJet out;
  out.gamma = coefficients(n, kind, jet.value, ginv, jet.d, phi.grad);

  Tensor3 first(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        first(i, j, l) = 0.5 * (jet.d[static_cast<std::size_t>(i)](j, l) + jet.d[static_cast<std::size_t>(j)](i, l) -
                                jet.d[static_cast<std::size_t>(l)](i, j));
  const Vector grad = ginv * phi.grad;

  for (int mu = 0; mu < n; ++mu) {
    const Matrix dginv = -ginv * jet.d[static_cast<std::size_t>(mu)] * ginv;
    Tensor3 dfirst(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          dfirst(i, j, l) = 0.5 * (jet.second(mu, i)(j, l) + jet.second(mu, j)(i, l) - jet.second(mu, l)(i, j));
    Tensor3 dg(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += dginv(k, l) * first(i, j, l) + ginv(k, l) * dfirst(i, j, l);
          dg(k, i, j) = s;
        }
    if (kind == ConnectionKind::Weighted) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          dg(j, i, j) -= phi.hess(mu, i);
          dg(i, i, j) -= phi.hess(mu, j);
        }
    } else if (kind == ConnectionKind::DualWeighted) {
      const Vector dgrad = dginv * phi.grad + ginv * phi.hess.col(mu);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            dg(k, i, j) += jet.d[static_cast<std::size_t>(mu)](i, j) * grad[k] + jet.value(i, j) * dgrad[k];
    }
    out.dgamma.push_back(std::move(dg));
  }
  (void)un;
  return out;
}

Matrix connection_matrix(const WeightedManifold& m, ConnectionKind kind, const Vector& x,
                         const Vector& velocity) {
  const int n = m.dim();
  const ConnectionCoefficients c = christoffel(m, kind, x);
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c.gamma(k, i, j) * velocity[i];
      a(k, j) = s;
    }
  return a;
}

Tensor3 amari_chentsov(const WeightedManifold& m, const Vector& x) {
  const int n = m.dim();
  const Matrix h = weighted_metric_at(m, x);
  const Vector dphi = m.density().gradient(x);
  Tensor3 d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) d(i, j, k) = dphi[i] * h(j, k) + dphi[j] * h(k, i) + dphi[k] * h(i, j);
  return d;
}

Tensor3 covariant_derivative_of_tensor(const WeightedManifold& m, ConnectionKind kind,
                                       const BilinearField& t, const Vector& x) {
  const int n = m.dim();
  if (t.dim() != n) throw Error(ErrorCode::ShapeMismatch, "tensor field dimension differs from manifold");
  const ConnectionCoefficients c = christoffel(m, kind, x);
  const MatrixJet tj = t.jet(x, 1);
  Tensor3 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = tj.d[static_cast<std::size_t>(i)](j, k);
        for (int mu = 0; mu < n; ++mu) s -= c.gamma(mu, i, j) * tj.value(mu, k) + c.gamma(mu, i, k) * tj.value(j, mu);
        out(i, j, k) = s;
      }
  return out;
}

Tensor4 curvature_at(const WeightedManifold& m, ConnectionKind kind, const Vector& x) {
  const int n = m.dim();
  const ChristoffelJet cj = christoffel_jet(m, kind, x);
  const Tensor3& g = cj.gamma;
  Tensor4 r(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = cj.dgamma[static_cast<std::size_t>(i)](l, j, k) - cj.dgamma[static_cast<std::size_t>(j)](l, i, k);
          for (int mu = 0; mu < n; ++mu) s += g(l, i, mu) * g(mu, j, k) - g(l, j, mu) * g(mu, i, k);
          r(l, i, j, k) = s;
        }
  return r;
}

Matrix ricci_at(const WeightedManifold& m, ConnectionKind kind, const Vector& x) {
  const int n = m.dim();
  const Tensor4 r = curvature_at(m, kind, x);
  Matrix ric = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) ric(j, k) += r(i, i, j, k);
  return ric;
}

}  // namespace hololab
