#pragma once

#include "hololab/dual.hpp"
#include "hololab/error.hpp"
#include "hololab/tensor.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hololab {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v > lo && v < hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

class CoordinateChart {
 public:
  CoordinateChart(std::vector<std::string> names, std::vector<Interval> domain,
                  std::vector<std::optional<double>> periods = {});

  int dim() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Interval& domain(int i) const { return domain_[static_cast<std::size_t>(i)]; }
  const std::optional<double>& period(int i) const { return periods_[static_cast<std::size_t>(i)]; }

  /// Periodic coordinates are unconstrained; the others must lie in their open interval.
  bool contains(const Vector& x) const;
  void require_contains(const Vector& x) const;

  /// True when a and b differ by an integer multiple of the period in every
  /// periodic coordinate and agree elsewhere, to `tol`.
  bool same_point(const Vector& a, const Vector& b, double tol = 1e-12) const;

  /// Default validation lattice: three interior points per coordinate.
  std::vector<Vector> sample_grid() const;

 private:
  std::vector<std::string> names_;
  std::vector<Interval> domain_;
  std::vector<std::optional<double>> periods_;
};

struct Signature {
  int positive = 0;
  int negative = 0;

  int dim() const { return positive + negative; }
  bool riemannian() const { return negative == 0; }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Counts eigenvalue signs of a symmetric matrix.
Signature signature_of(const Matrix& symmetric, double zero_tol = 1e-12);

enum class DerivativeMode { Analytic, FiniteDifference };

/// Value and partials of a matrix field at a point. d[i] = d_i M,
/// dd[i*n+j] = d_i d_j M (only filled for order 2).
struct MatrixJet {
  Matrix value;
  std::vector<Matrix> d;
  std::vector<Matrix> dd;

  const Matrix& second(int i, int j) const {
    return dd[static_cast<std::size_t>(i) * d.size() + static_cast<std::size_t>(j)];
  }
};

struct ScalarJet {
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

struct FiniteDifferenceSteps {
  double first = 1e-5;
  double second = 1e-4;
};

using MatrixJetFn = std::function<MatrixJet(const Vector&, int order)>;
using ScalarJetFn = std::function<ScalarJet(const Vector&, int order)>;

namespace detail {

// Evaluates a generic callable f(const std::vector<T>&) -> std::vector<T>
// (row-major n x n entries) with nested dual numbers to the requested order.
template <class F>
MatrixJet matrix_jet(const F& f, int n, const Vector& x, int order, bool diagonal) {
  auto to_matrix = [&](const auto& entries, auto&& pick) {
    Matrix m = Matrix::Zero(n, n);
    if (diagonal) {
      for (int i = 0; i < n; ++i) m(i, i) = pick(entries[static_cast<std::size_t>(i)]);
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = pick(entries[static_cast<std::size_t>(i * n + j)]);
    }
    return m;
  };
  MatrixJet jet;
  if (order == 0) {
    std::vector<double> xs(x.data(), x.data() + n);
    jet.value = to_matrix(f(xs), [](double v) { return v; });
    return jet;
  }
  jet.d.resize(static_cast<std::size_t>(n));
  if (order == 1) {
    using D = Dual<double>;
    std::vector<D> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = D(x[k], k == i ? 1.0 : 0.0);
      auto out = f(xs);
      if (i == 0) jet.value = to_matrix(out, [](const D& v) { return v.val; });
      jet.d[static_cast<std::size_t>(i)] = to_matrix(out, [](const D& v) { return v.eps; });
    }
    return jet;
  }
  using D2 = Dual<Dual<double>>;
  jet.dd.resize(static_cast<std::size_t>(n) * n);
  std::vector<D2> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = 0; k < n; ++k)
        xs[static_cast<std::size_t>(k)] =
            D2(Dual<double>(x[k], k == j ? 1.0 : 0.0), Dual<double>(k == i ? 1.0 : 0.0, 0.0));
      auto out = f(xs);
      if (i == 0 && j == 0) jet.value = to_matrix(out, [](const D2& v) { return v.val.val; });
      if (i == j) jet.d[static_cast<std::size_t>(i)] = to_matrix(out, [](const D2& v) { return v.eps.val; });
      Matrix h = to_matrix(out, [](const D2& v) { return v.eps.eps; });
      jet.dd[static_cast<std::size_t>(i * n + j)] = h;
      jet.dd[static_cast<std::size_t>(j * n + i)] = h;
    }
  }
  return jet;
}

template <class F>
ScalarJet scalar_jet(const F& f, int n, const Vector& x, int order) {
  ScalarJet jet;
  if (order == 0) {
    std::vector<double> xs(x.data(), x.data() + n);
    jet.value = f(xs);
    return jet;
  }
  jet.grad = Vector::Zero(n);
  if (order == 1) {
    using D = Dual<double>;
    std::vector<D> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = D(x[k], k == i ? 1.0 : 0.0);
      D out = f(xs);
      jet.value = out.val;
      jet.grad[i] = out.eps;
    }
    return jet;
  }
  using D2 = Dual<Dual<double>>;
  jet.hess = Matrix::Zero(n, n);
  std::vector<D2> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = 0; k < n; ++k)
        xs[static_cast<std::size_t>(k)] =
            D2(Dual<double>(x[k], k == j ? 1.0 : 0.0), Dual<double>(k == i ? 1.0 : 0.0, 0.0));
      D2 out = f(xs);
      jet.value = out.val.val;
      if (i == j) jet.grad[i] = out.eps.val;
      jet.hess(i, j) = jet.hess(j, i) = out.eps.eps;
    }
  }
  return jet;
}

}  // namespace detail

/// Matrix-valued field with partial derivatives, e.g. a metric or e^{-phi} g.
class BilinearField {
 public:
  BilinearField() = default;
  BilinearField(int dim, DerivativeMode mode, MatrixJetFn jet)
      : dim_(dim), mode_(mode), jet_(std::move(jet)) {}

  /// `f` is generic over the scalar type and returns n*n row-major entries.
  template <class F>
  static BilinearField analytic(int n, F f) {
    return BilinearField(n, DerivativeMode::Analytic, [f, n](const Vector& x, int order) {
      return detail::matrix_jet(f, n, x, order, false);
    });
  }

  /// `f` returns the n diagonal entries.
  template <class F>
  static BilinearField analytic_diagonal(int n, F f) {
    return BilinearField(n, DerivativeMode::Analytic, [f, n](const Vector& x, int order) {
      return detail::matrix_jet(f, n, x, order, true);
    });
  }

  /// Central differences on a value-only callable.
  static BilinearField finite_difference(int n, std::function<Matrix(const Vector&)> f,
                                         FiniteDifferenceSteps steps = {});

  int dim() const noexcept { return dim_; }
  DerivativeMode mode() const noexcept { return mode_; }
  Matrix value(const Vector& x) const { return jet_(x, 0).value; }
  MatrixJet jet(const Vector& x, int order) const { return jet_(x, order); }

  /// Same field with derivatives taken by central differences of its values.
  BilinearField as_finite_difference(FiniteDifferenceSteps steps = {}) const;

 private:
  int dim_ = 0;
  DerivativeMode mode_ = DerivativeMode::Analytic;
  MatrixJetFn jet_;
};

class DensityField {
 public:
  DensityField() = default;
  DensityField(int dim, DerivativeMode mode, ScalarJetFn jet)
      : dim_(dim), mode_(mode), jet_(std::move(jet)) {}

  template <class F>
  static DensityField analytic(int n, F f) {
    return DensityField(n, DerivativeMode::Analytic, [f, n](const Vector& x, int order) {
      return detail::scalar_jet(f, n, x, order);
    });
  }

  static DensityField constant(int n, double c);
  static DensityField finite_difference(int n, std::function<double(const Vector&)> f,
                                        FiniteDifferenceSteps steps = {});

  int dim() const noexcept { return dim_; }
  DerivativeMode mode() const noexcept { return mode_; }
  double value(const Vector& x) const { return jet_(x, 0).value; }
  Vector gradient(const Vector& x) const { return jet_(x, 1).grad; }
  ScalarJet jet(const Vector& x, int order) const { return jet_(x, order); }

  DensityField as_finite_difference(FiniteDifferenceSteps steps = {}) const;

 private:
  int dim_ = 0;
  DerivativeMode mode_ = DerivativeMode::Analytic;
  ScalarJetFn jet_;
};

class MetricField {
 public:
  MetricField() = default;
  MetricField(BilinearField field, Signature signature)
      : field_(std::move(field)), signature_(signature) {}

  int dim() const noexcept { return field_.dim(); }
  const Signature& signature() const noexcept { return signature_; }
  DerivativeMode mode() const noexcept { return field_.mode(); }
  const BilinearField& field() const noexcept { return field_; }
  Matrix value(const Vector& x) const { return field_.value(x); }
  MatrixJet jet(const Vector& x, int order) const { return field_.jet(x, order); }

 private:
  BilinearField field_;
  Signature signature_;
};

/// The triple (chart, g, phi). Construction validates symmetry, invertibility
/// and the declared signature on the chart's sample grid (or `samples`).
class WeightedManifold {
 public:
  WeightedManifold(CoordinateChart chart, MetricField metric, DensityField density,
                   std::optional<std::vector<Vector>> samples = std::nullopt);

  int dim() const noexcept { return chart_.dim(); }
  const CoordinateChart& chart() const noexcept { return chart_; }
  const MetricField& metric() const noexcept { return metric_; }
  const DensityField& density() const noexcept { return density_; }

  /// Same chart and fields with every derivative taken by finite differences.
  WeightedManifold with_finite_differences(FiniteDifferenceSteps steps = {}) const;

 private:
  CoordinateChart chart_;
  MetricField metric_;
  DensityField density_;
};

enum class ConnectionKind { LeviCivita, Weighted, DualWeighted };

std::string_view to_string(ConnectionKind kind);
ConnectionKind connection_kind_from_string(std::string_view name);

struct ConnectionCoefficients {
  Tensor3 gamma;  // gamma(k, i, j) = Gamma^k_ij
  Vector point;

  double operator()(int k, int i, int j) const { return gamma(k, i, j); }
};

Matrix metric_at(const WeightedManifold& m, const Vector& x);
Matrix weighted_metric_at(const WeightedManifold& m, const Vector& x);
Matrix conformal_metric_at(const WeightedManifold& m, const Vector& x);
Vector dphi_at(const WeightedManifold& m, const Vector& x);

/// e^{-phi} g as a field with derivatives in the metric's mode.
BilinearField weighted_metric_field(const WeightedManifold& m);

ConnectionCoefficients christoffel(const WeightedManifold& m, ConnectionKind kind, const Vector& x);

/// Coefficients together with their first partials, dgamma[m](k,i,j) = d_m Gamma^k_ij.
struct ChristoffelJet {
  Tensor3 gamma;
  std::vector<Tensor3> dgamma;
};

ChristoffelJet christoffel_jet(const WeightedManifold& m, ConnectionKind kind, const Vector& x);

/// Connection matrix along a velocity: A(k, j) = Gamma^k_ij v^i.
Matrix connection_matrix(const WeightedManifold& m, ConnectionKind kind, const Vector& x,
                         const Vector& velocity);

/// D(i,j,k) = dphi_i h_jk + dphi_j h_ki + dphi_k h_ij with h = e^{-phi} g.
Tensor3 amari_chentsov(const WeightedManifold& m, const Vector& x);

/// (nabla_i T)_{jk} stored as (i, j, k).
Tensor3 covariant_derivative_of_tensor(const WeightedManifold& m, ConnectionKind kind,
                                       const BilinearField& t, const Vector& x);

/// R(l, i, j, k) = R^l_{ijk}.
Tensor4 curvature_at(const WeightedManifold& m, ConnectionKind kind, const Vector& x);

/// Ric(j, k) = R^i_{ijk}.
Matrix ricci_at(const WeightedManifold& m, ConnectionKind kind, const Vector& x);

}  // namespace hololab
