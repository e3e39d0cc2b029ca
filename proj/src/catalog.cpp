#include "hololab/catalog.hpp"

#include "hololab/liealg.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <regex>
#include <type_traits>

namespace hololab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class V>
using scalar_of = typename std::decay_t<V>::value_type;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

void set_sym(Tensor3& t, int k, int i, int j, double v) {
  t(k, i, j) = v;
  t(k, j, i) = v;
}

Matrix flatten(const Tensor3& t) {
  const int n = t.dim();
  Matrix m(n, n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(k, i * n + j) = t(k, i, j);
  return m;
}

Box cube(int n, double lo, double hi) { return {Vector::Constant(n, lo), Vector::Constant(n, hi)}; }

std::vector<Interval> intervals(const Box& b) {
  std::vector<Interval> out;
  for (Eigen::Index i = 0; i < b.lo.size(); ++i) out.push_back({b.lo[i], b.hi[i]});
  return out;
}

std::vector<std::string> coordinate_names(int n) {
  if (n == 2) return {"x", "y"};
  if (n == 3) return {"x", "y", "z"};
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

Vector chart_center(const CoordinateChart& chart) {
  Vector c(chart.dim());
  for (int i = 0; i < chart.dim(); ++i) {
    const Interval& d = chart.domain(i);
    if (chart.period(i)) c[i] = 0.0;
    else if (d.bounded()) c[i] = 0.5 * (d.lo + d.hi);
    else if (std::isfinite(d.lo)) c[i] = d.lo + 1.0;
    else if (std::isfinite(d.hi)) c[i] = d.hi - 1.0;
    else c[i] = 0.0;
  }
  return c;
}

Golden holonomy_golden(std::string label, const WeightedManifold& m, Loop loop, Matrix expected, double tol = 1e-6,
                       std::string note = {}) {
  return {std::move(label), [m, loop] { return holonomy(m, ConnectionKind::Weighted, loop).matrix; },
          std::move(expected), tol, false, std::move(note)};
}

Golden log_golden(std::string label, const WeightedManifold& m, Loop loop, Matrix expected, double tol = 1e-10) {
  return {std::move(label), [m, loop] { return mat_log(holonomy(m, ConnectionKind::Weighted, loop).matrix); },
          std::move(expected), tol, false, {}};
}

Golden path_golden(std::string label, const WeightedManifold& m, std::vector<PathSegment> path, Matrix expected,
                   double tol = 1e-6) {
  return {std::move(label), [m, path] { return transport_matrix(m, ConnectionKind::Weighted, path).value; },
          std::move(expected), tol, false, {}};
}

Golden ricci_golden(std::string label, const WeightedManifold& m, Vector x, Matrix expected, double tol = 1e-6) {
  return {std::move(label), [m, x] { return ricci_at(m, ConnectionKind::Weighted, x); }, std::move(expected), tol,
          false, {}};
}

Golden value_golden(std::string label, std::function<double()> f, double expected, double tol) {
  return {std::move(label), [f] { return scalar(f()); }, scalar(expected), tol, false, {}};
}

}  // namespace

double xi_constant() { return std::acos((1.0 - std::sqrt(5.0)) / 2.0); }

// ---------------------------------------------------------------------------
// Expression-built manifolds

WeightedManifold manifold_from_expressions(const ExpressionManifoldSpec& spec) {
  const int n = static_cast<int>(spec.names.size());
  if (n < 1) throw Error(ErrorCode::BadDimension, "manifold needs at least one coordinate");
  const bool diagonal = static_cast<int>(spec.metric.size()) == n;
  if (!diagonal && static_cast<int>(spec.metric.size()) != n * n)
    throw Error(ErrorCode::BadDimension, "metric needs n diagonal or n*n entries");
  std::vector<Expr> entries;
  for (const auto& src : spec.metric) entries.push_back(parse(src).bind(spec.names));
  const Expr phi = parse(spec.phi).bind(spec.names);

  CoordinateChart chart(spec.names, spec.domain, spec.periods);
  auto eval_entries = [entries](const auto& xs) {
    using T = scalar_of<decltype(xs)>;
    std::vector<T> out;
    out.reserve(entries.size());
    for (const Expr& e : entries) out.push_back(eval_at<T>(e, std::span<const T>(xs)));
    return out;
  };
  BilinearField g = diagonal ? BilinearField::analytic_diagonal(n, eval_entries) : BilinearField::analytic(n, eval_entries);
  DensityField density = DensityField::analytic(n, [phi](const auto& xs) {
    using T = scalar_of<decltype(xs)>;
    return eval_at<T>(phi, std::span<const T>(xs));
  });
  const Signature sig = spec.signature ? *spec.signature : signature_of(g.value(chart_center(chart)));
  return WeightedManifold(std::move(chart), MetricField(std::move(g), sig), std::move(density));
}

// ---------------------------------------------------------------------------
// Goldens

double golden_delta(const Matrix& expected, const Matrix& computed) {
  if (expected.rows() != computed.rows() || expected.cols() != computed.cols())
    return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (Eigen::Index i = 0; i < expected.rows(); ++i)
    for (Eigen::Index j = 0; j < expected.cols(); ++j)
      if (!std::isnan(expected(i, j))) {
        const double e = std::abs(expected(i, j) - computed(i, j));
        d = std::isnan(e) ? std::numeric_limits<double>::infinity() : std::max(d, e);
      }
  return d;
}

GoldenResult evaluate_golden(const Golden& g) {
  GoldenResult r{g.label, g.expected, {}, 0.0, g.tol, false, g.note};
  r.computed = g.compute();
  r.delta = golden_delta(g.expected, r.computed);
  double scale = 1.0;
  if (g.relative) {
    scale = 0.0;
    for (Eigen::Index i = 0; i < g.expected.size(); ++i)
      if (!std::isnan(g.expected.data()[i])) scale = std::max(scale, std::abs(g.expected.data()[i]));
  }
  r.tol = g.tol * scale;
  r.passed = r.delta <= r.tol;
  return r;
}

GoldenResult check_christoffel_table(const CatalogEntry& entry, int points, std::uint64_t seed) {
  if (!entry.christoffel_table) throw Error(ErrorCode::InvalidArgument, entry.name + " has no closed-form table");
  const int n = entry.manifold.dim();
  Rng rng(seed);
  GoldenResult r{"weighted Christoffel table, worst of " + std::to_string(points) + " points", {}, {}, 0.0, 1e-8, false, {}};
  for (int p = 0; p < points; ++p) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(entry.region.lo[i], entry.region.hi[i]);
    const Tensor3 expected = (*entry.christoffel_table)(x);
    const Tensor3 computed = christoffel(entry.manifold, ConnectionKind::Weighted, x).gamma;
    const double d = expected.max_abs_diff(computed);
    if (p == 0 || d > r.delta) {
      r.delta = d;
      r.expected = flatten(expected);
      r.computed = flatten(computed);
    }
  }
  r.passed = r.delta <= r.tol;
  return r;
}

// ---------------------------------------------------------------------------
// Spheres

CatalogEntry sphere_with_density(int n) {
  if (n < 2) throw Error(ErrorCode::BadDimension, "sphere needs n >= 2");
  std::vector<std::string> names{"r"};
  if (n == 2) names.push_back("theta");
  else
    for (int k = 1; k < n; ++k) names.push_back("theta" + std::to_string(k));
  const Interval band{0.05, kPi - 0.05};
  std::vector<Interval> domain(static_cast<std::size_t>(n), band);
  std::vector<std::optional<double>> periods(static_cast<std::size_t>(n));
  domain.back() = Interval{};
  periods.back() = 2.0 * kPi;

  auto metric = BilinearField::analytic_diagonal(n, [n](const auto& x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> d(static_cast<std::size_t>(n));
    d[0] = T(1.0);
    T w = sin(x[0]) * sin(x[0]);
    for (int k = 1; k < n; ++k) {
      d[static_cast<std::size_t>(k)] = w;
      w = w * sin(x[static_cast<std::size_t>(k)]) * sin(x[static_cast<std::size_t>(k)]);
    }
    return d;
  });
  auto phi = DensityField::analytic(n, [](const auto& x) { return cos(x[0]); });
  WeightedManifold m(CoordinateChart(names, domain, periods), MetricField(metric, {n, 0}), phi);

  CatalogEntry e(n == 2 ? "sphere2" : "sphereN(" + std::to_string(n) + ")", m);
  e.basepoint = Vector::Constant(n, kPi / 2);
  e.basepoint[n - 1] = 0.0;
  e.region = {e.basepoint.array() - 0.5, e.basepoint.array() + 0.5};

  ExpressionManifoldSpec ex{names, domain, periods, {"1"}, "cos(r)", Signature{n, 0}};
  std::string w = "sin(r)^2";
  for (int k = 1; k < n; ++k) {
    ex.metric.push_back(w);
    w += "*sin(" + names[static_cast<std::size_t>(k)] + ")^2";
  }
  e.expressions = ex;

  const double xi = xi_constant();
  e.goldens.push_back(value_golden("xi satisfies cot + sin = 0", [xi] { return 1.0 / std::tan(xi) + std::sin(xi); }, 0.0, 1e-12));
  e.goldens.push_back(value_golden("phi on the equator", [m, b = e.basepoint] { return m.density().value(b); }, 0.0, 1e-15));
  e.goldens.push_back({"metric on the equator", [m, b = e.basepoint] { return metric_at(m, b); },
                       Matrix::Identity(n, n), 1e-15, false, {}});
  if (n == 3) {
    const double h = kPi / 2;
    const Loop loop = Loop::polyline(
        {vec({h, h, 0}), vec({h + 0.4, h, 0}), vec({h + 0.4, h, 1}), vec({h, h, 1}), vec({h, h, 0})});
    e.slices.push_back({SliceSpec{{0, 2}, vec({h, h, 0})}, {loop}, true});
  }
  if (n != 2) return e;

  e.christoffel_table = [](const Vector& x) {
    Tensor3 t(2);
    const double r = x[0];
    t(0, 0, 0) = 2.0 * std::sin(r);
    set_sym(t, 1, 0, 1, 1.0 / std::tan(r) + std::sin(r));
    t(0, 1, 1) = -std::cos(r) * std::sin(r);
    return t;
  };
  e.region = {vec({0.3, -kPi}), vec({kPi - 0.3, kPi})};

  const double h = kPi / 2;
  LoopFamily alpha{[h](double s) {
                     return Loop::polyline({vec({h, 0}), vec({h + s, 0}), vec({h + s, 2 * kPi}), vec({h, 2 * kPi}), vec({h, 0})});
                   },
                   xi - h, true};
  LoopFamily beta{[h, xi](double s) {
                    return Loop::polyline({vec({h, 0}), vec({xi, 0}), vec({xi, s}), vec({h, s}), vec({h, 0})});
                  },
                  1.0, true};
  e.families = {alpha, beta};

  const double pi = kPi;
  e.goldens.push_back({"alpha family derivative", [m, alpha] { return family_derivative(m, ConnectionKind::Weighted, alpha); },
                       mat2(2 * pi * pi, -2 * pi, 4 * pi + 8 * pi * pi * pi / 3, -2 * pi * pi), 1e-3, true, {}});
  const double c = (1.0 - std::sqrt(5.0)) / 2.0 * std::exp((std::sqrt(5.0) - 1.0) / 2.0);
  e.goldens.push_back({"beta family derivative", [m, beta] { return family_derivative(m, ConnectionKind::Weighted, beta); },
                       mat2(0, c, 1, 0), 1e-4, false, {}});

  const double s = 0.1;
  const double k = std::sqrt(std::sin(s) * std::cos(s) * std::cos(s) - std::sin(s) * std::sin(s));
  const double ch = std::cosh(2 * pi * k), sh = std::sinh(2 * pi * k);
  e.goldens.push_back(path_golden("alpha latitude segment, s = 0.1", m, {PathSegment::line(vec({h + s, 0}), vec({h + s, 2 * pi}))},
                                  mat2(ch, -std::sin(s) * std::cos(s) * sh / k, -k * sh / (std::sin(s) * std::cos(s)), ch)));
  const double es = std::exp(std::sin(s));
  e.goldens.push_back(holonomy_golden(
      "alpha loop, s = 0.1", m, alpha.family(s),
      mat2(ch, -std::sin(s) * sh * es / k, -k * sh / (es * std::sin(s)) + 2 * pi * ch,
           -2 * pi * std::sin(s) * sh * es / k + ch)));
  return e;
}

// ---------------------------------------------------------------------------
// Borel example

CatalogEntry borel_2d() {
  auto metric = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{T(1.0), exp(2.0 * x[0] * x[1])};
  });
  auto phi = DensityField::analytic(2, [](const auto& x) { return x[0] * x[1]; });
  WeightedManifold m(CoordinateChart({"x", "y"}, {}), MetricField(metric, {2, 0}), phi);
  CatalogEntry e("borel2d", m);
  e.basepoint = Vector::Zero(2);
  e.region = cube(2, -1, 1);
  e.expressions = ExpressionManifoldSpec{{"x", "y"}, {}, {}, {"1", "exp(2*x*y)"}, "x*y", Signature{2, 0}};
  e.christoffel_table = [](const Vector& p) {
    Tensor3 t(2);
    const double x = p[0], y = p[1];
    t(0, 0, 0) = -2 * y;
    set_sym(t, 0, 0, 1, -x);
    t(0, 1, 1) = -y * std::exp(2 * x * y);
    t(1, 1, 1) = -x;
    return t;
  };

  const double E = kE;
  const Loop loop1 = Loop::polyline({vec({0, 0}), vec({1, 0}), vec({1, 1}), vec({0, 1}), vec({0, 0})});
  const Loop loop2 = Loop::polyline({vec({0, 0}), vec({2, 0}), vec({2, 0.5}), vec({0, 0.5}), vec({0, 0})});
  e.goldens.push_back({"metric at (1,1)", [m] { return metric_at(m, vec({1, 1})); }, mat2(1, 0, 0, E * E), 1e-12, false, {}});
  e.goldens.push_back({"metric at origin", [m] { return metric_at(m, vec({0, 0})); }, Matrix::Identity(2, 2), 0.0, false, {}});
  e.goldens.push_back(path_golden("segment (t, 0)", m, {PathSegment::line(vec({0, 0}), vec({1, 0}))}, mat2(1, 0.5, 0, 1)));
  e.goldens.push_back(holonomy_golden("unit square loop", m, loop1, mat2(1 / E, (3 - E * E) / (2 * E), 0, E)));
  e.goldens.push_back(holonomy_golden("2 x 1/2 rectangle loop", m, loop2, mat2(1 / E, (81 - 17 * E * E) / (16 * E), 0, E)));
  e.goldens.push_back(log_golden("log of unit square holonomy", m, loop1, mat2(-1, (3 - E * E) / (E * E - 1), 0, 1)));
  e.goldens.push_back(log_golden("log of 2 x 1/2 rectangle holonomy", m, loop2,
                                 mat2(-1, (81 - 17 * E * E) / (8 * (E * E - 1)), 0, 1)));
  return e;
}

// ---------------------------------------------------------------------------
// Triangular family

CatalogEntry triangular_family(int n) {
  if (n < 2) throw Error(ErrorCode::BadDimension, "triangular family needs n >= 2");
  auto metric = BilinearField::analytic_diagonal(n, [n](const auto& x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> d;
    T acc(0.0);
    for (int k = 0; k < n; ++k) {
      d.push_back(exp(acc + x[static_cast<std::size_t>(k)]));
      acc = acc + 2.0 * x[static_cast<std::size_t>(k)];
    }
    return d;
  });
  auto phi = DensityField::analytic(n, [n](const auto& x) {
    using T = scalar_of<decltype(x)>;
    T s(0.0);
    for (int k = 0; k < n; ++k) s = s + x[static_cast<std::size_t>(k)];
    return s;
  });
  const auto names = coordinate_names(n);
  WeightedManifold m(CoordinateChart(names, {}), MetricField(metric, {n, 0}), phi);
  CatalogEntry e("triangular(" + std::to_string(n) + ")", m);
  e.basepoint = Vector::Zero(n);
  e.region = cube(n, -1, 1);

  ExpressionManifoldSpec ex{names, {}, {}, {}, {}, Signature{n, 0}};
  std::string acc;
  for (int k = 0; k < n; ++k) {
    ex.metric.push_back("exp(" + acc + names[static_cast<std::size_t>(k)] + ")");
    acc += "2*" + names[static_cast<std::size_t>(k)] + "+";
    ex.phi = k == 0 ? names[0] : ex.phi + "+" + names[static_cast<std::size_t>(k)];
  }
  e.expressions = ex;

  Matrix df = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) df(i, n - 1 - i) = -1.0;
  e.self_duality = df;

  e.goldens.push_back(value_golden("phi at origin", [m, n] { return m.density().value(Vector::Zero(n)); }, 0.0, 0.0));
  const double E = kE;
  if (n == 2) {
    e.christoffel_table = [](const Vector& p) {
      Tensor3 t(2);
      t(0, 0, 0) = -1.5;
      set_sym(t, 0, 0, 1, -1.0);
      t(0, 1, 1) = -std::exp(p[0] + p[1]);
      t(1, 1, 1) = -1.5;
      return t;
    };
    e.goldens.push_back(ricci_golden("Ricci at origin", m, vec({0, 0}), mat2(0, 0, 0, 1)));
    const Vector q = vec({0.5, -0.2});
    e.goldens.push_back(ricci_golden("Ricci at (0.5, -0.2)", m, q, mat2(0, 0, 0, (1 + std::exp(0.3)) / 2)));
    // Omega of the unit square, integrated by hand.
    const double omega = 2.0 / 3.0 * (2 + E + 1 / E - std::exp(-1.5) - std::exp(-0.5) - std::exp(0.5) - std::exp(1.5));
    e.goldens.push_back(holonomy_golden("unit square loop", m,
                                        Loop::polyline({vec({0, 0}), vec({1, 0}), vec({1, 1}), vec({0, 1}), vec({0, 0})}),
                                        mat2(1, omega, 0, 1)));
  }
  if (n == 3) {
    e.christoffel_table = [](const Vector& p) {
      Tensor3 t(3);
      const double x = p[0], y = p[1], z = p[2];
      t(0, 0, 0) = -1.5;
      set_sym(t, 0, 0, 1, -1.0);
      set_sym(t, 0, 0, 2, -1.0);
      t(0, 1, 1) = -std::exp(x + y);
      t(1, 1, 1) = -1.5;
      set_sym(t, 1, 1, 2, -1.0);
      t(0, 2, 2) = -std::exp(x + 2 * y + z);
      t(1, 2, 2) = -std::exp(y + z);
      t(2, 2, 2) = -1.5;
      return t;
    };
    const Loop square = Loop::polyline({vec({0, 0, 0}), vec({1, 0, 0}), vec({1, 1, 0}), vec({0, 1, 0}), vec({0, 0, 0})});
    const double s = std::sqrt(E);
    const double printed12 = -2 * ((E * E * E + E * E - E + 1) * s + E * E * E - 2 * E * E - E) / (3 * E * E);
    const double printed13 =
        -2 * ((2 * E * E * E * E + 2 * E * E * E + 5 * E * E + 3 * E - 1) * s - 2 * E * E * E * E - 8 * E * E * E - E * E) /
        (9 * E * E * E);
    const double ode12 = 2.0 / 3.0 * (2 + E + 1 / E - std::exp(-1.5) - std::exp(-0.5) - std::exp(0.5) - std::exp(1.5));
    Matrix m13(3, 3);
    m13 << 1, kNaN, printed13, 0, 1, 0, 0, 0, 1;
    Matrix m12 = Matrix::Constant(3, 3, kNaN);
    m12(0, 1) = printed12;
    Matrix m12ode = Matrix::Constant(3, 3, kNaN);
    m12ode(0, 1) = ode12;
    e.slices.push_back({SliceSpec{{0, 1}, Vector::Zero(3)}, {square}, false});
    e.goldens.push_back(holonomy_golden("unit square loop, entries (1,3) and structure", m, square, m13));
    e.goldens.push_back(holonomy_golden(
        "unit square loop, entry (1,2) as printed", m, square, m12, 1e-6,
        "the printed product uses a second-segment factor whose (1,2) entry has the wrong sign; expected to fail"));
    e.goldens.push_back(holonomy_golden("unit square loop, entry (1,2) from the transport equations", m, square, m12ode, 1e-6,
                                        "restriction to z = 0 is the n = 2 member, so this equals its Omega"));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Levi-Civita pairs

namespace {

struct AxisRange {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

AxisRange sample_axis(const Expr& e, const std::string& name, const Interval& d) {
  AxisRange r;
  constexpr int kSamples = 81;
  for (int k = 0; k < kSamples; ++k) {
    const double x = d.lo + (d.hi - d.lo) * (k + 0.5) / kSamples;
    const double v = eval(e, {{name, x}});
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

// Pi_i, with the signs of the definition (positive under the ordering).
template <class T>
std::vector<T> lc_pi(const std::vector<T>& phi) {
  const std::size_t n = phi.size();
  std::vector<T> out(n, T(1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j < i) out[i] = out[i] * (phi[i] - phi[j]);
      if (j > i) out[i] = out[i] * (phi[j] - phi[i]);
    }
  return out;
}

std::string lc_pi_expression(const std::vector<std::string>& phis, std::size_t i) {
  std::string s = "1";
  for (std::size_t j = 0; j < phis.size(); ++j) {
    if (j < i) s += "*((" + phis[i] + ")-(" + phis[j] + "))";
    if (j > i) s += "*((" + phis[j] + ")-(" + phis[i] + "))";
  }
  return s;
}

}  // namespace

CatalogEntry levi_civita_pair(const std::string& name, const std::vector<std::string>& names,
                              const std::vector<std::string>& phi_src, const std::vector<std::string>& a_src,
                              const Box& domain) {
  const int n = static_cast<int>(names.size());
  if (n < 2 || static_cast<int>(phi_src.size()) != n || static_cast<int>(a_src.size()) != n || domain.lo.size() != n ||
      domain.hi.size() != n)
    throw Error(ErrorCode::BadDimension, "Levi-Civita pair needs n >= 2 matching phi_i, A_i and domain sides");
  std::vector<Expr> phis, as;
  std::vector<AxisRange> phi_range(static_cast<std::size_t>(n)), a_range(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Expr p = parse(phi_src[ui]);
    const Expr a = parse(a_src[ui]);
    for (const Expr* ex : {&p, &a})
      for (const auto& v : ex->variables())
        if (v != names[ui]) throw Error(ErrorCode::InvalidArgument, "phi_" + std::to_string(i + 1) + " and A_" +
                                                                         std::to_string(i + 1) + " may only use " + names[ui]);
    const Interval d{domain.lo[i], domain.hi[i]};
    if (!(d.lo < d.hi) || !d.bounded()) throw Error(ErrorCode::EmptyRegion, "domain side " + names[ui] + " must be a bounded interval");
    phi_range[ui] = sample_axis(p, names[ui], d);
    a_range[ui] = sample_axis(a, names[ui], d);
    if (phi_range[ui].min <= 0.0 && phi_range[ui].max >= 0.0)
      throw Error(ErrorCode::DomainError, "phi_" + std::to_string(i + 1) + " vanishes on the domain");
    if (a_range[ui].min <= 0.0 && a_range[ui].max >= 0.0)
      throw Error(ErrorCode::InvalidArgument, "A_" + std::to_string(i + 1) + " vanishes on the domain");
    if (i > 0 && !(phi_range[ui - 1].max < phi_range[ui].min))
      throw Error(ErrorCode::OrderingViolated,
                  "phi_" + std::to_string(i) + " < phi_" + std::to_string(i + 1) + " fails on the sample grid");
    phis.push_back(p.bind(names));
    as.push_back(a.bind(names));
  }

  auto eval_all = [](const std::vector<Expr>& es, const auto& x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> out;
    for (const Expr& e : es) out.push_back(eval_at<T>(e, std::span<const T>(x)));
    return out;
  };
  auto g_diag = [phis, as, eval_all](const auto& x) {
    auto phi = eval_all(phis, x);
    auto a = eval_all(as, x);
    auto pi = lc_pi(phi);
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = pi[i] * a[i];
    return pi;
  };
  auto companion_raw = [phis, g_diag, eval_all](const auto& x) {
    auto phi = eval_all(phis, x);
    auto g = g_diag(x);
    using T = scalar_of<decltype(x)>;
    T prod(1.0);
    for (const auto& p : phi) prod = prod * p;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / (prod * phi[i]);
    return g;
  };

  CoordinateChart chart(names, intervals(domain));
  const Vector center = domain.center();
  std::vector<double> cx(center.data(), center.data() + n);
  const auto g0 = g_diag(cx);
  const auto gt0 = companion_raw(cx);
  const int sign = gt0[0] > 0.0 ? 1 : -1;
  Signature sg, st;
  for (int i = 0; i < n; ++i) {
    (g0[static_cast<std::size_t>(i)] > 0 ? sg.positive : sg.negative)++;
    (sign * gt0[static_cast<std::size_t>(i)] > 0 ? st.positive : st.negative)++;
  }

  auto density = DensityField::analytic(n, [phis, eval_all](const auto& x) {
    using T = scalar_of<decltype(x)>;
    T s(0.0);
    for (const auto& p : eval_all(phis, x)) s = s + log(abs_value(p));
    return 0.5 * s;
  });
  WeightedManifold m(chart, MetricField(BilinearField::analytic_diagonal(n, g_diag), sg), density);
  auto companion_metric = BilinearField::analytic_diagonal(n, [companion_raw, sign](const auto& x) {
    auto g = companion_raw(x);
    for (auto& v : g) v = static_cast<double>(sign) * v;
    return g;
  });
  WeightedManifold companion(chart, MetricField(companion_metric, st), DensityField::constant(n, 0.0));

  CatalogEntry e(name, m);
  e.companion = companion;
  e.lc = LeviCivitaData{phi_src, a_src, sign};
  e.basepoint = center;
  const Vector w = domain.hi - domain.lo;
  e.region = {domain.lo + 0.05 * w, domain.hi - 0.05 * w};

  ExpressionManifoldSpec ex{names, intervals(domain), {}, {}, {}, sg};
  std::string logs;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    ex.metric.push_back("(" + lc_pi_expression(phi_src, ui) + ")*(" + a_src[ui] + ")");
    const std::string arg = phi_range[ui].max < 0 ? "-(" + phi_src[ui] + ")" : "(" + phi_src[ui] + ")";
    logs += (i ? "+log(" : "log(") + arg + ")";
  }
  ex.phi = "0.5*(" + logs + ")";
  e.expressions = ex;
  return e;
}

CatalogEntry so_pq_example(int p, int q) {
  const int n = p + q;
  if (p < 0 || q < 1 || n < 2) throw Error(ErrorCode::BadSignature, "so_pq needs p >= 0, q >= 1 and p + q >= 2");
  const auto names = coordinate_names(n);
  std::vector<std::string> phis, as(static_cast<std::size_t>(n), "1");
  for (int i = p; i >= 1; --i) phis.push_back(fmt(-i));
  for (int i = 1; i <= q - 1; ++i) phis.push_back(fmt(i));
  phis.push_back(fmt(n) + "+cos(" + names.back() + ")");
  CatalogEntry e = levi_civita_pair("so_pq(" + std::to_string(p) + "," + std::to_string(q) + ")", names, phis, as,
                                    cube(n, -3, 3));
  const Signature st = e.companion->metric().signature();
  if (!(st == Signature{p, q} || st == Signature{q, p}))
    throw Error(ErrorCode::BadSignature, "companion signature does not match (p, q)");
  e.region = cube(n, -1.5, 1.5);
  e.basepoint = Vector::Zero(n);

  double expected = 0.5 * std::log(static_cast<double>(n));
  for (int i = 0; i + 1 < n; ++i) expected += 0.5 * std::log(std::abs(std::stod(phis[static_cast<std::size_t>(i)])));
  Vector x = Vector::Zero(n);
  x[n - 1] = kPi / 2;
  const WeightedManifold m = e.manifold;
  e.goldens.push_back(value_golden("phi at x_n = pi/2", [m, x] { return m.density().value(x); }, expected, 1e-14));
  return e;
}

CatalogEntry so_plus_11_2d() {
  auto metric = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = scalar_of<decltype(x)>;
    const T c = 3.0 + cos(x[1]);
    return std::vector<T>{c, c};
  });
  auto phi = DensityField::analytic(2, [](const auto& x) { return 0.5 * log(2.0 + cos(x[1])); });
  auto companion = BilinearField::analytic_diagonal(2, [](const auto& x) {
    using T = scalar_of<decltype(x)>;
    const T a = 3.0 + cos(x[1]);
    const T b = 2.0 + cos(x[1]);
    return std::vector<T>{a / b, -a / (b * b)};
  });
  CoordinateChart chart({"x", "y"}, {});
  WeightedManifold m(chart, MetricField(metric, {2, 0}), phi);
  CatalogEntry e("so11_2d", m);
  e.companion = WeightedManifold(chart, MetricField(companion, {1, 1}), DensityField::constant(2, 0.0));
  e.lc = LeviCivitaData{{"-1", "2+cos(y)"}, {"1", "1"}, 1};
  e.basepoint = Vector::Zero(2);
  e.region = cube(2, -1.5, 1.5);
  e.expressions = ExpressionManifoldSpec{{"x", "y"}, {}, {}, {"3+cos(y)", "3+cos(y)"}, "0.5*log(2+cos(y))", Signature{2, 0}};
  e.christoffel_table = [](const Vector& p) {
    Tensor3 t(2);
    const double sy = std::sin(p[1]), cy = std::cos(p[1]);
    t(1, 0, 0) = sy / (2 * (3 + cy));
    set_sym(t, 0, 0, 1, sy / (2 * (2 + cy) * (3 + cy)));
    t(1, 1, 1) = sy * (4 + cy) / (2 * (2 + cy) * (3 + cy));
    return t;
  };
  e.goldens.push_back(ricci_golden("Ricci at origin", m, vec({0, 0}), mat2(1.0 / 8, 0, 0, -1.0 / 24)));
  e.goldens.push_back(value_golden("phi at (0.7, pi/2)", [m] { return m.density().value(vec({0.7, kPi / 2})); },
                                   0.5 * std::log(2.0), 1e-15));
  return e;
}

CatalogEntry random_levi_civita_family(int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::BadDimension, "Levi-Civita family needs n >= 2");
  Rng rng(seed);
  const auto names = coordinate_names(n);
  std::vector<std::string> phis, as;
  for (int i = 0; i < n; ++i) {
    const std::string& x = names[static_cast<std::size_t>(i)];
    const double c = 3.0 * i - 3.0 * (n / 2) + 1.5;
    const double amp = rng.uniform(0.2, 0.8);
    const double freq = rng.uniform(0.5, 2.0);
    const double shift = rng.uniform(-1.0, 1.0);
    phis.push_back(fmt(c) + "+" + fmt(amp) + "*sin(" + fmt(freq) + "*" + x + "+" + fmt(shift) + ")");
    const double a_amp = rng.uniform(0.1, 0.5);
    const double a_freq = rng.uniform(0.5, 2.0);
    as.push_back(fmt(1.5) + "+" + fmt(a_amp) + "*cos(" + fmt(a_freq) + "*" + x + ")");
  }
  return levi_civita_pair("lc_random(" + std::to_string(n) + "," + std::to_string(seed) + ")", names, phis, as,
                          cube(n, -2, 2));
}

// ---------------------------------------------------------------------------

CatalogEntry make_entry(const std::string& name) {
  std::smatch mt;
  if (name == "sphere2") return sphere_with_density(2);
  if (name == "borel2d") return borel_2d();
  if (name == "so11_2d") return so_plus_11_2d();
  if (std::regex_match(name, mt, std::regex(R"(sphereN\((\d+)\))"))) return sphere_with_density(std::stoi(mt[1]));
  if (std::regex_match(name, mt, std::regex(R"(triangular\((\d+)\))"))) return triangular_family(std::stoi(mt[1]));
  if (std::regex_match(name, mt, std::regex(R"(so_pq\((\d+),\s*(\d+)\))")))
    return so_pq_example(std::stoi(mt[1]), std::stoi(mt[2]));
  if (std::regex_match(name, mt, std::regex(R"(lc_random\((\d+),\s*(\d+)\))")))
    return random_levi_civita_family(std::stoi(mt[1]), std::stoull(mt[2]));
  throw Error(ErrorCode::UnknownExample, "no catalog entry named '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"sphere2", "sphereN(3)", "borel2d", "triangular(2)", "triangular(3)", "so_pq(1,2)", "so_pq(2,1)",
          "so_pq(1,1)", "so_pq(0,2)", "so11_2d"};
}

}  // namespace hololab
