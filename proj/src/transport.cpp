#include "hololab/transport.hpp"

#include <algorithm>
#include <cmath>

namespace hololab {

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

constexpr double kChainTol = 1e-12;
constexpr double kCloseTol = 1e-9;

}  // namespace

// ---------------------------------------------------------------------------
// Paths

PathSegment PathSegment::line(Vector start, Vector end) {
  if (start.size() != end.size()) throw Error(ErrorCode::ShapeMismatch, "line endpoints differ in dimension");
  PathSegment s;
  s.a_ = std::move(start);
  s.b_ = std::move(end);
  return s;
}

PathSegment PathSegment::curve(std::function<Vector(double)> position, std::function<Vector(double)> velocity) {
  constexpr double h = 1e-5;
  for (int i = 1; i <= 5; ++i) {
    const double t = i / 6.0;
    const Vector fd = (position(t + h) - position(t - h)) / (2.0 * h);
    const Vector v = velocity(t);
    if (fd.size() != v.size())
      throw Error(ErrorCode::ShapeMismatch, "curve position and velocity differ in dimension");
    if ((fd - v).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, v.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::InvalidArgument, "curve velocity inconsistent with position at t=" + std::to_string(t));
  }
  PathSegment s;
  s.position_ = std::move(position);
  s.velocity_ = std::move(velocity);
  return s;
}

Vector PathSegment::position(double t) const {
  if (position_) return position_(t);
  return a_ + t * (b_ - a_);
}

Vector PathSegment::velocity(double t) const {
  if (velocity_) return velocity_(t);
  return b_ - a_;
}

PathSegment PathSegment::reversed() const {
  if (is_line()) return line(b_, a_);
  PathSegment s;
  auto pos = position_;
  auto vel = velocity_;
  s.position_ = [pos](double t) { return pos(1.0 - t); };
  s.velocity_ = [vel](double t) { return Vector(-vel(1.0 - t)); };
  return s;
}

Loop::Loop(std::vector<PathSegment> segments, Vector basepoint)
    : segments_(std::move(segments)), basepoint_(std::move(basepoint)) {
  for (const auto& s : segments_)
    if (s.dim() != basepoint_.size()) throw Error(ErrorCode::ShapeMismatch, "segment dimension differs from basepoint");
}

Loop Loop::polyline(const std::vector<Vector>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "polyline needs at least one point");
  std::vector<PathSegment> segs;
  for (std::size_t i = 1; i < points.size(); ++i) segs.push_back(PathSegment::line(points[i - 1], points[i]));
  return Loop(std::move(segs), points.front());
}

void Loop::validate(const CoordinateChart& chart) const {
  if (basepoint_.size() != chart.dim()) throw Error(ErrorCode::ShapeMismatch, "loop dimension differs from chart");
  if (segments_.empty()) return;
  if ((segments_.front().start() - basepoint_).cwiseAbs().maxCoeff() > kChainTol)
    throw Error(ErrorCode::NotClosed, "first segment does not start at the basepoint");
  for (std::size_t i = 1; i < segments_.size(); ++i)
    if ((segments_[i].start() - segments_[i - 1].end()).cwiseAbs().maxCoeff() > kChainTol)
      throw Error(ErrorCode::NotClosed, "segment " + std::to_string(i) + " does not start where the previous ends");
  if (!chart.same_point(segments_.back().end(), basepoint_, kCloseTol))
    throw Error(ErrorCode::NotClosed, "path does not return to the basepoint");
}

Loop Loop::reversed() const {
  std::vector<PathSegment> segs;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) segs.push_back(it->reversed());
  Vector base = segments_.empty() ? basepoint_ : segments_.back().end();
  return Loop(std::move(segs), std::move(base));
}

Loop Loop::concatenated(const Loop& next) const {
  const Vector end = segments_.empty() ? basepoint_ : segments_.back().end();
  if ((next.basepoint_ - end).cwiseAbs().maxCoeff() > kChainTol)
    throw Error(ErrorCode::NotClosed, "loops do not share an endpoint");
  std::vector<PathSegment> segs = segments_;
  segs.insert(segs.end(), next.segments_.begin(), next.segments_.end());
  return Loop(std::move(segs), basepoint_);
}

// ---------------------------------------------------------------------------
// Integration

namespace {

// RK4 over a cached grid f[0..4N]; `m` steps with half-step offset `o`
// (o = 2 for the coarse pass, o = 1 for the fine one).
Matrix rk4(const std::vector<Matrix>& f, int m, int o, const Matrix& y0) {
  const double h = 1.0 / m;
  Matrix y = y0;
  for (int k = 0; k < m; ++k) {
    const std::size_t i0 = static_cast<std::size_t>(2 * o * k);
    const Matrix& f0 = f[i0];
    const Matrix& fm = f[i0 + static_cast<std::size_t>(o)];
    const Matrix& f1 = f[i0 + static_cast<std::size_t>(2 * o)];
    const Matrix k1 = f0 * y;
    const Matrix k2 = fm * (y + 0.5 * h * k1);
    const Matrix k3 = fm * (y + 0.5 * h * k2);
    const Matrix k4 = f1 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

LinearSolution integrate_linear(const std::function<Matrix(double)>& F, const Matrix& y0,
                                const IntegratorOptions& opts, const std::function<void(double)>& check) {
  if (opts.steps < 1) throw Error(ErrorCode::InvalidArgument, "integrator needs at least one step");
  for (int n = opts.steps;; n *= 2) {
    const int points = 4 * n + 1;
    std::vector<Matrix> f(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double t = static_cast<double>(i) / (4.0 * n);
      if (check) check(t);
      f[static_cast<std::size_t>(i)] = F(t);
    }
    const Matrix coarse = rk4(f, n, 2, y0);
    Matrix fine = rk4(f, 2 * n, 1, y0);
    const double err = max_abs(fine - coarse) / 15.0;
    if (!std::isfinite(err)) throw Error(ErrorCode::StepUnderflow, "transport diverged");
    if (err <= opts.tolerance * std::max(1.0, max_abs(fine))) return {std::move(fine), 2 * n, err};
    if (4 * n > opts.max_steps)
      throw Error(ErrorCode::StepUnderflow, "error estimate " + std::to_string(err) + " above tolerance at " +
                                                std::to_string(2 * n) + " steps");
  }
}

namespace {

std::function<void(double)> domain_check(const WeightedManifold& m, const PathSegment& seg) {
  return [&m, &seg](double t) { m.chart().require_contains(seg.position(t)); };
}

LinearSolution compose(const WeightedManifold& m, const std::vector<PathSegment>& path, const IntegratorOptions& opts,
                       const std::function<Matrix(const PathSegment&, double)>& F) {
  const int n = m.dim();
  LinearSolution total{Matrix::Identity(n, n), 0, 0.0};
  for (const auto& seg : path) {
    if (seg.dim() != n) throw Error(ErrorCode::ShapeMismatch, "path dimension differs from manifold");
    LinearSolution s = integrate_linear([&](double t) { return F(seg, t); }, Matrix::Identity(n, n), opts,
                                        domain_check(m, seg));
    total.est_error = s.est_error * max_abs(total.value) + max_abs(s.value) * total.est_error;
    total.value = s.value * total.value;
    total.steps_used += s.steps_used;
  }
  return total;
}

}  // namespace

LinearSolution transport_matrix(const WeightedManifold& m, ConnectionKind kind, const std::vector<PathSegment>& path,
                                const IntegratorOptions& opts) {
  return compose(m, path, opts, [&](const PathSegment& seg, double t) {
    return Matrix(-connection_matrix(m, kind, seg.position(t), seg.velocity(t)));
  });
}

LinearSolution covector_transport_matrix(const WeightedManifold& m, ConnectionKind kind,
                                         const std::vector<PathSegment>& path, const IntegratorOptions& opts) {
  return compose(m, path, opts, [&](const PathSegment& seg, double t) {
    return Matrix(connection_matrix(m, kind, seg.position(t), seg.velocity(t)).transpose());
  });
}

Vector transport_vector(const WeightedManifold& m, ConnectionKind kind, const std::vector<PathSegment>& path,
                        const Vector& v0, const IntegratorOptions& opts) {
  if (v0.size() != m.dim()) throw Error(ErrorCode::ShapeMismatch, "vector dimension differs from manifold");
  return transport_matrix(m, kind, path, opts).value * v0;
}

Vector transport_covector(const WeightedManifold& m, ConnectionKind kind, const std::vector<PathSegment>& path,
                          const Vector& a0, const IntegratorOptions& opts) {
  if (a0.size() != m.dim()) throw Error(ErrorCode::ShapeMismatch, "covector dimension differs from manifold");
  return covector_transport_matrix(m, kind, path, opts).value * a0;
}

HolonomyElement holonomy(const WeightedManifold& m, ConnectionKind kind, const Loop& loop,
                         const IntegratorOptions& opts) {
  loop.validate(m.chart());
  LinearSolution s = transport_matrix(m, kind, loop.segments(), opts);
  return {std::move(s.value), loop, s.steps_used, s.est_error};
}

std::vector<FrameSample> trace_frame(const WeightedManifold& m, ConnectionKind kind, const Loop& loop,
                                     int samples_per_segment, const IntegratorOptions& opts) {
  loop.validate(m.chart());
  if (samples_per_segment < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample per segment");
  const int n = m.dim();
  IntegratorOptions sub = opts;
  sub.steps = std::max(1, opts.steps / samples_per_segment);
  std::vector<FrameSample> out;
  Matrix frame = Matrix::Identity(n, n);
  out.push_back({0, 0.0, loop.basepoint(), frame});
  for (std::size_t s = 0; s < loop.segments().size(); ++s) {
    const PathSegment& seg = loop.segments()[s];
    for (int k = 0; k < samples_per_segment; ++k) {
      const double t0 = static_cast<double>(k) / samples_per_segment;
      const double dt = 1.0 / samples_per_segment;
      auto F = [&](double tau) {
        const double t = t0 + tau * dt;
        return Matrix(-dt * connection_matrix(m, kind, seg.position(t), seg.velocity(t)));
      };
      frame = integrate_linear(F, frame, sub, [&](double tau) { m.chart().require_contains(seg.position(t0 + tau * dt)); })
                  .value;
      const double t1 = t0 + dt;
      out.push_back({static_cast<int>(s), t1, seg.position(t1), frame});
    }
  }
  return out;
}

FamilyDerivative family_derivative_estimate(const WeightedManifold& m, ConnectionKind kind, const LoopFamily& family,
                                            double s_step, const IntegratorOptions& opts) {
  if (!(s_step > 0.0) || s_step > family.s_max)
    throw Error(ErrorCode::InvalidArgument, "s_step must lie in (0, s_max]");
  const int n = m.dim();
  const Matrix I = Matrix::Identity(n, n);
  if (family.trivial_at_zero) {
    const HolonomyElement p0 = holonomy(m, kind, family.family(0.0), opts);
    if (max_abs(p0.matrix - I) > std::max(10.0 * p0.est_error, 1e-8))
      throw Error(ErrorCode::FamilyNotTrivial, "P(0) differs from the identity by " + std::to_string(max_abs(p0.matrix - I)));
  } else {
    throw Error(ErrorCode::FamilyNotTrivial, "family not declared trivial at s = 0");
  }
  Matrix d[3];
  for (int k = 0; k < 3; ++k) {
    const double s = s_step / std::pow(2.0, k);
    d[k] = (holonomy(m, kind, family.family(s), opts).matrix - I) / s;
  }
  const Matrix r1 = 2.0 * d[1] - d[0];
  const Matrix r1b = 2.0 * d[2] - d[1];
  Matrix value = (4.0 * r1b - r1) / 3.0;
  const double err = max_abs(value - r1b);
  return {std::move(value), err};
}

Matrix family_derivative(const WeightedManifold& m, ConnectionKind kind, const LoopFamily& family, double s_step,
                         const IntegratorOptions& opts) {
  return family_derivative_estimate(m, kind, family, s_step, opts).value;
}

// ---------------------------------------------------------------------------
// Random loops

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

std::vector<Loop> random_rectangle_loops(const WeightedManifold& m, const Box& region, int count, std::uint64_t seed,
                                         std::optional<Vector> basepoint) {
  const int n = m.dim();
  if (region.lo.size() != n || region.hi.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "region dimension differs from manifold");
  for (int i = 0; i < n; ++i) {
    if (!(region.lo[i] < region.hi[i])) throw Error(ErrorCode::EmptyRegion, "region side " + std::to_string(i) + " is empty");
    if (!m.chart().period(i) && !(m.chart().domain(i).contains(region.lo[i]) && m.chart().domain(i).contains(region.hi[i])))
      throw Error(ErrorCode::OutOfDomain, "region leaves the chart along coordinate " + m.chart().names()[static_cast<std::size_t>(i)]);
  }
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "negative loop count");
  if (count == 0) return {};
  if (n < 2) throw Error(ErrorCode::BadDimension, "rectangles need two coordinates");
  const Vector p = basepoint ? *basepoint : region.center();
  if (p.size() != n) throw Error(ErrorCode::ShapeMismatch, "basepoint dimension differs from manifold");

  Rng rng(seed);
  std::vector<Loop> loops;
  loops.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    const int a = rng.index(n);
    int b = rng.index(n - 1);
    if (b >= a) ++b;
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = rng.uniform(region.lo[i], region.hi[i]);
    const double ta = rng.uniform(region.lo[a], region.hi[a]);
    const double tb = rng.uniform(region.lo[b], region.hi[b]);

    std::vector<Vector> spoke{p};
    Vector q = p;
    for (int i = 0; i < n; ++i) {
      if (q[i] != c[i]) {
        q[i] = c[i];
        spoke.push_back(q);
      }
    }
    std::vector<Vector> pts = spoke;
    Vector r = c;
    r[a] = ta;
    pts.push_back(r);
    r[b] = tb;
    pts.push_back(r);
    r[a] = c[a];
    pts.push_back(r);
    pts.push_back(c);
    for (auto it = spoke.rbegin() + 1; it != spoke.rend(); ++it) pts.push_back(*it);
    loops.push_back(Loop::polyline(pts));
  }
  return loops;
}

// ---------------------------------------------------------------------------
// Totally geodesic slices

Vector SliceSpec::embed(const Vector& y) const {
  if (y.size() != static_cast<Eigen::Index>(free.size())) throw Error(ErrorCode::ShapeMismatch, "slice point has wrong dimension");
  Vector x = base;
  for (std::size_t i = 0; i < free.size(); ++i) x[free[i]] = y[static_cast<Eigen::Index>(i)];
  return x;
}

namespace {

void validate_slice(const WeightedManifold& m, const SliceSpec& spec) {
  if (spec.base.size() != m.dim()) throw Error(ErrorCode::ShapeMismatch, "slice base has wrong dimension");
  if (spec.free.empty() || static_cast<int>(spec.free.size()) >= m.dim())
    throw Error(ErrorCode::BadDimension, "slice must have between 1 and n-1 free coordinates");
  for (std::size_t i = 0; i < spec.free.size(); ++i) {
    if (spec.free[i] < 0 || spec.free[i] >= m.dim()) throw Error(ErrorCode::InvalidArgument, "slice coordinate out of range");
    if (i && spec.free[i] <= spec.free[i - 1]) throw Error(ErrorCode::InvalidArgument, "slice coordinates must increase");
  }
}

Vector restrict_point(const SliceSpec& spec, const Vector& x) {
  Vector y(static_cast<Eigen::Index>(spec.free.size()));
  for (std::size_t i = 0; i < spec.free.size(); ++i) y[static_cast<Eigen::Index>(i)] = x[spec.free[i]];
  return y;
}

Matrix sub_block(const Matrix& a, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = a(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

bool in_slice(const std::vector<int>& free, int k) { return std::find(free.begin(), free.end(), k) != free.end(); }

}  // namespace

WeightedManifold restrict_to_slice(const WeightedManifold& m, const SliceSpec& spec) {
  validate_slice(m, spec);
  const auto& chart = m.chart();
  std::vector<std::string> names;
  std::vector<Interval> domain;
  std::vector<std::optional<double>> periods;
  for (int k : spec.free) {
    names.push_back(chart.names()[static_cast<std::size_t>(k)]);
    domain.push_back(chart.domain(k));
    periods.push_back(chart.period(k));
  }
  const int s = static_cast<int>(spec.free.size());
  const MetricField metric = m.metric();
  const DensityField density = m.density();
  BilinearField g(s, metric.mode(), [metric, spec](const Vector& y, int order) {
    const MatrixJet a = metric.jet(spec.embed(y), order);
    MatrixJet out;
    out.value = sub_block(a.value, spec.free);
    if (order >= 1)
      for (int i : spec.free) out.d.push_back(sub_block(a.d[static_cast<std::size_t>(i)], spec.free));
    if (order >= 2)
      for (int i : spec.free)
        for (int j : spec.free) out.dd.push_back(sub_block(a.second(i, j), spec.free));
    return out;
  });
  DensityField phi(s, density.mode(), [density, spec](const Vector& y, int order) {
    const ScalarJet a = density.jet(spec.embed(y), order);
    ScalarJet out;
    out.value = a.value;
    if (order >= 1) out.grad = restrict_point(spec, a.grad);
    if (order >= 2) out.hess = sub_block(a.hess, spec.free);
    return out;
  });
  const Vector y0 = restrict_point(spec, spec.base);
  const Signature sig = signature_of(sub_block(metric.value(spec.base), spec.free));
  return WeightedManifold(CoordinateChart(names, domain, periods), MetricField(g, sig), phi, std::vector<Vector>{y0});
}

void require_totally_geodesic(const WeightedManifold& m, const SliceSpec& spec, const Loop& loop, int samples,
                              double tol) {
  validate_slice(m, spec);
  const int n = m.dim();
  const auto& segs = loop.segments();
  for (const auto& seg : segs)
    for (double t : {0.0, 0.5, 1.0}) {
      const Vector x = seg.position(t);
      for (int k = 0; k < n; ++k)
        if (!in_slice(spec.free, k) && std::abs(x[k] - spec.base[k]) > kChainTol)
          throw Error(ErrorCode::InvalidArgument, "loop leaves the slice");
    }
  std::vector<Vector> points;
  if (segs.empty()) {
    points.push_back(loop.basepoint());
  } else {
    for (int q = 0; q < samples; ++q) {
      const double u = (q + 0.5) / samples * static_cast<double>(segs.size());
      const auto idx = std::min(segs.size() - 1, static_cast<std::size_t>(u));
      points.push_back(segs[idx].position(u - static_cast<double>(idx)));
    }
  }
  for (const Vector& x : points) {
    const ConnectionCoefficients c = christoffel(m, ConnectionKind::LeviCivita, x);
    for (int k = 0; k < n; ++k) {
      if (in_slice(spec.free, k)) continue;
      for (int i : spec.free)
        for (int j : spec.free)
          if (std::abs(c.gamma(k, i, j)) > tol)
            throw Error(ErrorCode::NotTotallyGeodesic,
                        "normal component " + std::to_string(c.gamma(k, i, j)) + " of the second fundamental form");
    }
  }
}

BlockTransport predicted_block_transport(const WeightedManifold& m, const SliceSpec& spec, const Loop& loop,
                                         const IntegratorOptions& opts) {
  loop.validate(m.chart());
  require_totally_geodesic(m, spec, loop);
  const WeightedManifold sub = restrict_to_slice(m, spec);
  const int n = m.dim();
  const int s = sub.dim();
  const Vector& p = loop.basepoint();
  const double phi_p = m.density().value(p);

  Matrix y = Matrix::Identity(s + n, s + n);
  for (const auto& seg : loop.segments()) {
    auto F = [&](double t) {
      const Vector x = seg.position(t);
      const Vector v = seg.velocity(t);
      const Vector vs = restrict_point(spec, v);
      const double lambda = std::exp(m.density().value(x) - phi_p);
      Matrix f = Matrix::Zero(s + n, s + n);
      f.topLeftCorner(s, s) = -connection_matrix(sub, ConnectionKind::Weighted, restrict_point(spec, x), vs);
      f.topRightCorner(s, n) = lambda * vs * m.density().gradient(x).transpose();
      f.bottomRightCorner(n, n) = -connection_matrix(m, ConnectionKind::LeviCivita, x, v);
      return f;
    };
    y = integrate_linear(F, Matrix::Identity(s + n, s + n), opts, domain_check(m, seg)).value * y;
  }

  Matrix es = Matrix::Zero(n, s);
  for (int i = 0; i < s; ++i) es(spec.free[static_cast<std::size_t>(i)], i) = 1.0;
  const Matrix g = m.metric().value(p);
  const Matrix gss = sub_block(g, spec.free);
  Matrix normal_basis(n, n - s);
  int col = 0;
  for (int k = 0; k < n; ++k) {
    if (in_slice(spec.free, k)) continue;
    Vector gsk(s);
    for (int i = 0; i < s; ++i) gsk[i] = g(spec.free[static_cast<std::size_t>(i)], k);
    Vector e = Vector::Zero(n);
    e[k] = 1.0;
    normal_basis.col(col++) = e - es * gss.partialPivLu().solve(gsk);
  }

  BlockTransport out;
  out.tangent = y.topLeftCorner(s, s);
  const Matrix u = y.topRightCorner(s, n);
  const Matrix q = y.bottomRightCorner(n, n);
  out.x_sigma = u * normal_basis;
  out.normal_basis = normal_basis;
  out.normal = normal_basis.colPivHouseholderQr().solve(q * normal_basis);
  Matrix image(n, n), frame(n, n);
  image << es * out.tangent, es * out.x_sigma + q * normal_basis;
  frame << es, normal_basis;
  out.predicted = image * frame.inverse();
  return out;
}

}  // namespace hololab
