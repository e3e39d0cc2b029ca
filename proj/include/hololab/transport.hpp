#pragma once

#include "hololab/manifold.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace hololab {

/// One piece of a path, parametrized on t in [0, 1].
class PathSegment {
 public:
  static PathSegment line(Vector start, Vector end);

  /// Tabulated curve; the velocity is checked against central differences of
  /// the position at five interior parameters.
  static PathSegment curve(std::function<Vector(double)> position, std::function<Vector(double)> velocity);

  Vector position(double t) const;
  Vector velocity(double t) const;
  Vector start() const { return position(0.0); }
  Vector end() const { return position(1.0); }
  int dim() const { return static_cast<int>(start().size()); }
  bool is_line() const noexcept { return !position_; }

  PathSegment reversed() const;

 private:
  PathSegment() = default;

  Vector a_, b_;
  std::function<Vector(double)> position_;
  std::function<Vector(double)> velocity_;
};

class Loop {
 public:
  Loop(std::vector<PathSegment> segments, Vector basepoint);

  /// Straight lines through `points`; the basepoint is points.front().
  static Loop polyline(const std::vector<Vector>& points);

  const std::vector<PathSegment>& segments() const noexcept { return segments_; }
  const Vector& basepoint() const noexcept { return basepoint_; }
  int dim() const { return static_cast<int>(basepoint_.size()); }

  /// Throws NotClosed unless segments chain exactly and the path returns to
  /// the basepoint modulo the chart's periods.
  void validate(const CoordinateChart& chart) const;

  Loop reversed() const;
  Loop concatenated(const Loop& next) const;

 private:
  std::vector<PathSegment> segments_;
  Vector basepoint_;
};

struct IntegratorOptions {
  int steps = 2000;        // RK4 steps per segment for the coarse pass
  int max_steps = 64000;   // ceiling for step doubling
  double tolerance = 1e-9; // accepted est_error relative to max(1, |P|)
};

/// Propagator of a linear system Y' = F(t) Y on [0, 1].
struct LinearSolution {
  Matrix value;
  int steps_used = 0;
  double est_error = 0.0;
};

/// Classical RK4 with one step halving; the returned value is the fine pass
/// and est_error = max|fine - coarse| / 15. Steps double until the estimate
/// meets the tolerance; StepUnderflow if max_steps is reached first.
/// `check` runs on every evaluation time before F.
LinearSolution integrate_linear(const std::function<Matrix(double)>& F, const Matrix& y0,
                                const IntegratorOptions& opts,
                                const std::function<void(double)>& check = {});

/// Transport matrix along consecutive segments: column j is the transported
/// coordinate vector e_j.
LinearSolution transport_matrix(const WeightedManifold& m, ConnectionKind kind,
                                const std::vector<PathSegment>& path, const IntegratorOptions& opts = {});

Vector transport_vector(const WeightedManifold& m, ConnectionKind kind, const std::vector<PathSegment>& path,
                        const Vector& v0, const IntegratorOptions& opts = {});

/// Integrates the covector equation directly (not via the vector transport).
Vector transport_covector(const WeightedManifold& m, ConnectionKind kind, const std::vector<PathSegment>& path,
                          const Vector& a0, const IntegratorOptions& opts = {});

LinearSolution covector_transport_matrix(const WeightedManifold& m, ConnectionKind kind,
                                         const std::vector<PathSegment>& path, const IntegratorOptions& opts = {});

struct HolonomyElement {
  Matrix matrix;
  Loop loop;
  int steps_used = 0;
  double est_error = 0.0;
};

HolonomyElement holonomy(const WeightedManifold& m, ConnectionKind kind, const Loop& loop,
                         const IntegratorOptions& opts = {});

/// Transported frame sampled along a loop, for plotting.
struct FrameSample {
  int segment = 0;
  double t = 0.0;
  Vector point;
  Matrix frame;
};

std::vector<FrameSample> trace_frame(const WeightedManifold& m, ConnectionKind kind, const Loop& loop,
                                     int samples_per_segment, const IntegratorOptions& opts = {});

struct LoopFamily {
  std::function<Loop(double)> family;
  double s_max = 1.0;
  bool trivial_at_zero = true;
};

/// One-sided derivative of P(s) at s = 0 from difference quotients at
/// s_step, s_step/2 and s_step/4 with two Richardson levels.
Matrix family_derivative(const WeightedManifold& m, ConnectionKind kind, const LoopFamily& family,
                         double s_step = 1e-2, const IntegratorOptions& opts = {});

/// Same derivative with est_error = max |final - last first-level Richardson value|.
struct FamilyDerivative {
  Matrix value;
  double est_error = 0.0;
};
FamilyDerivative family_derivative_estimate(const WeightedManifold& m, ConnectionKind kind, const LoopFamily& family,
                                            double s_step = 1e-2, const IntegratorOptions& opts = {});

struct Box {
  Vector lo;
  Vector hi;

  Vector center() const { return 0.5 * (lo + hi); }
};

/// Seeded axis-aligned rectangles in random coordinate planes, each based at
/// `basepoint` (default: box center) through staircase spokes.
std::vector<Loop> random_rectangle_loops(const WeightedManifold& m, const Box& region, int count, std::uint64_t seed,
                                         std::optional<Vector> basepoint = std::nullopt);

/// Portable uniform doubles from a 64-bit Mersenne twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();                   // [0, 1)
  double uniform(double lo, double hi);
  int index(int n);                   // 0..n-1

 private:
  std::mt19937_64 engine_;
};

/// Coordinate slice {x_j = base_j for j not in free}.
struct SliceSpec {
  std::vector<int> free;
  Vector base;

  Vector embed(const Vector& y) const;
};

WeightedManifold restrict_to_slice(const WeightedManifold& m, const SliceSpec& spec);

/// Throws NotTotallyGeodesic unless the Levi-Civita coefficients with both
/// lower indices tangent and the upper index normal vanish (to `tol`) at
/// `samples` points along the loop.
void require_totally_geodesic(const WeightedManifold& m, const SliceSpec& spec, const Loop& loop,
                              int samples = 20, double tol = 1e-8);

struct BlockTransport {
  Matrix predicted;   // ambient coordinates
  Matrix tangent;     // induced weighted holonomy on the slice
  Matrix x_sigma;     // tangent x normal coupling, normal basis columns
  Matrix normal;      // Riemannian transport on the normal space, normal basis
  Matrix normal_basis;
};

/// Assembles ambient weighted holonomy along a loop inside a totally geodesic
/// slice from the slice transport, the normal Riemannian transport and the
/// sourced equation for the coupling block. The loop is in ambient coordinates.
BlockTransport predicted_block_transport(const WeightedManifold& m, const SliceSpec& spec, const Loop& loop,
                                         const IntegratorOptions& opts = {});

}  // namespace hololab
