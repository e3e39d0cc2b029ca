#pragma once

#include "hololab/expr.hpp"
#include "hololab/manifold.hpp"
#include "hololab/transport.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hololab {

/// arccos((1 - sqrt 5) / 2), the latitude where cot r + sin r = 0.
double xi_constant();

/// Manifold described by expression strings over named coordinates.
struct ExpressionManifoldSpec {
  std::vector<std::string> names;
  std::vector<Interval> domain;                 // empty: unbounded
  std::vector<std::optional<double>> periods;   // empty: none periodic
  std::vector<std::string> metric;              // n diagonal entries or n*n row-major entries
  std::string phi = "0";
  std::optional<Signature> signature;           // default: counted at the domain center
};

/// Parses and binds the expressions; derivatives come from nested duals.
/// Parse failures surface as SyntaxError / UnknownIdentifier.
WeightedManifold manifold_from_expressions(const ExpressionManifoldSpec& spec);

/// Expected value with an evaluator. NaN entries in `expected` are not checked.
struct Golden {
  std::string label;
  std::function<Matrix()> compute;
  Matrix expected;
  double tol = 1e-6;
  bool relative = false;  // tolerance scaled by max |expected|
  std::string note;
};

struct GoldenResult {
  std::string label;
  Matrix expected;
  Matrix computed;
  double delta = 0.0;
  double tol = 0.0;
  bool passed = false;
  std::string note;
};

/// Largest |expected - computed| over checked entries.
double golden_delta(const Matrix& expected, const Matrix& computed);

GoldenResult evaluate_golden(const Golden& g);

/// Closed-form weighted connection coefficients, gamma(k, i, j).
using ChristoffelTable = std::function<Tensor3(const Vector&)>;

struct LeviCivitaData {
  std::vector<std::string> phis;
  std::vector<std::string> as;
  int sign = 1;  // overall sign applied to the companion
};

/// Coordinate slice that is totally geodesic, with loops inside it.
struct GeodesicSlice {
  SliceSpec spec;
  std::vector<Loop> loops;
  bool coupling_vanishes = false;  // grad phi tangent to the slice
};

struct CatalogEntry {
  CatalogEntry(std::string name, WeightedManifold manifold) : name(std::move(name)), manifold(std::move(manifold)) {}

  std::string name;
  WeightedManifold manifold;
  std::optional<WeightedManifold> companion;  // metric whose Levi-Civita connection equals the weighted one
  std::optional<LeviCivitaData> lc;
  std::optional<ExpressionManifoldSpec> expressions;  // same manifold through the parser

  Vector basepoint;
  Box region;                       // sampling box for points and loops
  std::optional<ChristoffelTable> christoffel_table;
  std::vector<Golden> goldens;
  std::vector<LoopFamily> families; // generators for algebra runs
  std::vector<GeodesicSlice> slices;
  std::optional<Matrix> self_duality;  // dF at the basepoint for a map with F*g = e^{-2phi} g, F*phi = -phi
  bool riemannian() const { return manifold.metric().signature().riemannian(); }
};

/// Max error of the closed-form table against computed weighted coefficients
/// at `points` seeded random points of the entry's region.
GoldenResult check_christoffel_table(const CatalogEntry& entry, int points = 20, std::uint64_t seed = 7);

CatalogEntry sphere_with_density(int n);
CatalogEntry borel_2d();
CatalogEntry triangular_family(int n);

/// Levi-Civita projective pair: g = sum Pi_i A_i dx_i^2, companion
/// +-sum rho_i Pi_i A_i dx_i^2, phi = (1/2) sum log|phi_i|. Each phi_i and
/// A_i is an expression in coordinate i only.
CatalogEntry levi_civita_pair(const std::string& name, const std::vector<std::string>& names,
                              const std::vector<std::string>& phis, const std::vector<std::string>& as, const Box& domain);

CatalogEntry so_pq_example(int p, int q);
CatalogEntry so_plus_11_2d();

/// Seeded LC family with oscillating, well-separated phi_i on (-2, 2)^n.
CatalogEntry random_levi_civita_family(int n, std::uint64_t seed);

/// Resolves "sphere2", "sphereN(3)", "borel2d", "triangular(3)", "so_pq(1,2)", "so11_2d",
/// "lc_random(3,7)".
CatalogEntry make_entry(const std::string& name);

/// Stable names with default parameters, for listing.
std::vector<std::string> catalog_names();

}  // namespace hololab
