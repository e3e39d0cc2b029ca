#pragma once

#include "hololab/catalog.hpp"
#include "hololab/liealg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hololab {

struct AlgebraOptions {
  int random_loops = 40;
  double log_radius = 0.5;     // loops with |P - I| below this feed mat_log,
                               // unless log P is too small to rise above rounding
  bool use_families = true;    // include the entry's loop families
  bool use_self_duality = true;
  double rank_tol = 1e-8;
  double classify_tol = 1e-6;
  IntegratorOptions integrator;
};

struct AlgebraGenerator {
  std::string source;  // "loop 3", "family 0", "dual of loop 3"
  Matrix element;
};

struct AlgebraResult {
  int loops_sampled = 0;
  int loops_used = 0;
  double max_det_deviation = 0.0;   // over all sampled loop holonomies
  double max_trace = 0.0;           // over the closure basis
  double closure_tol = 0.0;         // rank_tol, raised to the family derivatives' relative error
  std::vector<AlgebraGenerator> generators;
  LieAlgebraBasis basis{1};
  std::optional<Matrix> form;       // companion metric at the basepoint
  AlgebraTag tag;
  bool strictly_upper_triangular = false;
};

/// Operator 1-norm.
double norm1(const Matrix& a);

/// Samples seeded loops at the entry's basepoint plus `extra_loops`, takes
/// principal logs of holonomies near the identity, adds family derivatives
/// and (with a self-duality map) their dual images, then closes and classifies.
AlgebraResult algebra_experiment(const CatalogEntry& entry, ConnectionKind kind, std::uint64_t seed,
                                 const AlgebraOptions& opts = {}, const std::vector<Loop>& extra_loops = {},
                                 const std::vector<LoopFamily>& extra_families = {});

/// For A in the holonomy algebra and a self-duality map with derivative dF at
/// the basepoint, the element -H^{-1} (dF A dF^{-1})^T H, H = e^{-phi} g there.
Matrix self_dual_image(const Matrix& a, const Matrix& dF, const Matrix& h);

}  // namespace hololab
