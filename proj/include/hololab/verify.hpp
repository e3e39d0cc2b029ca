#pragma once

#include "hololab/catalog.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hololab {

struct CheckDetail {
  std::string where;          // "point 3", "path 7", "loop 2"
  std::vector<double> point;  // sample point, path start or loop basepoint
  double value = 0.0;
};

struct CheckReport {
  std::string check_name;
  std::string entry_name;
  int samples = 0;
  double max_violation = 0.0;
  double tol = 0.0;
  bool passed = false;
  std::vector<CheckDetail> details;  // worst cases first, at most five
};

nlohmann::json to_json(const CheckReport& r);
CheckReport check_report_from_json(const nlohmann::json& j);

/// h(P X, P* Y) at the endpoint against h(X, Y) at the start, h = e^{-phi} g,
/// over random open paths; P weighted, P* dual weighted. Riemannian entries only.
CheckReport check_duality_pairing(const CatalogEntry& entry, int n_paths = 20, std::uint64_t seed = 1);

/// P* = H^{-1} P^{-T} H around random loops, H = h at the basepoint.
CheckReport check_dual_holonomy(const CatalogEntry& entry, int n_loops = 20, std::uint64_t seed = 1);

/// A weighted-parallel V and the dual-parallel covector h(V0, .) stay h-dual.
CheckReport check_dual_vector_fields(const CatalogEntry& entry, int n_paths = 20, std::uint64_t seed = 1);

/// Weighted derivative of h is totally symmetric and equals the Amari-Chentsov
/// tensor D; the dual derivative equals -D.
CheckReport check_codazzi(const CatalogEntry& entry, int n_points = 50, std::uint64_t seed = 1);

/// Levi-Civita coefficients of the companion against the weighted ones.
CheckReport check_projective_equivalence(const CatalogEntry& entry, int n_points = 50, std::uint64_t seed = 1);

/// Predicted block transport against ambient holonomy for loops inside a
/// totally geodesic slice; with coupling_vanishes the coupling block must be 0.
CheckReport check_totally_geodesic_blocks(const CatalogEntry& entry, const GeodesicSlice& slice);

/// |det P - 1| around random loops.
CheckReport check_unimodularity(const CatalogEntry& entry, int n_loops = 20, std::uint64_t seed = 1);

struct SuiteOptions {
  std::vector<std::string> checks;  // empty: all
  int points = 50;
  int paths = 20;
  int loops = 20;
  std::uint64_t seed = 1;
  double tol_scale = 1.0;  // multiplies every check tolerance
};

std::vector<std::string> check_names();

/// Runs every applicable selected check on every entry. Reports are ordered
/// by (check_name, entry_name). Unknown check names raise ConfigError.
std::vector<CheckReport> run_checks(const std::vector<CatalogEntry>& entries, const SuiteOptions& opts = {});

/// Catalog entries covered by the default suite.
std::vector<CatalogEntry> default_suite_entries();

}  // namespace hololab
