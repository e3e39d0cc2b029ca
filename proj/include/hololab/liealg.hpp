#pragma once

#include "hololab/error.hpp"
#include "hololab/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hololab {

Matrix bracket(const Matrix& a, const Matrix& b);

/// Scaling and squaring with a Taylor series; exp(0) is exactly I.
Matrix mat_exp(const Matrix& a);

/// Principal logarithm via repeated square roots and the Mercator series.
/// Throws LogUndefined for an eigenvalue on the closed negative real axis.
Matrix mat_log(const Matrix& p);

/// Frobenius-orthonormal basis of a matrix subspace.
class LieAlgebraBasis {
 public:
  explicit LieAlgebraBasis(int n, double rank_tol = 1e-8) : n_(n), rank_tol_(rank_tol) {}

  int ambient_dim() const noexcept { return n_; }
  int dim() const noexcept { return static_cast<int>(basis_.size()); }
  double rank_tol() const noexcept { return rank_tol_; }
  const std::vector<Matrix>& elements() const noexcept { return basis_; }

  /// Frobenius norm of the part of `a` orthogonal to the span, after scaling
  /// `a` to unit norm. Zero matrices give 0.
  double residual(const Matrix& a) const;

  /// Adds the normalized orthogonal part of `a` when residual(a) > rank_tol.
  bool insert(const Matrix& a);

 private:
  Matrix orthogonal_part(const Matrix& unit) const;

  int n_;
  double rank_tol_;
  std::vector<Matrix> basis_;
};

/// Returns the updated basis and whether `a` enlarged it.
std::pair<LieAlgebraBasis, bool> span_insert(LieAlgebraBasis basis, const Matrix& a);

/// Bracket closure in deterministic order; stops at max_dim.
LieAlgebraBasis closure(const std::vector<Matrix>& generators, int max_dim = -1, double rank_tol = 1e-8);

struct AlgebraTag {
  enum class Kind {
    Trivial,
    Abelian1D_Nilpotent,
    SO2,
    SOplus11,
    Borel2D,
    SL,
    SOpq,
    Heisenberg,
    StrictlyUpperTriangular,
    Unclassified,
  };

  Kind kind = Kind::Trivial;
  int p = 0;    // SOpq: positive eigenvalues of the form
  int q = 0;    // SOpq: negative eigenvalues of the form
  int dim = 0;  // Unclassified

  std::string name() const;
  friend bool operator==(const AlgebraTag&, const AlgebraTag&) = default;
};

AlgebraTag classify(const LieAlgebraBasis& basis, const std::optional<Matrix>& form = std::nullopt,
                    double tol = 1e-6);

}  // namespace hololab
