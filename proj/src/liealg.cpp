#include "hololab/liealg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hololab {

namespace {

double norm1(const Matrix& a) { return a.size() ? a.cwiseAbs().colwise().sum().maxCoeff() : 0.0; }

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " needs a square matrix");
}

// Denman-Beavers iteration for the principal square root.
Matrix sqrtm(const Matrix& x) {
  const auto n = x.rows();
  Matrix y = x;
  Matrix z = Matrix::Identity(n, n);
  for (int it = 0; it < 100; ++it) {
    const Matrix yi = y.partialPivLu().inverse();
    const Matrix zi = z.partialPivLu().inverse();
    const Matrix y1 = 0.5 * (y + zi);
    z = 0.5 * (z + yi);
    const double change = norm1(y1 - y);
    y = y1;
    if (change <= 1e-15 * norm1(y)) break;
  }
  return y;
}

}  // namespace

Matrix bracket(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorCode::ShapeMismatch, "bracket of matrices with different shapes");
  return a * b - b * a;
}

Matrix mat_exp(const Matrix& a) {
  require_square(a, "mat_exp");
  const auto n = a.rows();
  const Matrix I = Matrix::Identity(n, n);

  // Nilpotent input: the series is finite, sum it directly.
  {
    Matrix power = I;
    Matrix sum = I;
    double fact = 1.0;
    bool nilpotent = false;
    for (Eigen::Index k = 1; k <= n; ++k) {
      power = power * a;
      if ((power.array() == 0.0).all()) {
        nilpotent = true;
        break;
      }
      fact *= static_cast<double>(k);
      sum += power / fact;
    }
    if (nilpotent) return sum;
  }

  const double norm = norm1(a);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix x = a / std::ldexp(1.0, squarings);
  Matrix sum = I;
  Matrix term = I;
  for (int k = 1; k < 40; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
    if (norm1(term) <= 1e-18 * norm1(sum)) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Matrix mat_log(const Matrix& p) {
  require_square(p, "mat_log");
  const auto n = p.rows();
  const Matrix I = Matrix::Identity(n, n);
  Eigen::EigenSolver<Matrix> es(p, false);
  const double scale = std::max(1.0, norm1(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) <= 1e-14 * scale && ev.real() <= 1e-14 * scale)
      throw Error(ErrorCode::LogUndefined, "eigenvalue " + std::to_string(ev.real()) + " on the closed negative axis");
  }

  Matrix x = p;
  int roots = 0;
  while (norm1(x - I) >= 0.5) {
    if (roots == 64) throw Error(ErrorCode::LogUndefined, "square roots failed to approach the identity");
    x = sqrtm(x);
    ++roots;
  }
  const Matrix e = x - I;
  Matrix power = e;
  Matrix sum = e;
  for (int k = 2; k < 200; ++k) {
    power = power * e;
    const Matrix term = power / static_cast<double>(k);
    if (k % 2 == 0) sum -= term;
    else sum += term;
    if (norm1(term) <= 1e-17 * std::max(1e-300, norm1(sum))) break;
  }
  return std::ldexp(1.0, roots) * sum;
}

// ---------------------------------------------------------------------------

Matrix LieAlgebraBasis::orthogonal_part(const Matrix& unit) const {
  Matrix r = unit;
  for (int pass = 0; pass < 2; ++pass)
    for (const Matrix& b : basis_) r -= (r.array() * b.array()).sum() * b;
  return r;
}

double LieAlgebraBasis::residual(const Matrix& a) const {
  if (a.rows() != n_ || a.cols() != n_) throw Error(ErrorCode::ShapeMismatch, "element has wrong shape for the basis");
  const double norm = a.norm();
  if (norm == 0.0) return 0.0;
  return orthogonal_part(a / norm).norm();
}

bool LieAlgebraBasis::insert(const Matrix& a) {
  if (a.rows() != n_ || a.cols() != n_) throw Error(ErrorCode::ShapeMismatch, "element has wrong shape for the basis");
  const double norm = a.norm();
  if (!(norm > 0.0) || static_cast<int>(basis_.size()) >= n_ * n_) return false;
  const Matrix r = orthogonal_part(a / norm);
  const double res = r.norm();
  if (!(res > rank_tol_)) return false;
  basis_.push_back(r / res);
  return true;
}

std::pair<LieAlgebraBasis, bool> span_insert(LieAlgebraBasis basis, const Matrix& a) {
  const bool inserted = basis.insert(a);
  return {std::move(basis), inserted};
}

LieAlgebraBasis closure(const std::vector<Matrix>& generators, int max_dim, double rank_tol) {
  if (generators.empty()) throw Error(ErrorCode::InvalidArgument, "closure needs at least one generator");
  const int n = static_cast<int>(generators.front().rows());
  if (max_dim < 0) max_dim = n * n;
  LieAlgebraBasis basis(n, rank_tol);
  for (const Matrix& g : generators) {
    if (basis.dim() >= max_dim) return basis;
    basis.insert(g);
  }
  for (int j = 1; j < basis.dim(); ++j) {
    for (int i = 0; i < j; ++i) {
      if (basis.dim() >= max_dim) return basis;
      const auto& e = basis.elements();
      const Matrix c = bracket(e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(j)]);
      // Brackets of unit elements that vanish up to rounding are not new
      // directions, so compare the absolute residual.
      if (basis.residual(c) * c.norm() > rank_tol) basis.insert(c);
    }
  }
  return basis;
}

// ---------------------------------------------------------------------------

std::string AlgebraTag::name() const {
  switch (kind) {
    case Kind::Trivial: return "Trivial";
    case Kind::Abelian1D_Nilpotent: return "Abelian1D_Nilpotent";
    case Kind::SO2: return "SO2";
    case Kind::SOplus11: return "SOplus11";
    case Kind::Borel2D: return "Borel2D";
    case Kind::SL: return "SL";
    case Kind::SOpq: return "SOpq(" + std::to_string(p) + "," + std::to_string(q) + ")";
    case Kind::Heisenberg: return "Heisenberg";
    case Kind::StrictlyUpperTriangular: return "StrictlyUpperTriangular";
    case Kind::Unclassified: return "Unclassified(" + std::to_string(dim) + ")";
  }
  return "?";
}

AlgebraTag classify(const LieAlgebraBasis& basis, const std::optional<Matrix>& form, double tol) {
  using K = AlgebraTag::Kind;
  const int n = basis.ambient_dim();
  const int d = basis.dim();
  const auto& el = basis.elements();
  if (d == 0) return {K::Trivial};

  auto all = [&](auto pred) {
    for (const Matrix& a : el)
      if (!pred(a)) return false;
    return true;
  };
  auto strictly_upper = [&](const Matrix& a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        if (std::abs(a(i, j)) > tol) return false;
    return true;
  };
  auto upper = [&](const Matrix& a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(a(i, j)) > tol) return false;
    return true;
  };
  auto traceless = [&](const Matrix& a) { return std::abs(a.trace()) <= tol; };

  if (all(strictly_upper)) {
    if (n == 3 && d == 3) return {K::Heisenberg};
    if (n == 2 && d == 1) return {K::Abelian1D_Nilpotent};
    if (d == n * (n - 1) / 2) return {K::StrictlyUpperTriangular};
  }
  if (form) {
    const Matrix& eta = *form;
    if (eta.rows() != n || eta.cols() != n) throw Error(ErrorCode::ShapeMismatch, "form has wrong shape");
    const double scale = std::max(1.0, eta.cwiseAbs().maxCoeff());
    const bool preserves = all([&](const Matrix& a) {
      return (a.transpose() * eta + eta * a).cwiseAbs().maxCoeff() <= tol * scale;
    });
    if (preserves && d == n * (n - 1) / 2) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (eta + eta.transpose()), Eigen::EigenvaluesOnly);
      int pos = 0, neg = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (es.eigenvalues()[i] > 0) ++pos;
        else if (es.eigenvalues()[i] < 0) ++neg;
      }
      if (n == 2) return {pos == 2 || neg == 2 ? K::SO2 : K::SOplus11};
      return {K::SOpq, pos, neg};
    }
  }
  if (d == n * n - 1 && all(traceless)) return {K::SL};
  if (n == 2 && d == 2 && all(upper) && all(traceless)) return {K::Borel2D};
  if (n == 2 && d == 1 && (el[0] * el[0]).cwiseAbs().maxCoeff() <= tol) return {K::Abelian1D_Nilpotent};
  return {K::Unclassified, 0, 0, d};
}

}  // namespace hololab
