#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields second
// derivatives: seed the outer epsilon with one direction and the inner with
// another, and read the mixed partial from .eps.eps.

#include <cmath>
#include <type_traits>

namespace hololab {

template <class T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), eps(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T v, T e) : val(v), eps(e) {}

  Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend Dual operator-(const Dual& a) { return {-a.val, -a.eps}; }
  friend Dual operator+(const Dual& a) { return a; }

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.eps + b.eps}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.eps - b.eps}; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.eps * b.val + a.val * b.eps};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T inv = T(1.0) / b.val;
    T q = a.val * inv;
    return {q, (a.eps - q * b.eps) * inv};
  }

  friend Dual operator+(const Dual& a, double b) { return {a.val + b, a.eps}; }
  friend Dual operator+(double a, const Dual& b) { return {a + b.val, b.eps}; }
  friend Dual operator-(const Dual& a, double b) { return {a.val - b, a.eps}; }
  friend Dual operator-(double a, const Dual& b) { return {a - b.val, -b.eps}; }
  friend Dual operator*(const Dual& a, double b) { return {a.val * b, a.eps * b}; }
  friend Dual operator*(double a, const Dual& b) { return {a * b.val, a * b.eps}; }
  friend Dual operator/(const Dual& a, double b) { return {a.val / b, a.eps / b}; }
  friend Dual operator/(double a, const Dual& b) { return Dual(a) / b; }
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

/// Innermost real value of a (possibly nested) dual number.
inline double real_part(double x) { return x; }
template <class T>
double real_part(const Dual<T>& x) {
  return real_part(x.val);
}

using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;

template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.val), cos(a.val) * a.eps};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.val), -sin(a.val) * a.eps};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  T t = tan(a.val);
  return {t, (1.0 + t * t) * a.eps};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.val);
  return {e, e * a.eps};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.val), a.eps / a.val};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.val);
  return {s, a.eps / (2.0 * s)};
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  return {sinh(a.val), cosh(a.val) * a.eps};
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  return {cosh(a.val), sinh(a.val) * a.eps};
}

/// |a| away from zero; the kink at zero is excluded by callers.
inline double abs_value(double a) { return std::abs(a); }
template <class T>
Dual<T> abs_value(const Dual<T>& a) {
  return real_part(a) < 0.0 ? -a : a;
}

/// a^k for integer k, valid for any nonzero base (and zero base when k >= 0).
inline double int_pow(double a, long k) { return std::pow(a, static_cast<double>(k)); }
template <class T>
Dual<T> int_pow(const Dual<T>& a, long k) {
  if (k == 0) return Dual<T>(1.0);
  return {int_pow(a.val, k), static_cast<double>(k) * int_pow(a.val, k - 1) * a.eps};
}

}  // namespace hololab
