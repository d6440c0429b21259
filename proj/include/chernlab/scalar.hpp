#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <gmpxx.h>

namespace chernlab {

using Rational = mpq_class;
using Complex = std::complex<double>;

// Exact element of Q(i). std::complex<T> is unspecified for non-floating T.
struct GaussianRational {
  Rational re;
  Rational im;

  GaussianRational() = default;
  GaussianRational(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussianRational(int r) : re(r) {}  // NOLINT(google-explicit-constructor)

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    Rational den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
  GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
  GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
};

enum class ScalarKind { Real, Complex };

// Per-scalar policy: exactness, magnitude for pruning/reporting, conjugation.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr ScalarKind kind = ScalarKind::Real;
  static double magnitude(double x) { return std::abs(x); }
  static double conj(double x) { return x; }
  static double from_int(long v) { return static_cast<double>(v); }
  static bool is_zero(double x) { return x == 0.0; }
};

template <>
struct ScalarTraits<Complex> {
  static constexpr bool exact = false;
  static constexpr ScalarKind kind = ScalarKind::Complex;
  static double magnitude(const Complex& x) { return std::abs(x); }
  static Complex conj(const Complex& x) { return std::conj(x); }
  static Complex from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static bool is_zero(const Complex& x) { return x == Complex{}; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr ScalarKind kind = ScalarKind::Real;
  static double magnitude(const Rational& x) { return std::abs(x.get_d()); }
  static Rational conj(const Rational& x) { return x; }
  static Rational from_int(long v) { return Rational(v); }
  static bool is_zero(const Rational& x) { return sgn(x) == 0; }
};

template <>
struct ScalarTraits<GaussianRational> {
  static constexpr bool exact = true;
  static constexpr ScalarKind kind = ScalarKind::Complex;
  static double magnitude(const GaussianRational& x) { return std::hypot(x.re.get_d(), x.im.get_d()); }
  static GaussianRational conj(const GaussianRational& x) { return {x.re, -x.im}; }
  static GaussianRational from_int(long v) { return GaussianRational(Rational(v)); }
  static bool is_zero(const GaussianRational& x) { return sgn(x.re) == 0 && sgn(x.im) == 0; }
};

inline std::string to_string(ScalarKind k) { return k == ScalarKind::Real ? "real" : "complex"; }

}  // namespace chernlab
