#pragma once

// Small dense scalar matrices and determinants: fraction-free (Bareiss)
// elimination for exact fields, partial-pivoting LU for complex doubles.

#include <cmath>
#include <utility>
#include <vector>

#include "chernlab/errors.hpp"
#include "chernlab/scalar.hpp"

namespace chernlab {

template <class S>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<S> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), ScalarTraits<S>::from_int(0)) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = ScalarTraits<S>::from_int(1);
    return m;
  }

  S& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  const S& operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }

  Matrix transpose() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw UsageError("matrix product: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
      for (int k = 0; k < a.cols; ++k)
        for (int j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
  }
};

// Bareiss fraction-free elimination; every division is exact.
template <class S>
S determinant_exact(Matrix<S> a) {
  if (a.rows != a.cols) throw UsageError("determinant of non-square matrix");
  const int n = a.rows;
  if (n == 0) return ScalarTraits<S>::from_int(1);
  S prev = ScalarTraits<S>::from_int(1);
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (ScalarTraits<S>::is_zero(a(k, k))) {
      int p = k + 1;
      while (p < n && ScalarTraits<S>::is_zero(a(p, k))) ++p;
      if (p == n) return ScalarTraits<S>::from_int(0);
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        S v = S(a(i, j) * a(k, k)) - S(a(i, k) * a(k, j));
        a(i, j) = S(v / prev);
      }
    }
    prev = a(k, k);
  }
  S det = a(n - 1, n - 1);
  return sign < 0 ? S(-det) : det;
}

// LU with partial pivoting.
template <class S>
S determinant_lu(Matrix<S> a) {
  if (a.rows != a.cols) throw UsageError("determinant of non-square matrix");
  const int n = a.rows;
  S det = ScalarTraits<S>::from_int(1);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = ScalarTraits<S>::magnitude(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = ScalarTraits<S>::magnitude(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) return ScalarTraits<S>::from_int(0);
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      det = -det;
    }
    det *= a(k, k);
    for (int i = k + 1; i < n; ++i) {
      S f = a(i, k) / a(k, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

// Gauss-Jordan with partial pivoting (floating types).
template <class S>
Matrix<S> inverse(Matrix<S> a) {
  if (a.rows != a.cols) throw UsageError("inverse of non-square matrix");
  const int n = a.rows;
  Matrix<S> inv = Matrix<S>::identity(n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (ScalarTraits<S>::magnitude(a(i, k)) > ScalarTraits<S>::magnitude(a(p, k))) p = i;
    if (ScalarTraits<S>::magnitude(a(p, k)) == 0.0) throw DomainError("inverse: singular matrix");
    for (int j = 0; j < n; ++j) {
      std::swap(a(k, j), a(p, j));
      std::swap(inv(k, j), inv(p, j));
    }
    const S pivot = a(k, k);
    for (int j = 0; j < n; ++j) {
      a(k, j) /= pivot;
      inv(k, j) /= pivot;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const S f = a(i, k);
      for (int j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

template <class S>
Matrix<S> operator+(const Matrix<S>& a, const Matrix<S>& b) {
  Matrix<S> c = a;
  for (std::size_t k = 0; k < c.data.size(); ++k) c.data[k] += b.data[k];
  return c;
}
template <class S>
Matrix<S> operator-(const Matrix<S>& a, const Matrix<S>& b) {
  Matrix<S> c = a;
  for (std::size_t k = 0; k < c.data.size(); ++k) c.data[k] -= b.data[k];
  return c;
}

}  // namespace chernlab
