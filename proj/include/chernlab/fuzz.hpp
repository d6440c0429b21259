#pragma once

// Random inputs for identity fuzzing. Every trial draws from its own engine
// seeded by derive_seed(root, trial), so trials are independent and the
// sequence is reproducible from the root seed alone.

#include <cstdint>
#include <random>
#include <vector>

#include "chernlab/exterior_algebra.hpp"
#include "chernlab/invariant_polynomials.hpp"

namespace chernlab::fuzz {

using Engine = std::mt19937_64;

// splitmix64 finalizer over root + trial.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline long uniform_int(Engine& rng, long lo, long hi) {
  // Plain modulo keeps the draw sequence identical across standard libraries.
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<long>(rng() % span);
}

inline double uniform_real(Engine& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

template <class S>
S random_scalar(Engine& rng);

template <>
inline double random_scalar<double>(Engine& rng) {
  return uniform_real(rng, -1.0, 1.0);
}

template <>
inline Rational random_scalar<Rational>(Engine& rng) {
  Rational q(uniform_int(rng, -9, 9), uniform_int(rng, 1, 4));
  q.canonicalize();
  return q;
}

template <>
inline Complex random_scalar<Complex>(Engine& rng) {
  return {uniform_real(rng, -1.0, 1.0), uniform_real(rng, -1.0, 1.0)};
}

// Homogeneous form of the given degree; each basis monomial is kept with
// probability `density`.
template <class S>
Form<S> random_form(Engine& rng, int ambient_dim, int degree, double density = 1.0) {
  std::vector<typename Form<S>::Term> terms;
  const std::uint32_t limit = ambient_dim >= 32 ? 0xffffffffu : (1u << ambient_dim);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (std::popcount(mask) != degree) continue;
    if (density < 1.0 && uniform_real(rng, 0.0, 1.0) > density) continue;
    terms.push_back({mask, random_scalar<S>(rng)});
  }
  return Form<S>::from_terms(ambient_dim, std::move(terms));
}

// Random skew matrix with homogeneous entries of the given degree.
template <class S>
FormMatrix<S> random_skew(Engine& rng, int size, int ambient_dim, int degree, double density = 1.0) {
  FormMatrix<S> a(size, size, ambient_dim);
  for (int i = 0; i < size; ++i)
    for (int j = i + 1; j < size; ++j) {
      a(i, j) = random_form<S>(rng, ambient_dim, degree, density);
      a(j, i) = -a(i, j);
    }
  return a;
}

template <class S>
FormMatrix<S> random_matrix(Engine& rng, int rows, int cols, int ambient_dim, int degree, double density = 1.0) {
  FormMatrix<S> a(rows, cols, ambient_dim);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = random_form<S>(rng, ambient_dim, degree, density);
  return a;
}

template <class S>
LieAlgebraElement<S> random_lie_element(Engine& rng, int n) {
  LieAlgebraElement<S> el{n, Matrix<S>(n, n), Matrix<S>(n, n)};
  for (int i = 0; i < n; ++i) {
    el.b(i, i) = random_scalar<S>(rng);
    for (int j = i + 1; j < n; ++j) {
      el.a(i, j) = random_scalar<S>(rng);
      el.a(j, i) = S(-el.a(i, j));
      el.b(i, j) = random_scalar<S>(rng);
      el.b(j, i) = el.b(i, j);
    }
  }
  return el;
}

// Omega with 2-form entries and Omega + conj(Omega)^t = 0 entrywise.
inline FormMatrix<Complex> random_skew_hermitian(Engine& rng, int n, int ambient_dim, double density = 1.0) {
  FormMatrix<Complex> omega(n, n, ambient_dim);
  const Complex i_unit{0.0, 1.0};
  for (int i = 0; i < n; ++i) {
    omega(i, i) = i_unit * form_cast<Complex>(random_form<double>(rng, ambient_dim, 2, density));
    for (int j = i + 1; j < n; ++j) {
      Form<Complex> re = form_cast<Complex>(random_form<double>(rng, ambient_dim, 2, density));
      Form<Complex> im = form_cast<Complex>(random_form<double>(rng, ambient_dim, 2, density));
      omega(i, j) = re + i_unit * im;
      omega(j, i) = -omega(i, j).conjugate();
    }
  }
  return omega;
}

}  // namespace chernlab::fuzz
