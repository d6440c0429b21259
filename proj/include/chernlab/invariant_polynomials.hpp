#pragma once

// Pfaffians, determinants and the characteristic forms built from them, plus
// the u(n) -> so(2n) realification with its interleaved basis ordering.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "chernlab/exterior_algebra.hpp"
#include "chernlab/linalg.hpp"

namespace chernlab {

namespace detail {

template <class S>
S inverse_of_int(long k) {
  if constexpr (std::is_same_v<S, Rational>) {
    return Rational(1, k);
  } else if constexpr (std::is_same_v<S, GaussianRational>) {
    return GaussianRational(Rational(1, k));
  } else {
    return S(1.0 / static_cast<double>(k));
  }
}

inline long factorial(int n) {
  long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Parity of a permutation given as a sequence of distinct integers.
inline int permutation_sign(const std::vector<int>& seq) {
  int inversions = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) ++inversions;
  return (inversions & 1) ? -1 : 1;
}

template <class S>
double skew_tolerance() {
  return ScalarTraits<S>::exact ? 0.0 : 1e-12;
}

template <class S>
void require_pfaffian_input(const FormMatrix<S>& a, bool allow_odd_entries = false) {
  if (!a.is_square()) throw UsageError("pfaffian: matrix must be square");
  if (a.rows() % 2 != 0) throw UsageError("pfaffian: matrix size must be even");
  if (!a.is_skew(skew_tolerance<S>())) throw UsageError("pfaffian: matrix must be skew-symmetric");
  if (!allow_odd_entries && !a.is_even()) throw UsageError("pfaffian: entries must have even degree");
}

template <class S>
void enumerate_matchings(std::vector<int>& remaining, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (remaining.empty()) {
    out.push_back(current);
    return;
  }
  const int first = remaining.front();
  for (std::size_t t = 1; t < remaining.size(); ++t) {
    const int partner = remaining[t];
    std::vector<int> rest;
    rest.reserve(remaining.size() - 2);
    for (std::size_t u = 1; u < remaining.size(); ++u)
      if (u != t) rest.push_back(remaining[u]);
    current.push_back(first);
    current.push_back(partner);
    enumerate_matchings<S>(rest, current, out);
    current.pop_back();
    current.pop_back();
  }
}

// Perfect matchings of {0..2n-1}, each flattened as (i1 j1 i2 j2 ...) with i_k < j_k.
inline const std::vector<std::vector<int>>& perfect_matchings(int size) {
  static thread_local std::unordered_map<int, std::vector<std::vector<int>>> cache;
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  std::vector<int> all(static_cast<std::size_t>(size));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> current;
  std::vector<std::vector<int>> out;
  enumerate_matchings<int>(all, current, out);
  return cache.emplace(size, std::move(out)).first->second;
}

template <class S>
Form<S> pfaffian_recursive(const FormMatrix<S>& a, std::uint32_t remaining,
                           std::unordered_map<std::uint32_t, Form<S>>& memo) {
  if (remaining == 0) return Form<S>::constant(a.ambient_dim(), ScalarTraits<S>::from_int(1));
  auto it = memo.find(remaining);
  if (it != memo.end()) return it->second;
  const int first = std::countr_zero(remaining);
  std::uint32_t rest = remaining & ~(1u << first);
  Form<S> acc(a.ambient_dim());
  int sign = 1;
  for (std::uint32_t m = rest; m != 0; m &= m - 1) {
    const int j = std::countr_zero(m);
    const Form<S>& entry = a(first, j);
    if (!entry.is_zero()) {
      Form<S> minor = pfaffian_recursive(a, rest & ~(1u << j), memo);
      Form<S> term = wedge(entry, minor);
      acc += sign > 0 ? term : -term;
    }
    sign = -sign;
  }
  memo.emplace(remaining, acc);
  return acc;
}

}  // namespace detail

// Pf(A) for a skew matrix with even-degree (hence commuting) entries.
// Sizes up to 8 sum over perfect matchings; larger sizes use first-row
// expansion memoized over the set of remaining indices.
template <class S>
Form<S> pfaffian(const FormMatrix<S>& a) {
  detail::require_pfaffian_input(a);
  const int size = a.rows();
  const int m = a.ambient_dim();
  if (size == 0) return Form<S>::constant(m, ScalarTraits<S>::from_int(1));
  if (size > 8) {
    if (size > 30) throw UsageError("pfaffian: matrix too large");
    std::unordered_map<std::uint32_t, Form<S>> memo;
    return detail::pfaffian_recursive(a, (1u << size) - 1u, memo);
  }
  Form<S> acc(m);
  for (const auto& matching : detail::perfect_matchings(size)) {
    Form<S> prod = Form<S>::constant(m, ScalarTraits<S>::from_int(1));
    bool zero = false;
    for (std::size_t k = 0; k < matching.size(); k += 2) {
      const Form<S>& entry = a(matching[k], matching[k + 1]);
      if (entry.is_zero()) {
        zero = true;
        break;
      }
      prod = wedge(prod, entry);
      if (prod.is_zero()) {
        zero = true;
        break;
      }
    }
    if (zero) continue;
    acc += detail::permutation_sign(matching) > 0 ? prod : -prod;
  }
  return acc;
}

// Pf(A) from its defining identity: with T = e ^ A e^t in an auxiliary
// exterior algebra on 2n generators e_1..e_2n, T^n / (2^n n!) equals
// Pf(A) e_1 ^ ... ^ e_2n. The auxiliary generators are appended after the
// entries' own ambient generators (tensor grading).
template <class S>
Form<S> pfaffian_oracle(const FormMatrix<S>& a) {
  detail::require_pfaffian_input(a);
  const int size = a.rows();
  const int n = size / 2;
  const int m = a.ambient_dim();
  const int big = m + size;
  if (big > kMaxAmbientDim) throw UsageError("pfaffian_oracle: ambient plus auxiliary dimension exceeds 32");
  if (size == 0) return Form<S>::constant(m, ScalarTraits<S>::from_int(1));

  Form<S> t(big);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      if (i == j || a(i, j).is_zero()) continue;
      Form<S> ei_ej = wedge(Form<S>::dx(big, m + i + 1), Form<S>::dx(big, m + j + 1));
      t += wedge(embed(a(i, j), big, 0), ei_ej);
    }
  Form<S> power = t;
  for (int k = 1; k < n; ++k) power = wedge(power, t);

  const std::uint32_t aux = MultiIndex::full(big).mask() & ~MultiIndex::full(m).mask();
  const std::uint32_t low = MultiIndex::full(m).mask();
  std::vector<typename Form<S>::Term> terms;
  for (const auto& term : power.terms())
    if ((term.mask & aux) == aux) terms.push_back({term.mask & low, term.coeff});
  Form<S> pf = Form<S>::from_terms(m, std::move(terms));
  return detail::inverse_of_int<S>((1L << n) * detail::factorial(n)) * pf;
}

// Symmetric multilinear Pfaffian Pf(A_1, ..., A_n) of n skew 2n x 2n matrices:
// the t_1...t_n coefficient of Pf(t_1 A_1 + ... + t_n A_n), divided by n!,
// extracted by inclusion-exclusion over slot subsets. A slot with odd-degree
// entries is accepted only when n = 1, where Pf(X) = X_12.
template <class S>
Form<S> polarized_pfaffian(const std::vector<FormMatrix<S>>& slots) {
  const int n = static_cast<int>(slots.size());
  if (n == 0) throw UsageError("polarized_pfaffian: need at least one slot");
  for (const auto& s : slots) {
    if (s.rows() != 2 * n || s.cols() != 2 * n)
      throw UsageError("polarized_pfaffian: every slot must be " + std::to_string(2 * n) + "x" + std::to_string(2 * n));
    if (s.ambient_dim() != slots.front().ambient_dim()) throw UsageError("polarized_pfaffian: ambient dimension mismatch");
  }
  const bool any_odd = std::any_of(slots.begin(), slots.end(), [](const FormMatrix<S>& s) { return !s.is_even(); });
  if (any_odd) {
    if (n != 1) throw UsageError("polarized_pfaffian: odd-degree entries are supported only for a single slot");
    detail::require_pfaffian_input(slots.front(), true);
    return slots.front()(0, 1);
  }
  const int m = slots.front().ambient_dim();
  Form<S> acc(m);
  for (std::uint32_t subset = 1; subset < (1u << n); ++subset) {
    FormMatrix<S> sum(2 * n, 2 * n, m);
    for (int i = 0; i < n; ++i)
      if (subset & (1u << i)) sum = sum + slots[static_cast<std::size_t>(i)];
    Form<S> pf = pfaffian(sum);
    const bool negative = ((n - std::popcount(subset)) & 1) != 0;
    acc += negative ? -pf : pf;
  }
  return detail::inverse_of_int<S>(detail::factorial(n)) * acc;
}

namespace detail {

template <class S>
Form<S> det_laplace(const FormMatrix<S>& a, int row, std::uint32_t used,
                    std::unordered_map<std::uint32_t, Form<S>>& memo) {
  const int n = a.rows();
  if (row == n) return Form<S>::constant(a.ambient_dim(), ScalarTraits<S>::from_int(1));
  auto it = memo.find(used);
  if (it != memo.end()) return it->second;
  Form<S> acc(a.ambient_dim());
  int free_seen = 0;
  for (int j = 0; j < n; ++j) {
    if (used & (1u << j)) continue;
    const Form<S>& entry = a(row, j);
    if (!entry.is_zero()) {
      Form<S> term = wedge(entry, det_laplace(a, row + 1, used | (1u << j), memo));
      acc += (free_seen & 1) ? -term : term;
    }
    ++free_seen;
  }
  memo.emplace(used, acc);
  return acc;
}

}  // namespace detail

// det(A) for a square matrix with even-degree entries: Leibniz sum over
// permutations up to 6x6, row expansion memoized on used columns beyond.
template <class S>
Form<S> det_form(const FormMatrix<S>& a) {
  if (!a.is_square()) throw UsageError("det_form: matrix must be square");
  if (!a.is_even()) throw UsageError("det_form: entries must have even degree");
  const int n = a.rows();
  const int m = a.ambient_dim();
  if (n > 6) {
    if (n > 30) throw UsageError("det_form: matrix too large");
    std::unordered_map<std::uint32_t, Form<S>> memo;
    return detail::det_laplace(a, 0, 0u, memo);
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Form<S> acc(m);
  if (n == 0) return Form<S>::constant(m, ScalarTraits<S>::from_int(1));
  do {
    Form<S> prod = Form<S>::constant(m, ScalarTraits<S>::from_int(1));
    for (int i = 0; i < n && !prod.is_zero(); ++i) prod = wedge(prod, a(i, perm[static_cast<std::size_t>(i)]));
    if (prod.is_zero()) continue;
    acc += detail::permutation_sign(perm) > 0 ? prod : -prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

// Chern forms c_0..c_n of a complex curvature matrix: homogeneous parts of
// det(I + (i/2pi) Omega).
struct ChernForms {
  std::vector<Form<double>> c;
  // max |Im c_k| / max |c_k| over all k, before the imaginary parts are dropped.
  double imaginary_residue = 0.0;
};

std::vector<Form<Complex>> chern_forms_complex(const FormMatrix<Complex>& omega);
ChernForms chern_forms(const FormMatrix<Complex>& omega);

// e = Pf(-Omega / 2pi) for a real skew curvature matrix of even rank.
Form<double> euler_form(const FormMatrix<double>& omega);

struct PontryaginForms {
  std::vector<Form<double>> p;
  // max |c_odd| of the complexification relative to the overall scale.
  double odd_chern_residue = 0.0;
};
// p_k = (-1)^k c_2k of the complexified bundle.
PontryaginForms pontryagin_forms(const FormMatrix<double>& omega);

// Position -> original index map of the oriented real basis
// e_1, e_{n+1}, e_2, e_{n+2}, ..., e_n, e_2n (0-based).
std::vector<int> interleave_order(int n);

// Permutation matrix P with (P M P^t)(p, q) = M(order[p], order[q]).
template <class S>
Matrix<S> interleave_permutation(int n) {
  const auto order = interleave_order(n);
  Matrix<S> p(2 * n, 2 * n);
  for (int pos = 0; pos < 2 * n; ++pos) p(pos, order[static_cast<std::size_t>(pos)]) = ScalarTraits<S>::from_int(1);
  return p;
}

// Element A + iB of u(n): A^t = -A, B^t = B.
template <class S>
struct LieAlgebraElement {
  int n = 0;
  Matrix<S> a;
  Matrix<S> b;

  bool is_valid(double tol = 0.0) const {
    if (a.rows != n || a.cols != n || b.rows != n || b.cols != n) return false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (ScalarTraits<S>::magnitude(S(a(i, j) + a(j, i))) > tol) return false;
        if (ScalarTraits<S>::magnitude(S(b(i, j) - b(j, i))) > tol) return false;
      }
    return true;
  }
};

// C = P [[A, B], [-B, A]] P^t in the interleaved ordering; C is skew.
template <class S>
Matrix<S> realify_lie(const LieAlgebraElement<S>& el) {
  if (el.n < 1 || !el.is_valid(ScalarTraits<S>::exact ? 0.0 : 1e-12))
    throw UsageError("realify_lie: need A^t = -A and B^t = B");
  const int n = el.n;
  Matrix<S> block(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      block(i, j) = el.a(i, j);
      block(i, n + j) = el.b(i, j);
      block(n + i, j) = S(-el.b(i, j));
      block(n + i, n + j) = el.a(i, j);
    }
  const auto order = interleave_order(n);
  Matrix<S> c(2 * n, 2 * n);
  for (int p = 0; p < 2 * n; ++p)
    for (int q = 0; q < 2 * n; ++q) c(p, q) = block(order[static_cast<std::size_t>(p)], order[static_cast<std::size_t>(q)]);
  return c;
}

struct Lemma21Result {
  double pfaffian = 0.0;
  double determinant = 0.0;
  // |Pf(C) - det(-i(A + iB))| relative to the Hadamard bound of A + iB (float),
  // or 0/1 for exact agreement/disagreement (exact).
  double residual = 0.0;
  double imaginary_residue = 0.0;
  bool exact = false;
  bool pass = false;
};

Lemma21Result verify_lemma21(const LieAlgebraElement<Rational>& el);
Lemma21Result verify_lemma21(const LieAlgebraElement<double>& el, double tol = 1e-9);

// Real 2n x 2n curvature of the realified bundle, interleaved like realify_lie.
FormMatrix<double> realify_curvature(const FormMatrix<Complex>& omega, double rel_tol = 1e-9);

struct Corollary22Result {
  double residual = 0.0;      // max coefficient difference / max coefficient
  double abs_residual = 0.0;
  double imaginary_residue = 0.0;
};
Corollary22Result verify_corollary22(const FormMatrix<Complex>& omega);

}  // namespace chernlab
