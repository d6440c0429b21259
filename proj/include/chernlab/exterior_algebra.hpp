#pragma once

// Alternating forms at a point over real, complex or exact scalars, and
// rectangular matrices of such forms.
//
// A basis monomial e_{i1} ^ ... ^ e_{ik} (i1 < ... < ik) is stored as a bit
// mask; bit (i-1) set means e_i is present. Terms are kept sorted by mask so
// structural equality is coefficientwise equality.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "chernlab/errors.hpp"
#include "chernlab/scalar.hpp"

namespace chernlab {

inline constexpr int kMaxAmbientDim = 32;

class MultiIndex {
 public:
  constexpr MultiIndex() = default;
  static constexpr MultiIndex from_mask(std::uint32_t mask) { return MultiIndex(mask); }

  // 1-based strictly increasing indices, all within 1..ambient_dim.
  static MultiIndex from_indices(std::initializer_list<int> indices, int ambient_dim) {
    return from_indices(std::vector<int>(indices), ambient_dim);
  }
  static MultiIndex from_indices(const std::vector<int>& indices, int ambient_dim) {
    std::uint32_t mask = 0;
    int prev = 0;
    for (int i : indices) {
      if (i <= prev) throw UsageError("multi-index must be strictly increasing");
      if (i < 1 || i > ambient_dim) throw UsageError("multi-index entry out of range 1.." + std::to_string(ambient_dim));
      mask |= 1u << (i - 1);
      prev = i;
    }
    return MultiIndex(mask);
  }
  static constexpr MultiIndex full(int ambient_dim) {
    return MultiIndex(ambient_dim >= 32 ? ~0u : ((1u << ambient_dim) - 1u));
  }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr int degree() const { return std::popcount(mask_); }
  constexpr bool contains(int i) const { return (mask_ >> (i - 1)) & 1u; }
  std::vector<int> indices() const {
    std::vector<int> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m) + 1);
    return out;
  }

  friend constexpr bool operator==(MultiIndex a, MultiIndex b) { return a.mask_ == b.mask_; }
  friend constexpr bool operator<(MultiIndex a, MultiIndex b) { return a.mask_ < b.mask_; }

 private:
  constexpr explicit MultiIndex(std::uint32_t mask) : mask_(mask) {}
  std::uint32_t mask_ = 0;
};

// Sign of e_A ^ e_B relative to e_{A|B}; 0 if A and B share an index.
constexpr int shuffle_sign(std::uint32_t a, std::uint32_t b) {
  if (a & b) return 0;
  int inversions = 0;
  for (std::uint32_t m = b; m != 0; m &= m - 1) {
    int j = std::countr_zero(m);
    std::uint32_t above = j >= 31 ? 0u : (a & ~((2u << j) - 1u));
    inversions += std::popcount(above);
  }
  return (inversions & 1) ? -1 : 1;
}

// Relative pruning threshold for float scalars; exact scalars prune only zeros.
inline constexpr double kPruneEpsilon = 1e-14;

template <class S>
class Form {
 public:
  using Scalar = S;
  using Traits = ScalarTraits<S>;
  struct Term {
    std::uint32_t mask;
    S coeff;
  };

  Form() = default;
  explicit Form(int ambient_dim) : dim_(ambient_dim) {
    if (ambient_dim < 0 || ambient_dim > kMaxAmbientDim) throw UsageError("ambient dimension out of range");
  }

  static Form constant(int ambient_dim, S c) {
    Form f(ambient_dim);
    if (!Traits::is_zero(c)) f.terms_.push_back({0u, std::move(c)});
    return f;
  }
  static Form monomial(int ambient_dim, MultiIndex idx, S c) {
    Form f(ambient_dim);
    if (idx.mask() >> ambient_dim && ambient_dim < 32) throw UsageError("monomial exceeds ambient dimension");
    if (!Traits::is_zero(c)) f.terms_.push_back({idx.mask(), std::move(c)});
    return f;
  }
  // The coordinate 1-form dx_i (1-based).
  static Form dx(int ambient_dim, int i) {
    if (i < 1 || i > ambient_dim) throw UsageError("dx index out of range");
    return monomial(ambient_dim, MultiIndex::from_mask(1u << (i - 1)), Traits::from_int(1));
  }
  // Builds from arbitrary (mask, coeff) pairs; duplicates are summed.
  static Form from_terms(int ambient_dim, std::vector<Term> terms) {
    Form f(ambient_dim);
    f.terms_ = std::move(terms);
    f.canonicalize(0.0);
    return f;
  }

  int ambient_dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  S coefficient(MultiIndex idx) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), idx.mask(),
                               [](const Term& t, std::uint32_t m) { return t.mask < m; });
    if (it != terms_.end() && it->mask == idx.mask()) return it->coeff;
    return Traits::from_int(0);
  }
  S top_coefficient() const { return coefficient(MultiIndex::full(dim_)); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, Traits::magnitude(t.coeff));
    return m;
  }

  // Degree of the highest (lowest) nonzero component; -1 for the zero form.
  int max_degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, std::popcount(t.mask));
    return d;
  }
  int min_degree() const {
    int d = -1;
    for (const auto& t : terms_) {
      int k = std::popcount(t.mask);
      d = d < 0 ? k : std::min(d, k);
    }
    return d;
  }
  bool is_homogeneous(int degree) const {
    return std::all_of(terms_.begin(), terms_.end(), [&](const Term& t) { return std::popcount(t.mask) == degree; });
  }
  bool is_even() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return (std::popcount(t.mask) & 1) == 0; });
  }

  Form homogeneous_part(int degree) const {
    Form out(dim_);
    for (const auto& t : terms_)
      if (std::popcount(t.mask) == degree) out.terms_.push_back(t);
    return out;
  }

  // Applies f to every coefficient; result lives in the same ambient space.
  template <class T, class F>
  Form<T> map(F&& f) const {
    std::vector<typename Form<T>::Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back({t.mask, f(t.coeff)});
    return Form<T>::from_terms(dim_, std::move(out));
  }

  Form conjugate() const {
    Form out = *this;
    for (auto& t : out.terms_) t.coeff = Traits::conj(t.coeff);
    return out;
  }

  friend Form operator+(const Form& a, const Form& b) {
    a.require_compatible(b);
    Form out(a.dim_);
    out.terms_.reserve(a.terms_.size() + b.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].mask < b.terms_[j].mask)) {
        out.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || b.terms_[j].mask < a.terms_[i].mask) {
        out.terms_.push_back(b.terms_[j++]);
      } else {
        out.terms_.push_back({a.terms_[i].mask, S(a.terms_[i].coeff + b.terms_[j].coeff)});
        ++i;
        ++j;
      }
    }
    out.prune(std::max(a.max_abs(), b.max_abs()));
    return out;
  }
  friend Form operator-(const Form& a) {
    Form out = a;
    for (auto& t : out.terms_) t.coeff = S(-t.coeff);
    return out;
  }
  friend Form operator-(const Form& a, const Form& b) { return a + (-b); }
  friend Form operator*(const S& c, const Form& a) {
    Form out(a.dim_);
    if (Traits::is_zero(c)) return out;
    out.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) out.terms_.push_back({t.mask, S(c * t.coeff)});
    out.prune(a.max_abs() * Traits::magnitude(c));
    return out;
  }
  Form& operator+=(const Form& b) { return *this = *this + b; }
  Form& operator-=(const Form& b) { return *this = *this - b; }

  friend Form wedge(const Form& a, const Form& b) {
    a.require_compatible(b);
    Form out(a.dim_);
    if (a.terms_.empty() || b.terms_.empty()) return out;
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_) {
      for (const auto& tb : b.terms_) {
        int s = shuffle_sign(ta.mask, tb.mask);
        if (s == 0) continue;
        S c = ta.coeff * tb.coeff;
        if (s < 0) c = S(-c);
        out.terms_.push_back({ta.mask | tb.mask, std::move(c)});
      }
    }
    out.canonicalize(a.max_abs() * b.max_abs());
    return out;
  }

  friend bool operator==(const Form& a, const Form& b) {
    if (a.dim_ != b.dim_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].mask != b.terms_[i].mask || !(a.terms_[i].coeff == b.terms_[i].coeff)) return false;
    return true;
  }

  // Max coefficient magnitude of a - b.
  friend double distance(const Form& a, const Form& b) {
    a.require_compatible(b);
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].mask < b.terms_[j].mask)) {
        d = std::max(d, Traits::magnitude(a.terms_[i++].coeff));
      } else if (i == a.terms_.size() || b.terms_[j].mask < a.terms_[i].mask) {
        d = std::max(d, Traits::magnitude(b.terms_[j++].coeff));
      } else {
        d = std::max(d, Traits::magnitude(S(a.terms_[i].coeff - b.terms_[j].coeff)));
        ++i;
        ++j;
      }
    }
    return d;
  }

 private:
  void require_compatible(const Form& b) const {
    if (dim_ != b.dim_)
      throw UsageError("ambient dimension mismatch: " + std::to_string(dim_) + " vs " + std::to_string(b.dim_));
  }

  // Sort by mask, merge duplicates, prune.
  void canonicalize(double scale) {
    std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) { return x.mask < y.mask; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < terms_.size(); ++r) {
      if (w > 0 && terms_[w - 1].mask == terms_[r].mask) {
        terms_[w - 1].coeff += terms_[r].coeff;
      } else {
        if (w != r) terms_[w] = std::move(terms_[r]);
        ++w;
      }
    }
    terms_.resize(w);
    prune(scale);
  }

  void prune(double scale) {
    if constexpr (Traits::exact) {
      std::erase_if(terms_, [](const Term& t) { return Traits::is_zero(t.coeff); });
    } else {
      const double eps = kPruneEpsilon * scale;
      std::erase_if(terms_, [eps](const Term& t) {
        double m = Traits::magnitude(t.coeff);
        return m == 0.0 || m <= eps;
      });
    }
  }

  int dim_ = 0;
  std::vector<Term> terms_;
};

// Coefficientwise scalar-type change (e.g. real -> complex, rational -> double).
template <class T, class S>
Form<T> form_cast(const Form<S>& f) {
  if constexpr (std::is_same_v<T, double> && std::is_same_v<S, Rational>) {
    return f.template map<T>([](const Rational& c) { return c.get_d(); });
  } else {
    return f.template map<T>([](const S& c) { return T(c); });
  }
}

// Real and imaginary parts of a complex form.
inline Form<double> real_part(const Form<Complex>& f) {
  return f.map<double>([](const Complex& c) { return c.real(); });
}
inline Form<double> imag_part(const Form<Complex>& f) {
  return f.map<double>([](const Complex& c) { return c.imag(); });
}

// Re-embeds a form of ambient dimension m into ambient dimension m + extra,
// shifting every index by `offset` (used for tensor gradings and for pulling
// base forms up to a product chart).
template <class S>
Form<S> embed(const Form<S>& f, int new_dim, int offset) {
  if (offset < 0 || f.ambient_dim() + offset > new_dim) throw UsageError("embed: target dimension too small");
  std::vector<typename Form<S>::Term> out;
  out.reserve(f.size());
  for (const auto& t : f.terms()) out.push_back({t.mask << offset, t.coeff});
  return Form<S>::from_terms(new_dim, std::move(out));
}

template <class S>
class FormMatrix {
 public:
  using Scalar = S;

  FormMatrix() = default;
  FormMatrix(int rows, int cols, int ambient_dim)
      : rows_(rows), cols_(cols), dim_(ambient_dim), entries_(static_cast<std::size_t>(rows * cols), Form<S>(ambient_dim)) {
    if (rows < 0 || cols < 0) throw UsageError("negative matrix shape");
  }

  static FormMatrix identity(int n, int ambient_dim) {
    FormMatrix out(n, n, ambient_dim);
    for (int i = 0; i < n; ++i) out(i, i) = Form<S>::constant(ambient_dim, ScalarTraits<S>::from_int(1));
    return out;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int ambient_dim() const { return dim_; }
  bool is_square() const { return rows_ == cols_; }

  Form<S>& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Form<S>& operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  const std::vector<Form<S>>& entries() const { return entries_; }

  // Every entry has only even-degree terms (entries then commute).
  bool is_even() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Form<S>& f) { return f.is_even(); });
  }
  bool is_homogeneous(int degree) const {
    return std::all_of(entries_.begin(), entries_.end(), [&](const Form<S>& f) { return f.is_homogeneous(degree); });
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& f : entries_) m = std::max(m, f.max_abs());
    return m;
  }
  // max |A_ij + A_ji|; 0 for exactly skew matrices.
  double skew_defect() const {
    if (!is_square()) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j) d = std::max(d, distance((*this)(i, j), -(*this)(j, i)));
    return d;
  }
  bool is_skew(double rel_tol = 0.0) const {
    if (!is_square()) return false;
    return skew_defect() <= rel_tol * std::max(1.0, max_abs());
  }

  FormMatrix transpose() const {
    FormMatrix out(cols_, rows_, dim_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }
  FormMatrix conjugate() const {
    FormMatrix out = *this;
    for (auto& f : out.entries_) f = f.conjugate();
    return out;
  }
  template <class T, class F>
  FormMatrix<T> map(F&& f) const {
    FormMatrix<T> out(rows_, cols_, dim_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

  friend FormMatrix operator+(const FormMatrix& a, const FormMatrix& b) {
    a.require_same_shape(b);
    FormMatrix out = a;
    for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] += b.entries_[k];
    return out;
  }
  friend FormMatrix operator-(const FormMatrix& a, const FormMatrix& b) {
    a.require_same_shape(b);
    FormMatrix out = a;
    for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] -= b.entries_[k];
    return out;
  }
  friend FormMatrix operator*(const S& c, const FormMatrix& a) {
    FormMatrix out = a;
    for (auto& f : out.entries_) f = c * f;
    return out;
  }
  friend FormMatrix operator-(const FormMatrix& a) { return S(-1) * a; }
  FormMatrix& operator+=(const FormMatrix& b) { return *this = *this + b; }
  FormMatrix& operator-=(const FormMatrix& b) { return *this = *this - b; }

  // (A ^ B)_ij = sum_k A_ik ^ B_kj
  friend FormMatrix wedge(const FormMatrix& a, const FormMatrix& b) {
    if (a.cols_ != b.rows_) throw UsageError("matrix wedge: inner dimensions differ");
    if (a.dim_ != b.dim_) throw UsageError("matrix wedge: ambient dimension mismatch");
    FormMatrix out(a.rows_, b.cols_, a.dim_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) {
        Form<S> acc(a.dim_);
        for (int k = 0; k < a.cols_; ++k) {
          if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
          acc += wedge(a(i, k), b(k, j));
        }
        out(i, j) = std::move(acc);
      }
    return out;
  }

  friend double distance(const FormMatrix& a, const FormMatrix& b) {
    a.require_same_shape(b);
    double d = 0.0;
    for (std::size_t k = 0; k < a.entries_.size(); ++k) d = std::max(d, distance(a.entries_[k], b.entries_[k]));
    return d;
  }
  friend bool operator==(const FormMatrix& a, const FormMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.dim_ == b.dim_ && a.entries_ == b.entries_;
  }

 private:
  void require_same_shape(const FormMatrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw UsageError("matrix shape mismatch");
    if (dim_ != b.dim_) throw UsageError("matrix ambient dimension mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  std::vector<Form<S>> entries_;
};

template <class T, class S>
FormMatrix<T> matrix_cast(const FormMatrix<S>& m) {
  return m.template map<T>([](const Form<S>& f) { return form_cast<T>(f); });
}

template <class S>
FormMatrix<S> embed(const FormMatrix<S>& m, int new_dim, int offset) {
  FormMatrix<S> out(m.rows(), m.cols(), new_dim);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = embed(m(i, j), new_dim, offset);
  return out;
}

// Matrix of degree-0 forms from a dense row-major scalar array.
template <class S>
FormMatrix<S> scalar_matrix(int rows, int cols, const std::vector<S>& values, int ambient_dim = 0) {
  if (values.size() != static_cast<std::size_t>(rows * cols)) throw UsageError("scalar_matrix: size mismatch");
  FormMatrix<S> out(rows, cols, ambient_dim);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = Form<S>::constant(ambient_dim, values[static_cast<std::size_t>(i * cols + j)]);
  return out;
}

std::string to_string(const Form<double>& f);
std::string to_string(const Form<Complex>& f);

}  // namespace chernlab
