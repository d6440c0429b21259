#include "chernlab/invariant_polynomials.hpp"

#include <stdexcept>

namespace chernlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCheckTol = 1e-9;

double max_abs(const std::vector<Form<Complex>>& forms) {
  double m = 0.0;
  for (const auto& f : forms) m = std::max(m, f.max_abs());
  return m;
}

}  // namespace

std::vector<Form<Complex>> chern_forms_complex(const FormMatrix<Complex>& omega) {
  if (!omega.is_square()) throw UsageError("chern_forms: curvature matrix must be square");
  if (!omega.is_homogeneous(2)) throw UsageError("chern_forms: curvature entries must be 2-forms");
  const int n = omega.rows();
  const int m = omega.ambient_dim();
  const Complex factor{0.0, 1.0 / kTwoPi};
  FormMatrix<Complex> shifted = FormMatrix<Complex>::identity(n, m) + factor * omega;
  Form<Complex> total = det_form(shifted);
  std::vector<Form<Complex>> c;
  c.reserve(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) c.push_back(total.homogeneous_part(2 * k));
  return c;
}

ChernForms chern_forms(const FormMatrix<Complex>& omega) {
  auto complex_forms = chern_forms_complex(omega);
  ChernForms out;
  const double scale = std::max(max_abs(complex_forms), 1e-300);
  for (const auto& f : complex_forms) {
    out.imaginary_residue = std::max(out.imaginary_residue, imag_part(f).max_abs() / scale);
    out.c.push_back(real_part(f));
  }
  if (out.imaginary_residue > kCheckTol)
    throw std::runtime_error("chern_forms: imaginary residue " + std::to_string(out.imaginary_residue) +
                             " exceeds 1e-9; curvature is not skew-Hermitian-valued");
  return out;
}

Form<double> euler_form(const FormMatrix<double>& omega) {
  if (!omega.is_square() || omega.rows() % 2 != 0) throw UsageError("euler_form: rank must be even");
  if (!omega.is_homogeneous(2)) throw UsageError("euler_form: curvature entries must be 2-forms");
  return pfaffian((-1.0 / kTwoPi) * omega);
}

PontryaginForms pontryagin_forms(const FormMatrix<double>& omega) {
  if (!omega.is_square()) throw UsageError("pontryagin_forms: curvature matrix must be square");
  const auto c = chern_forms_complex(matrix_cast<Complex>(omega));
  const double scale = std::max(max_abs(c), 1e-300);
  PontryaginForms out;
  for (std::size_t k = 1; k < c.size(); k += 2) out.odd_chern_residue = std::max(out.odd_chern_residue, c[k].max_abs() / scale);
  double imag = 0.0;
  for (const auto& f : c) imag = std::max(imag, imag_part(f).max_abs() / scale);
  if (out.odd_chern_residue > kCheckTol || imag > kCheckTol)
    throw std::runtime_error("pontryagin_forms: complexified curvature has nonvanishing odd or imaginary Chern part");
  for (std::size_t k = 0; 2 * k < c.size(); ++k) {
    Form<double> ck = real_part(c[2 * k]);
    out.p.push_back((k % 2 == 1) ? -ck : ck);
  }
  return out;
}

std::vector<int> interleave_order(int n) {
  if (n < 0) throw UsageError("interleave_order: negative size");
  std::vector<int> order(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    order[static_cast<std::size_t>(2 * i)] = i;
    order[static_cast<std::size_t>(2 * i + 1)] = n + i;
  }
  return order;
}

Lemma21Result verify_lemma21(const LieAlgebraElement<Rational>& el) {
  const int n = el.n;
  Matrix<Rational> c = realify_lie(el);
  Form<Rational> pf = pfaffian(scalar_matrix<Rational>(2 * n, 2 * n, c.data));
  Rational pf_value = pf.coefficient(MultiIndex{});

  // -i (A + iB) = B - iA
  Matrix<GaussianRational> m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = GaussianRational(el.b(i, j), Rational(-el.a(i, j)));
  GaussianRational det = determinant_exact(m);

  Lemma21Result r;
  r.exact = true;
  r.pfaffian = pf_value.get_d();
  r.determinant = det.re.get_d();
  const bool equal = det.re == pf_value;
  r.residual = equal ? 0.0 : std::max(std::abs(Rational(det.re - pf_value).get_d()), 1e-300);
  r.imaginary_residue = std::abs(det.im.get_d());
  r.pass = equal && sgn(det.im) == 0;
  return r;
}

Lemma21Result verify_lemma21(const LieAlgebraElement<double>& el, double tol) {
  const int n = el.n;
  Matrix<double> c = realify_lie(el);
  Form<double> pf = pfaffian(scalar_matrix<double>(2 * n, 2 * n, c.data));
  const double pf_value = pf.coefficient(MultiIndex{});

  Matrix<Complex> m(n, n);
  double hadamard = 1.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      m(i, j) = Complex(el.b(i, j), -el.a(i, j));
      row += std::norm(m(i, j));
    }
    hadamard *= std::sqrt(row);
  }
  const Complex det = determinant_lu(m);
  const double scale = std::max(hadamard, 1e-300);

  Lemma21Result r;
  r.pfaffian = pf_value;
  r.determinant = det.real();
  r.residual = std::abs(pf_value - det.real()) / scale;
  r.imaginary_residue = std::abs(det.imag()) / scale;
  r.pass = r.residual <= tol && r.imaginary_residue <= 1e-10;
  return r;
}

FormMatrix<double> realify_curvature(const FormMatrix<Complex>& omega, double rel_tol) {
  if (!omega.is_square()) throw UsageError("realify_curvature: matrix must be square");
  const int n = omega.rows();
  const int m = omega.ambient_dim();
  const FormMatrix<Complex> adjoint_sum = omega + omega.conjugate().transpose();
  if (adjoint_sum.max_abs() > rel_tol * std::max(1.0, omega.max_abs()))
    throw UsageError("realify_curvature: input is not skew-Hermitian-valued");

  FormMatrix<double> block(2 * n, 2 * n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Form<double> re = real_part(omega(i, j));
      Form<double> im = imag_part(omega(i, j));
      block(i, j) = re;
      block(i, n + j) = im;
      block(n + i, j) = -im;
      block(n + i, n + j) = re;
    }
  const auto order = interleave_order(n);
  FormMatrix<double> out(2 * n, 2 * n, m);
  for (int p = 0; p < 2 * n; ++p)
    for (int q = 0; q < 2 * n; ++q) out(p, q) = block(order[static_cast<std::size_t>(p)], order[static_cast<std::size_t>(q)]);
  return out;
}

Corollary22Result verify_corollary22(const FormMatrix<Complex>& omega) {
  const Complex factor{0.0, 1.0 / kTwoPi};
  Form<Complex> top_chern = det_form(factor * omega);
  Form<Complex> euler = form_cast<Complex>(euler_form(realify_curvature(omega)));
  Corollary22Result r;
  r.abs_residual = distance(top_chern, euler);
  const double scale = std::max(top_chern.max_abs(), euler.max_abs());
  r.residual = scale > 0.0 ? r.abs_residual / scale : 0.0;
  r.imaginary_residue = scale > 0.0 ? imag_part(top_chern).max_abs() / scale : 0.0;
  return r;
}

}  // namespace chernlab
