#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "chernlab/fuzz.hpp"
#include "chernlab/invariant_polynomials.hpp"
#include "../support/test_helpers.hpp"

using namespace chernlab;
using chernlab::testing::relative_distance;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Cofactor expansion along the first row; independent of det_form/determinant_exact.
Rational cofactor_det(const std::vector<std::vector<Rational>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  if (n == 1) return a[0][0];
  Rational acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Rational>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Rational> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(a[i][k]);
      minor.push_back(row);
    }
    Rational term = a[0][j] * cofactor_det(minor);
    acc += (j % 2 == 0) ? term : Rational(-term);
  }
  return acc;
}

FormMatrix<Rational> to_form_matrix(const std::vector<std::vector<Rational>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<Rational> flat;
  for (const auto& row : a) flat.insert(flat.end(), row.begin(), row.end());
  return scalar_matrix<Rational>(n, n, flat);
}

Rational scalar_of(const Form<Rational>& f) { return f.coefficient(MultiIndex{}); }

}  // namespace

TEST_CASE("pfaffian examples") {
  const int m = 4;
  auto a = Form<double>::monomial(m, MultiIndex::from_indices({1, 2}, m), 2.5);
  FormMatrix<double> two(2, 2, m);
  two(0, 1) = a;
  two(1, 0) = -a;
  CHECK(pfaffian(two) == a);
  CHECK(pfaffian_oracle(two) == a);

  // 4x4 scalar: a12 a34 - a13 a24 + a14 a23, checked against the explicit formula
  fuzz::Engine rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = fuzz::random_skew<Rational>(rng, 4, 0, 0);
    auto v = [&](int i, int j) { return scalar_of(s(i - 1, j - 1)); };
    Rational expected = v(1, 2) * v(3, 4) - v(1, 3) * v(2, 4) + v(1, 4) * v(2, 3);
    CHECK(scalar_of(pfaffian(s)) == expected);
  }

  // canonical symplectic blocks
  std::vector<double> j(36, 0.0);
  for (int b = 0; b < 3; ++b) {
    j[static_cast<std::size_t>((2 * b) * 6 + 2 * b + 1)] = 1.0;
    j[static_cast<std::size_t>((2 * b + 1) * 6 + 2 * b)] = -1.0;
  }
  CHECK(pfaffian(scalar_matrix<double>(6, 6, j)).coefficient(MultiIndex{}) == 1.0);
}

TEST_CASE("pfaffian input validation") {
  CHECK_THROWS_AS(pfaffian(FormMatrix<double>(3, 3, 2)), UsageError);
  CHECK_THROWS_AS(pfaffian(FormMatrix<double>(2, 4, 2)), UsageError);
  FormMatrix<double> not_skew(2, 2, 2);
  not_skew(0, 1) = Form<double>::constant(2, 1.0);
  CHECK_THROWS_AS(pfaffian(not_skew), UsageError);
  FormMatrix<double> odd(2, 2, 2);
  odd(0, 1) = Form<double>::dx(2, 1);
  odd(1, 0) = -odd(0, 1);
  CHECK_THROWS_AS(pfaffian(odd), UsageError);
  CHECK_THROWS_AS(pfaffian_oracle(odd), UsageError);
}

TEST_CASE("pfaffian equals its defining-identity oracle") {
  for (int size : {2, 4, 6, 8}) {
    for (int trial = 0; trial < 10; ++trial) {
      fuzz::Engine rng(fuzz::derive_seed(100 + size, trial));
      auto a = fuzz::random_skew<Rational>(rng, size, 0, 0);
      CHECK(pfaffian(a) == pfaffian_oracle(a));
    }
  }
  // 2-form entries in m = 8
  for (int trial = 0; trial < 5; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(300, trial));
    auto a = fuzz::random_skew<double>(rng, 4, 8, 2, 0.5);
    CHECK(relative_distance(pfaffian(a), pfaffian_oracle(a)) <= 1e-10);
    auto q = fuzz::random_skew<Rational>(rng, 4, 8, 2, 0.3);
    CHECK(pfaffian(q) == pfaffian_oracle(q));
  }
  // the recursive path (size 10) against the matching sum via the oracle identity Pf^2 = det
  fuzz::Engine rng(77);
  auto big = fuzz::random_skew<Rational>(rng, 10, 0, 0);
  Rational pf = scalar_of(pfaffian(big));
  std::vector<std::vector<Rational>> dense(10, std::vector<Rational>(10));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = scalar_of(big(i, j));
  Matrix<Rational> mat(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) mat(i, j) = dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  CHECK(pf * pf == determinant_exact(mat));
}

TEST_CASE("property: Pf^2 = det (exact, sizes 2..8)") {
  for (int size = 2; size <= 8; size += 2) {
    for (int trial = 0; trial < 5; ++trial) {
      fuzz::Engine rng(fuzz::derive_seed(500 + size, trial));
      auto a = fuzz::random_skew<Rational>(rng, size, 0, 0);
      Form<Rational> pf = pfaffian(a);
      CHECK(wedge(pf, pf) == det_form(a));
    }
  }
  for (int size : {2, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      fuzz::Engine rng(fuzz::derive_seed(600 + size, trial));
      auto a = fuzz::random_skew<Rational>(rng, size, 8, 2, 0.25);
      Form<Rational> pf = pfaffian(a);
      CHECK(wedge(pf, pf) == det_form(a));
    }
  }
}

TEST_CASE("property: Pf(G^t A G) = det(G) Pf(A)") {
  for (int trial = 0; trial < 30; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(700, trial));
    const int size = 2 * static_cast<int>(fuzz::uniform_int(rng, 1, 3));
    auto a = fuzz::random_skew<Rational>(rng, size, 0, 0);
    Matrix<Rational> am(size, size), g(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        am(i, j) = scalar_of(a(i, j));
        g(i, j) = fuzz::random_scalar<Rational>(rng);
      }
    Matrix<Rational> conj = g.transpose() * am * g;
    Rational lhs = scalar_of(pfaffian(scalar_matrix<Rational>(size, size, conj.data)));
    std::vector<std::vector<Rational>> gd(static_cast<std::size_t>(size), std::vector<Rational>(static_cast<std::size_t>(size)));
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) gd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g(i, j);
    CHECK(lhs == cofactor_det(gd) * scalar_of(pfaffian(a)));
  }
}

TEST_CASE("det_form examples") {
  CHECK(det_form(FormMatrix<double>::identity(3, 4)) == Form<double>::constant(4, 1.0));
  FormMatrix<double> diag(2, 2, 4);
  diag(0, 0) = Form<double>::monomial(4, MultiIndex::from_indices({1, 2}, 4), 2.0);
  diag(1, 1) = Form<double>::monomial(4, MultiIndex::from_indices({3, 4}, 4), 3.0);
  CHECK(det_form(diag) == wedge(diag(0, 0), diag(1, 1)));
  for (int trial = 0; trial < 20; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(800, trial));
    std::vector<std::vector<Rational>> a(3, std::vector<Rational>(3));
    for (auto& row : a)
      for (auto& v : row) v = fuzz::random_scalar<Rational>(rng);
    CHECK(scalar_of(det_form(to_form_matrix(a))) == cofactor_det(a));
  }
  FormMatrix<double> odd(1, 1, 2);
  odd(0, 0) = Form<double>::dx(2, 1);
  CHECK_THROWS_AS(det_form(odd), UsageError);
  CHECK_THROWS_AS(det_form(FormMatrix<double>(2, 3, 2)), UsageError);
}

TEST_CASE("polarized pfaffian") {
  // single slot with an odd-degree entry: Pf(X) = X_12
  FormMatrix<double> x(2, 2, 3);
  x(0, 1) = Form<double>::dx(3, 2);
  x(1, 0) = -x(0, 1);
  CHECK(polarized_pfaffian<double>({x}) == x(0, 1));

  for (int trial = 0; trial < 10; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(900, trial));
    auto a = fuzz::random_skew<double>(rng, 4, 6, 2, 0.5);
    auto b = fuzz::random_skew<double>(rng, 4, 6, 2, 0.5);
    auto c = fuzz::random_skew<double>(rng, 4, 6, 2, 0.5);
    CHECK(relative_distance(polarized_pfaffian<double>({a, a}), pfaffian(a)) <= 1e-12);
    // symmetry
    CHECK(relative_distance(polarized_pfaffian<double>({a, b}), polarized_pfaffian<double>({b, a})) <= 1e-12);
    // linearity in slot 1
    const double s = fuzz::uniform_real(rng, -2.0, 2.0);
    auto lhs = polarized_pfaffian<double>({a + s * c, b});
    auto rhs = polarized_pfaffian<double>({a, b}) + s * polarized_pfaffian<double>({c, b});
    CHECK(relative_distance(lhs, rhs) <= 1e-12);
  }
  // n = 3 diagonal restriction and symmetry under a 3-cycle (exact)
  fuzz::Engine rng(31);
  auto a = fuzz::random_skew<Rational>(rng, 6, 0, 0);
  auto b = fuzz::random_skew<Rational>(rng, 6, 0, 0);
  auto c = fuzz::random_skew<Rational>(rng, 6, 0, 0);
  CHECK(polarized_pfaffian<Rational>({a, a, a}) == pfaffian(a));
  CHECK(polarized_pfaffian<Rational>({a, b, c}) == polarized_pfaffian<Rational>({c, a, b}));

  FormMatrix<double> odd4(4, 4, 3);
  odd4(0, 1) = Form<double>::dx(3, 1);
  odd4(1, 0) = -odd4(0, 1);
  CHECK_THROWS_AS(polarized_pfaffian<double>({odd4, odd4}), UsageError);
  CHECK_THROWS_AS(polarized_pfaffian<double>({x, x}), UsageError);
}

TEST_CASE("chern forms") {
  const int m = 4;
  const Complex i_unit{0.0, 1.0};
  FormMatrix<Complex> one(1, 1, m);
  one(0, 0) = i_unit * Form<Complex>::monomial(m, MultiIndex::from_indices({1, 2}, m), Complex(3.0));
  auto c = chern_forms(one);
  REQUIRE(c.c.size() == 2);
  CHECK(c.c[0] == Form<double>::constant(m, 1.0));
  // (i / 2pi) * i * 3 e12 = -3/(2pi) e12
  CHECK(relative_distance(c.c[1], Form<double>::monomial(m, MultiIndex::from_indices({1, 2}, m), -3.0 / kTwoPi)) <= 1e-15);

  auto zero = chern_forms(FormMatrix<Complex>(3, 3, m));
  CHECK(zero.c[0] == Form<double>::constant(m, 1.0));
  for (int k = 1; k <= 3; ++k) CHECK(zero.c[static_cast<std::size_t>(k)].is_zero());

  // Newton identity oracle for 2x2: c1 = tr X, c1^2 - 2 c2 = tr(X^2), X = (i/2pi) Omega
  for (int trial = 0; trial < 10; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(1000, trial));
    auto omega = fuzz::random_skew_hermitian(rng, 2, 6, 0.6);
    auto x = Complex(0.0, 1.0 / kTwoPi) * omega;
    auto x2 = wedge(x, x);
    Form<double> tr_x = real_part(x(0, 0) + x(1, 1));
    Form<double> tr_x2 = real_part(x2(0, 0) + x2(1, 1));
    auto cf = chern_forms(omega);
    CHECK(relative_distance(cf.c[1], tr_x) <= 1e-12);
    CHECK(relative_distance(wedge(cf.c[1], cf.c[1]) - 2.0 * cf.c[2], tr_x2) <= 1e-12);
  }
  CHECK_THROWS_AS(chern_forms(FormMatrix<Complex>(2, 3, m)), UsageError);
}

TEST_CASE("euler and pontryagin forms") {
  const int m = 4;
  auto beta = Form<double>::monomial(m, MultiIndex::from_indices({1, 3}, m), 1.7) +
              Form<double>::monomial(m, MultiIndex::from_indices({2, 4}, m), -0.4);
  FormMatrix<double> omega(2, 2, m);
  omega(0, 1) = beta;
  omega(1, 0) = -beta;
  CHECK(relative_distance(euler_form(omega), (-1.0 / kTwoPi) * beta) <= 1e-15);
  CHECK(euler_form(FormMatrix<double>(2, 2, m)).is_zero());
  CHECK_THROWS_AS(euler_form(FormMatrix<double>(3, 3, m)), UsageError);

  auto p = pontryagin_forms(FormMatrix<double>(4, 4, m));
  REQUIRE(p.p.size() == 3);
  CHECK(p.p[0] == Form<double>::constant(m, 1.0));
  CHECK(p.p[1].is_zero());
  CHECK(p.p[2].is_zero());

  // rank 2: p1 = Omega12^2 / 4pi^2 = e ^ e
  auto p1 = pontryagin_forms(omega).p[1];
  CHECK(relative_distance(p1, (1.0 / (kTwoPi * kTwoPi)) * wedge(beta, beta)) <= 1e-12);
  auto e = euler_form(omega);
  CHECK(relative_distance(p1, wedge(e, e)) <= 1e-12);

  // rank-4: e matches the oracle Pfaffian of the scaled matrix; p2 = e ^ e
  for (int trial = 0; trial < 5; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(1100, trial));
    auto w = fuzz::random_skew<double>(rng, 4, 8, 2, 0.5);
    auto ew = euler_form(w);
    CHECK(relative_distance(ew, pfaffian_oracle((-1.0 / kTwoPi) * w)) <= 1e-10);
    auto pw = pontryagin_forms(w);
    CHECK(pw.odd_chern_residue <= 1e-9);
    CHECK(relative_distance(pw.p[2], wedge(ew, ew)) <= 1e-9);
  }
}

TEST_CASE("realification of u(n)") {
  // n = 1, A = 0, B = [b]
  LieAlgebraElement<Rational> el{1, Matrix<Rational>(1, 1), Matrix<Rational>(1, 1)};
  el.b(0, 0) = Rational(5, 3);
  auto c = realify_lie(el);
  CHECK(c(0, 0) == 0);
  CHECK(c(0, 1) == Rational(5, 3));
  CHECK(c(1, 0) == Rational(-5, 3));
  auto r = verify_lemma21(el);
  CHECK(r.pass);
  CHECK(r.residual == 0.0);

  for (int n = 1; n <= 4; ++n) {
    auto p = interleave_permutation<Rational>(n);
    CHECK(p * p.transpose() == Matrix<Rational>::identity(2 * n));
  }
  CHECK(interleave_order(3) == std::vector<int>{0, 3, 1, 4, 2, 5});

  fuzz::Engine rng(42);
  auto big = fuzz::random_lie_element<double>(rng, 4);
  auto cb = realify_lie(big);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(cb(i, j) == -cb(j, i));

  LieAlgebraElement<double> bad{2, Matrix<double>(2, 2), Matrix<double>(2, 2)};
  bad.a(0, 1) = 1.0;  // not skew
  CHECK_THROWS_AS(realify_lie(bad), UsageError);
}

TEST_CASE("Pf(C) = det(-i(A + iB))") {
  for (int trial = 0; trial < 20; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(1200, trial));
    auto el = fuzz::random_lie_element<Rational>(rng, 3);
    auto r = verify_lemma21(el);
    CHECK(r.pass);
    CHECK(r.residual == 0.0);
    CHECK(r.imaginary_residue == 0.0);
  }
  for (int trial = 0; trial < 20; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(1300, trial));
    auto el = fuzz::random_lie_element<double>(rng, 4);
    auto r = verify_lemma21(el);
    CHECK(r.pass);
    CHECK(r.residual <= 1e-9);
  }
}

TEST_CASE("realified curvature and the top Chern / Euler identity") {
  const int m = 4;
  const Complex i_unit{0.0, 1.0};
  auto beta = Form<double>::monomial(m, MultiIndex::from_indices({1, 2}, m), 0.8);
  FormMatrix<Complex> one(1, 1, m);
  one(0, 0) = i_unit * form_cast<Complex>(beta);
  auto real = realify_curvature(one);
  CHECK(real(0, 0).is_zero());
  CHECK(real(0, 1) == beta);
  CHECK(real(1, 0) == -beta);
  CHECK(verify_corollary22(one).residual <= 1e-15);
  CHECK(verify_corollary22(FormMatrix<Complex>(2, 2, m)).residual == 0.0);

  for (int n : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      fuzz::Engine rng(fuzz::derive_seed(1400 + n, trial));
      auto omega = fuzz::random_skew_hermitian(rng, n, 8, 0.5);
      CHECK(realify_curvature(omega).is_skew(1e-15));
      CHECK(verify_corollary22(omega).residual <= 1e-9);
    }
  }

  FormMatrix<Complex> not_sh(1, 1, m);
  not_sh(0, 0) = form_cast<Complex>(beta);  // real diagonal: Hermitian, not skew
  CHECK_THROWS_AS(realify_curvature(not_sh), UsageError);
}
