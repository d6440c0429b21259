#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "chernlab/form_fields.hpp"
#include "chernlab/fuzz.hpp"

using namespace chernlab;

namespace {

constexpr double kPi = std::numbers::pi;

MultiIndex mi(std::initializer_list<int> idx, int m) { return MultiIndex::from_indices(idx, m); }

// Random trigonometric 1-form on the 2-torus: sum of a_k sin/cos(k . x) dx_i.
FormField<double> trig_one_form(const Chart& torus, std::uint64_t seed) {
  fuzz::Engine rng(seed);
  struct Mode {
    int axis;
    double k1, k2, a, phase;
  };
  std::vector<Mode> modes;
  for (int i = 0; i < 6; ++i)
    modes.push_back({static_cast<int>(fuzz::uniform_int(rng, 0, 1)), static_cast<double>(fuzz::uniform_int(rng, -2, 2)),
                     static_cast<double>(fuzz::uniform_int(rng, -2, 2)), fuzz::uniform_real(rng, -1, 1), fuzz::uniform_real(rng, 0, 6)});
  return FormField<double>(torus, 1, [modes](const Point& x) {
    Form<double> f(2);
    for (const auto& md : modes) f += (md.a * std::sin(md.k1 * x[0] + md.k2 * x[1] + md.phase)) * Form<double>::dx(2, md.axis + 1);
    return f;
  });
}

double field_gap(const FormField<double>& a, const FormField<double>& b, const std::vector<Point>& pts) {
  double gap = 0.0;
  for (const auto& p : pts) gap = std::max(gap, distance(a(p), b(p)));
  return gap;
}

}  // namespace

TEST_CASE("chart invariants") {
  CHECK_THROWS_AS(Chart({{0.0, 0.0}}, {8}), UsageError);
  CHECK_THROWS_AS(Chart({{0.0, 1.0}}, {2}), UsageError);
  CHECK_THROWS_AS(Chart({{0.0, 1.0}}, {8, 8}), UsageError);
  Chart c({{0.0, 1.0}, {0.0, 2 * kPi}}, {8, 8}, {false, true}, 0.01);
  auto y = c.normalize({0.5, 2 * kPi + 1.0});
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(c.normalize({1.005, 0.0})[0] == 1.005);
  CHECK_THROWS_AS(c.normalize({1.5, 0.0}), DomainError);
  CHECK(Chart::product(c, Chart::box(1, -1, 1, 4)).dim() == 3);
}

TEST_CASE("field output invariants") {
  Chart c = Chart::box(2, 0, 1, 4);
  FormField<double> wrong_degree(c, 1, [](const Point&) { return Form<double>::constant(2, 1.0); });
  CHECK_THROWS_AS(wrong_degree({0.5, 0.5}), UsageError);
  FormField<double> wrong_dim(c, 0, [](const Point&) { return Form<double>::constant(3, 1.0); });
  CHECK_THROWS_AS(wrong_dim({0.5, 0.5}), UsageError);
  FormField<double> ok(c, 0, [](const Point& x) { return Form<double>::constant(2, x[0]); });
  CHECK_THROWS_AS(ok({2.0, 0.5}), DomainError);
}

TEST_CASE("exterior derivative examples") {
  Chart c = Chart::box(2, -1, 1, 8, false, 0.1);
  FormField<double> f(c, 1, [](const Point& x) { return x[0] * Form<double>::dx(2, 2); });
  auto df = exterior_derivative(f, 1e-4);
  CHECK(df.degree() == 2);
  for (const auto& p : sample_points(c, {5, 5}))
    CHECK(distance(df(p), Form<double>::monomial(2, mi({1, 2}, 2), 1.0)) <= 1e-8);

  auto zero = exterior_derivative(constant_field(c, Form<double>::constant(2, 3.0)), 1e-4);
  CHECK(zero({0.2, 0.3}).is_zero());

  // top degree: d is zero by convention
  auto top = exterior_derivative(FormField<double>(c, 2, [](const Point& x) { return Form<double>::monomial(2, mi({1, 2}, 2), x[0]); }), 1e-4);
  CHECK(top({0.1, 0.1}).is_zero());

  CHECK_THROWS_AS(exterior_derivative(f, 0.0), UsageError);
  // stencil leaves the padded domain
  CHECK_THROWS_AS(exterior_derivative(f, 0.2)({1.0, 0.0}), DomainError);
}

TEST_CASE("exterior derivative: second-order convergence and Richardson") {
  Chart c = Chart::box(2, 0, 1, 8, false, 0.5);
  FormField<double> g(c, 0, [](const Point& x) { return Form<double>::constant(2, std::exp(x[0]) * std::sin(3 * x[1])); });
  const Point p{0.3, 0.7};
  const double exact1 = std::exp(0.3) * std::sin(2.1);
  auto err = [&](double h, bool rich) {
    auto dg = exterior_derivative(g, h, rich)(p);
    return std::abs(dg.coefficient(mi({1}, 2)) - exact1);
  };
  const double e1 = err(1e-2, false), e2 = err(5e-3, false);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(err(1e-2, true) < e1 * 1e-2);
}

TEST_CASE("d(d f) vanishes on the torus") {
  Chart torus = Chart::box(2, 0, 2 * kPi, 32, true);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto f = trig_one_form(torus, fuzz::derive_seed(11, seed));
    auto ddf = exterior_derivative(exterior_derivative(f, 1e-4), 1e-4);
    for (const auto& p : sample_points(torus, {6, 6})) CHECK(ddf(p).max_abs() <= 1e-6);
    // d of a 0-form: wrapped stencil straddling the seam equals the interior value
    FormField<double> g(torus, 0, [](const Point& x) { return Form<double>::constant(2, std::sin(x[0]) * std::cos(x[1])); });
    auto dg = exterior_derivative(g, 1e-4);
    CHECK(dg({0.0, 0.0}).coefficient(mi({1}, 2)) == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("pullback examples") {
  Chart c = Chart::box(2, -2, 2, 8, false, 0.1);
  Chart t = Chart::box(2, -5, 5, 8, false, 0.1);
  FormField<double> dy1(t, 1, [](const Point&) { return Form<double>::dx(2, 1); });
  SmoothMap sq{c, t, [](const Point& x) { return Point{x[0] * x[0], x[1]}; }, {}};
  auto pb = pullback(dy1, sq);
  for (const auto& p : sample_points(c, {4, 4}))
    CHECK(distance(pb(p), (2 * p[0]) * Form<double>::dx(2, 1)) <= 1e-8);

  auto same = pullback(trig_one_form(c, 3), SmoothMap::identity(c));
  auto orig = trig_one_form(c, 3);
  CHECK(field_gap(same, orig, sample_points(c, {4, 4})) == 0.0);

  // degree above the source dimension pulls back to zero
  Chart line = Chart::box(1, -1, 1, 4);
  FormField<double> area(t, 2, [](const Point&) { return Form<double>::monomial(2, mi({1, 2}, 2), 1.0); });
  SmoothMap curve{line, t, [](const Point& s) { return Point{s[0], s[0] * s[0]}; }, {}};
  CHECK(pullback(area, curve)({0.3}).is_zero());
}

TEST_CASE("pullback commutes with wedge and composes functorially") {
  Chart c = Chart::box(3, -1, 1, 4, false, 0.1);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    fuzz::Engine rng(fuzz::derive_seed(21, trial));
    std::vector<double> q(9);
    for (auto& v : q) v = fuzz::uniform_real(rng, -0.5, 0.5);
    SmoothMap phi{c, c,
                  [q](const Point& x) {
                    return Point{std::sin(x[0] + q[0] * x[1]) * 0.5, x[1] + q[1] * x[2] * x[2], q[2] * x[0] * x[1] + 0.3 * x[2]};
                  },
                  {}};
    SmoothMap psi{c, c,
                  [q](const Point& x) {
                    return Point{x[0] + q[3] * x[2], std::tanh(x[1] + q[4] * x[0]), x[2] + q[5] * std::cos(x[0])};
                  },
                  {}};
    auto random_field = [&](int degree) {
      auto base = fuzz::random_form<double>(rng, 3, degree);
      auto wiggle = fuzz::uniform_real(rng, 0.5, 1.5);
      return FormField<double>(c, degree, [base, wiggle](const Point& x) { return std::cos(wiggle * x[0] + x[1] * x[2]) * base; });
    };
    auto a = random_field(1);
    auto b = random_field(1);
    auto pts = sample_points(c, {3, 3, 3}, 0.1);
    CHECK(field_gap(pullback(wedge(a, b), phi), wedge(pullback(a, phi), pullback(b, phi)), pts) <= 1e-10);
    auto c2 = random_field(2);
    CHECK(field_gap(pullback(c2, compose(phi, psi)), pullback(pullback(c2, psi), phi), pts) <= 1e-9);
  }
}

TEST_CASE("integrate_top") {
  Chart unit = Chart::box(2, 0, 1, 16);
  CHECK(integrate_top(constant_field(unit, Form<double>::monomial(2, mi({1, 2}, 2), 1.0))) == doctest::Approx(1.0).epsilon(1e-15));
  // -dx2 ^ dx1 = dx1 ^ dx2
  auto swapped = -1.0 * wedge(Form<double>::dx(2, 2), Form<double>::dx(2, 1));
  CHECK(integrate_top(constant_field(unit, swapped)) == doctest::Approx(1.0).epsilon(1e-15));

  Chart torus = Chart::box(2, 0, 2 * kPi, 32, true);
  FormField<double> s2(torus, 2, [](const Point& x) { return Form<double>::monomial(2, mi({1, 2}, 2), std::sin(x[0]) * std::sin(x[0])); });
  CHECK(std::abs(integrate_top(s2) - 2 * kPi * kPi) <= 1e-9);
  CHECK(std::abs(integrate_top(s2, {{}, PeriodicRule::Trapezoid}) - 2 * kPi * kPi) <= 1e-9);

  // linearity and orientation sign
  FormField<double> g(unit, 2, [](const Point& x) { return Form<double>::monomial(2, mi({1, 2}, 2), x[0] * x[0] + x[1]); });
  const double ig = integrate_top(g);
  CHECK(integrate_top(2.5 * g + s2.with_chart(unit)) == doctest::Approx(2.5 * ig + integrate_top(s2.with_chart(unit))));
  SmoothMap swap{unit, unit, [](const Point& x) { return Point{x[1], x[0]}; }, [](const Point&) {
                   Jacobian j(2, 2);
                   j(0, 1) = j(1, 0) = 1.0;
                   return j;
                 }};
  CHECK(integrate_top(pullback(g, swap)) == doctest::Approx(-ig).epsilon(1e-12));

  CHECK_THROWS_AS(integrate_top(FormField<double>(unit, 1, [](const Point&) { return Form<double>::dx(2, 1); })), UsageError);

  // a point chart integrates the 0-form's value
  CHECK(integrate_top(constant_field(Chart::point(), Form<double>::constant(0, 4.0))) == 4.0);
}

TEST_CASE("Stokes on the flat torus") {
  Chart torus = Chart::box(2, 0, 2 * kPi, 64, true);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto f = trig_one_form(torus, fuzz::derive_seed(31, seed));
    CHECK(std::abs(integrate_top(exterior_derivative(f, 1e-4))) <= 1e-6);
  }
}

TEST_CASE("integration is deterministic across thread counts") {
  Chart c = Chart::box(3, 0, 1, 12);
  FormField<double> g(c, 3, [](const Point& x) { return Form<double>::monomial(3, mi({1, 2, 3}, 3), std::exp(x[0] * x[1]) + x[2]); });
  setenv("CHERNLAB_THREADS", "1", 1);
  const double one = integrate_top(g);
  setenv("CHERNLAB_THREADS", "3", 1);
  const double three = integrate_top(g);
  unsetenv("CHERNLAB_THREADS");
  CHECK(one == three);
}

TEST_CASE("gauss-legendre and parameter integrals") {
  for (int n = 1; n <= 8; ++n) {
    auto [t, w] = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) s += w[k] * std::pow(t[k], deg);
      CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), UsageError);

  Chart c = Chart::box(2, 0, 1, 4);
  auto f = FormField<double>(c, 1, [](const Point& x) { return (1.0 + x[0]) * Form<double>::dx(2, 2); });
  auto pts = sample_points(c, {3, 3});
  std::function<FormField<double>(double)> constant = [f](double) { return f; };
  CHECK(field_gap(parameter_integral(constant, 1), f, pts) <= 1e-15);
  std::function<FormField<double>(double)> linear = [f](double t) { return t * f; };
  CHECK(field_gap(parameter_integral(linear, 2), 0.5 * f, pts) <= 1e-15);
  std::function<FormField<double>(double)> quadratic = [f](double t) { return (t * t) * f; };
  CHECK(field_gap(parameter_integral(quadratic, 3), (1.0 / 3.0) * f, pts) <= 1e-15);
  CHECK_THROWS_AS(parameter_integral(constant, 0), UsageError);
}

TEST_CASE("matrix-valued fields") {
  Chart c = Chart::box(2, -1, 1, 4, false, 0.1);
  MatrixField<double> m(c, 1, [](const Point& x) {
    FormMatrix<double> a(2, 2, 2);
    a(0, 1) = x[0] * Form<double>::dx(2, 2);
    a(1, 0) = -a(0, 1);
    return a;
  });
  auto dm = exterior_derivative(m, 1e-4)({0.2, 0.4});
  CHECK(distance(dm(0, 1), Form<double>::monomial(2, mi({1, 2}, 2), 1.0)) <= 1e-8);
  CHECK(distance(dm(1, 0), Form<double>::monomial(2, mi({1, 2}, 2), -1.0)) <= 1e-8);
  SmoothMap sq{c, c, [](const Point& x) { return Point{0.5 * x[0], x[1] * x[1] * 0.5}; }, {}};
  auto pm = pullback(m, sq)({0.4, 0.6});
  // (x/2) * d(y^2/2) = 0.2 * 0.6 dy
  CHECK(distance(pm(0, 1), 0.12 * Form<double>::dx(2, 2)) <= 1e-9);
}
