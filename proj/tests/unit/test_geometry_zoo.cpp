#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "chernlab/geometry_zoo.hpp"

using namespace chernlab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Point> affine_points(int n) {
  std::vector<Point> pts;
  const double vals[] = {-1.3, 0.2, 0.7, 2.1};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Point p;
      for (int k = 0; k < n; ++k) {
        p.push_back(vals[(a + k) % 4] * (k + 1) * 0.6);
        p.push_back(vals[(b + 2 * k) % 4]);
      }
      pts.push_back(p);
    }
  return pts;
}

}  // namespace

TEST_CASE("curvature_from_connection") {
  Chart c = Chart::box(2, -1, 1, 8, false, 0.1);
  MatrixField<double> flat(c, 1, [](const Point&) { return FormMatrix<double>(2, 2, 2); });
  CHECK(curvature_from_connection(flat)({0.1, 0.2}).max_abs() == 0.0);

  // abelian: Omega = d omega
  MatrixField<Complex> line(c, 1, [](const Point& x) {
    FormMatrix<Complex> w(1, 1, 2);
    w(0, 0) = Complex(0.0, x[0] * x[0]) * form_cast<Complex>(Form<double>::dx(2, 2));
    return w;
  });
  auto o = curvature_from_connection(line)({0.5, 0.3});
  CHECK(std::abs(o(0, 0).top_coefficient() - Complex(0.0, 1.0)) <= 1e-8);

  MatrixField<double> one_form_check(c, 2, [](const Point&) { return FormMatrix<double>(2, 2, 2); });
  CHECK_THROWS_AS(curvature_from_connection(one_form_check), UsageError);

  // round sphere: Omega_12 = -K sin(theta) dtheta ^ dphi with K = 1
  auto s2 = s2_model(0.05, 64, 128);
  auto derived = curvature_from_connection(s2.real_connection());
  for (const auto& p : sample_points(s2.base.chart, {6, 6})) {
    const double k = -derived(p)(0, 1).top_coefficient() / std::sin(p[0]);
    CHECK(std::abs(k - 1.0) <= 1e-5);
  }
}

TEST_CASE("s2 model") {
  auto m = s2_model(0.05, 256, 512);
  const auto e = class_form(m, 'e', 0, {1.0, 2.0});
  CHECK(e.size() == 1);
  CHECK(e.is_homogeneous(2));
  // row convention pinned by experiment: the integral must be +2
  auto r = characteristic_number(m, "e");
  CHECK(std::abs(r.value - 2.0) <= 1e-3);
  CHECK(r.refinement_estimate <= 5e-4);
  CHECK_THROWS_AS(characteristic_number(m, "p1"), UsageError);
  CHECK(structure_residual(m, sample_points(m.base.chart, {5, 5})) <= 1e-6);
  CHECK(bianchi_residual(m.real_connection(), m.real_curvature(), sample_points(m.base.chart, {5, 5})) <= 1e-4);
}

TEST_CASE("torus model") {
  auto flat = torus_model();
  CHECK(characteristic_number(flat, "e").value == 0.0);
  for (const auto& p : sample_points(flat.base.chart, {3, 3})) {
    CHECK(class_form(flat, 'e', 0, p).is_zero());
    CHECK(class_form(flat, 'p', 1, p).is_zero());
  }
  // Perturbed connection: curvature is exact, so the Euler number stays 0
  auto bumpy = torus_model(0.3);
  CHECK(class_form(bumpy, 'e', 0, {0.4, 1.1}).max_abs() > 1e-3);
  CHECK(std::abs(characteristic_number(bumpy, "e").value) <= 1e-6);
}

TEST_CASE("CP^1 and line bundles") {
  auto cp1 = cp_model(1);
  CHECK(std::abs(characteristic_number(cp1, "c1").value - 2.0) <= 1e-2);
  for (int d = 1; d <= 3; ++d) CHECK(std::abs(characteristic_number(line_bundle_model(d), "c1").value - d) <= 1e-2);
  auto o0 = line_bundle_model(0);
  CHECK(o0.complex_curvature()({0.3, -0.2}).max_abs() == 0.0);

  auto o2 = line_bundle_model(2);
  for (const auto& p : affine_points(1)) {
    // closed form for CP^1: Omega = -4i / phi^2 dx ^ dy
    const double phi = 1 + p[0] * p[0] + p[1] * p[1];
    const auto om = cp1.complex_curvature()(p)(0, 0);
    CHECK(std::abs(om.top_coefficient() - Complex(0.0, -4.0 / (phi * phi))) <= 1e-12);
    CHECK(distance(om, o2.complex_curvature()(p)(0, 0)) <= 1e-8);
  }
  CHECK(structure_residual(cp1, affine_points(1)) <= 1e-5);
  CHECK(structure_residual(o2, affine_points(1)) <= 1e-6);
  CHECK(bianchi_residual(cp1.complex_connection(), cp1.complex_curvature(), affine_points(1)) <= 1e-4);
}

TEST_CASE("CP^2 curvature structure") {
  auto cp2 = cp_model(2);
  auto pts = affine_points(2);
  for (const auto& p : pts) {
    const auto om = cp2.complex_curvature()(p);
    CHECK((om + om.conjugate().transpose()).max_abs() <= 1e-12);
    CHECK(verify_corollary22(om).residual <= 1e-9);
  }
  CHECK(structure_residual(cp2, {pts[0], pts[5], pts[10]}) <= 1e-5);
  CHECK(bianchi_residual(cp2.complex_connection(), cp2.complex_curvature(), {pts[1], pts[7]}) <= 1e-4);

  // small-grid smoke run; the acceptance suite uses the full grid
  auto coarse = cp_model(2, 20.0, 48, 4);
  CHECK(std::abs(characteristic_number(coarse, "c2", false).value - 3.0) <= 5e-2);
}

TEST_CASE("realification at field level") {
  for (const auto& c : {cp_model(1), line_bundle_model(3)}) {
    auto r = realify_model(c);
    CHECK(r.rank == 2 * c.rank);
    for (const auto& p : affine_points(1)) {
      const auto top = class_form(c, 'c', c.rank, p);
      CHECK(distance(class_form(r, 'e', 0, p), top) <= 1e-9 * std::max(1.0, top.max_abs()));
    }
    CHECK(structure_residual(r, affine_points(1)) <= 1e-5);
  }
  CHECK(std::abs(characteristic_number(realify_model(line_bundle_model(1)), "e").value - 1.0) <= 1e-2);
  CHECK(std::abs(characteristic_number(realify_model(cp_model(1)), "e").value - 2.0) <= 1e-2);
  auto flat = realify_model(line_bundle_model(0));
  CHECK(flat.real_curvature()({0.1, 0.2}).max_abs() == 0.0);
  CHECK_THROWS_AS(realify_model(s2_model()), UsageError);
}

TEST_CASE("Whitney sums and pullbacks") {
  auto base = affine_base(1);
  auto a = line_bundle_model(1);
  auto b = line_bundle_model(2);
  auto sum = direct_sum(a, b);
  CHECK(sum.rank == 2);
  for (const auto& p : affine_points(1)) {
    // total Chern form of a block sum is the product
    const auto ca = chern_forms(a.complex_curvature()(p)).c;
    const auto cb = chern_forms(b.complex_curvature()(p)).c;
    const auto cs = chern_forms(sum.complex_curvature()(p)).c;
    CHECK(distance(cs[1], ca[1] + cb[1]) <= 1e-9);
    CHECK(distance(cs[2], wedge(ca[1], cb[1])) <= 1e-9);
    // Euler form of a real block sum is the wedge
    auto ra = realify_model(a), rb = realify_model(b);
    CHECK(distance(class_form(direct_sum(ra, rb), 'e', 0, p), wedge(class_form(ra, 'e', 0, p), class_form(rb, 'e', 0, p))) <= 1e-12);
  }
  auto same = pullback_model(a, SmoothMap::identity(base.chart), base);
  for (const auto& p : affine_points(1)) CHECK(distance(same.complex_curvature()(p), a.complex_curvature()(p)) <= 1e-15);
  CHECK_THROWS_AS(direct_sum(a, s2_model()), UsageError);

  // external sum over CP^1 x CP^1: c2 = h1 h2, c1^2 = 2 h1 h2
  auto ext = external_sum(line_bundle_model(1, 20.0, 64), line_bundle_model(1, 20.0, 64));
  CHECK(ext.dim() == 4);
  CHECK(std::abs(characteristic_number(ext, "c2", false).value - 1.0) <= 2e-2);
  auto pr1 = pullback_first(line_bundle_model(1, 20.0, 64), affine_base(1, 20.0, 64));
  CHECK(std::abs(characteristic_number(pr1, "c1^2", false).value) <= 1e-12);

  auto o11 = tensor_line(pullback_first(a, base), pullback_second(base, a));
  const Point q{0.3, 0.1, -0.4, 0.8};
  CHECK(distance(chern_forms(o11.complex_curvature()(q)).c[1],
                 chern_forms(pullback_first(a, base).complex_curvature()(q)).c[1] + chern_forms(pullback_second(base, a).complex_curvature()(q)).c[1]) <= 1e-12);
}

TEST_CASE("monomials") {
  auto m = parse_monomial("c1^2 * c2");
  REQUIRE(m.factors.size() == 2);
  CHECK(m.factors[0].kind == 'c');
  CHECK(m.factors[0].power == 2);
  CHECK(m.factors[1].k == 2);
  CHECK(parse_monomial("e").factors[0].kind == 'e');
  for (const char* bad : {"", "x1", "c", "c0", "c1^", "c1**c2", "c1 c2", "p1^0"}) CHECK_THROWS_AS(parse_monomial(bad), UsageError);

  auto cp1 = cp_model(1);
  CHECK(monomial_degree(parse_monomial("c1"), cp1) == 2);
  CHECK(monomial_degree(parse_monomial("e"), cp1) == 2);
  CHECK_THROWS_AS(characteristic_number(cp1, "c1^2"), UsageError);
  CHECK_THROWS_AS(characteristic_number(s2_model(), "c1"), UsageError);
}

TEST_CASE("registry") {
  CHECK(registry_entry("cp2").expected.at("c1^2") == 9.0);
  CHECK_THROWS_AS(registry_entry("nope"), UsageError);
  for (const auto& e : model_registry()) {
    CHECK_FALSE(e.name.empty());
    for (const auto& [mono, v] : e.expected) {
      (void)v;
      CHECK(e.tolerance.count(mono) == 1);
    }
  }
}
