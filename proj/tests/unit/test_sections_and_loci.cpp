#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>

#include "chernlab/fuzz.hpp"
#include "chernlab/sections_and_loci.hpp"

using namespace chernlab;
using namespace chernlab::fuzz;

namespace {

constexpr double kPi = std::numbers::pi;

SectionField planar(const std::string& name, std::function<std::vector<double>(const Point&)> f, Chart chart = Chart::box(2, -1, 1, 16, false, 0.2)) {
  SectionField s;
  s.name = name;
  s.rank = 2;
  SectionPatch p;
  p.name = "main";
  p.chart = std::move(chart);
  p.value = std::move(f);
  s.patches.push_back(p);
  return s;
}

SectionField window_section(const std::string& name, ScalarKind kind, int rank, const Chart& chart, std::function<std::vector<double>(const Point&)> f) {
  SectionField s;
  s.name = name;
  s.kind = kind;
  s.rank = rank;
  SectionPatch p;
  p.name = "w";
  p.chart = chart;
  p.value = std::move(f);
  s.patches.push_back(p);
  return s;
}

}  // namespace

TEST_CASE("local index on planar sections") {
  auto id = planar("id", [](const Point& x) { return std::vector<double>{x[0], x[1]}; });
  auto refl = planar("refl", [](const Point& x) { return std::vector<double>{x[0], -x[1]}; });
  CHECK(local_index(id.patches[0], {0.0, 0.0}) == 1);
  CHECK(local_index(refl.patches[0], {0.0, 0.0}) == -1);
  auto fold = planar("fold", [](const Point& x) { return std::vector<double>{x[0] * x[0], x[1]}; });
  CHECK_THROWS_AS(local_index(fold.patches[0], {0.0, 0.0}), DegenerateZeroError);

  // holomorphic z -> z on a realified line bundle: Jacobian is the identity
  auto h = holomorphic_patch(
      "h", Chart::box(2, -1, 1, 8), {}, [](const std::vector<Complex>& z) { return z; },
      [](const std::vector<Complex>&) { return Matrix<Complex>::identity(1); });
  const auto j = h.jacobian_at({0.2, 0.1});
  CHECK(j(0, 0) == 1.0);
  CHECK(j(0, 1) == 0.0);
  CHECK(j(1, 0) == 0.0);
  CHECK(j(1, 1) == 1.0);
  CHECK(local_index(h, {0.0, 0.0}) == 1);
}

TEST_CASE("holomorphic zeros always have index +1") {
  Engine rng(20240611);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + trial % 3;
    Matrix<Complex> a(n, n);
    for (auto& v : a.data) v = random_scalar<Complex>(rng);
    const Complex det_c = determinant_lu(a);
    if (std::abs(det_c) < 1e-3) continue;
    auto p = holomorphic_patch(
        "lin", Chart::box(2 * n, -1, 1, 4), {},
        [a, n](const std::vector<Complex>& z) {
          std::vector<Complex> out(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(i)] += a(i, k) * z[static_cast<std::size_t>(k)];
          return out;
        },
        [a](const std::vector<Complex>&) { return a; });
    const Point origin(static_cast<std::size_t>(2 * n), 0.0);
    CHECK(local_index(p, origin) == 1);
    // det of the realified Jacobian is |det_C|^2
    const auto j = p.jacobian_at(origin);
    CHECK(determinant_lu(j) == doctest::Approx(std::norm(det_c)).epsilon(1e-10));
  }
}

TEST_CASE("find_zeros on the shipped examples") {
  CHECK(find_zeros(torus_constant_section()).empty());

  const auto s2 = find_zeros(s2_rotation_section());
  REQUIRE(s2.size() == 2);
  CHECK(s2[0].patch == "north");
  CHECK(s2[1].patch == "south");
  for (const auto& z : s2) {
    CHECK(z.index == 1);
    CHECK_FALSE(z.flagged);
    CHECK(z.refine_residual <= 1e-10);
    CHECK(std::hypot(z.location[0], z.location[1]) <= 1e-12);
  }

  const auto roots = default_roots(2);
  const auto tangent = find_zeros(polynomial_section(roots, "cp1"));
  REQUIRE(tangent.size() == 2);
  int sum = 0;
  for (const auto& z : tangent) {
    sum += z.index;
    const Complex at(z.location[0], z.location[1]);
    CHECK(std::min(std::abs(at - roots[0]), std::abs(at - roots[1])) <= 1e-10);
  }
  CHECK(sum == 2);

  // sin-sin field on the torus: two saddles and two sources cancel
  const auto sine = find_zeros(torus_sine_section());
  REQUIRE(sine.size() == 4);
  int torus_sum = 0, negatives = 0;
  for (const auto& z : sine) {
    torus_sum += z.index;
    negatives += z.index < 0;
  }
  CHECK(torus_sum == 0);
  CHECK(negatives == 2);

  // zeros at infinity are found in the chart there: the constant section of O(1)
  const auto at_inf = find_zeros(polynomial_section({}, "o0"));
  CHECK(at_inf.empty());
  SectionField line = polynomial_section({Complex(0.3, 0.0)}, "o1");
  const auto one = find_zeros(line);
  REQUIRE(one.size() == 1);
  CHECK(one[0].patch == "affine");
}

TEST_CASE("find_zeros flags instead of dropping") {
  // Jacobian singular everywhere: candidates are kept as flagged records
  auto stuck = planar("stuck", [](const Point& x) { return std::vector<double>{x[0], x[0] - 1e-6}; });
  const auto z = find_zeros(stuck);
  REQUIRE_FALSE(z.empty());
  for (const auto& r : z) CHECK(r.flagged);

  // zero on the chart edge
  auto edge = planar("edge", [](const Point& x) { return std::vector<double>{x[0] - 1.0, x[1]}; });
  const auto e = find_zeros(edge);
  REQUIRE(e.size() == 1);
  CHECK(e[0].flagged);
  CHECK(e[0].flag.find("margin") != std::string::npos);

  // degenerate zero: flagged, index 0
  auto fold = planar("fold", [](const Point& x) { return std::vector<double>{x[0] * x[0] * x[0], x[1]}; }, Chart::box(2, -1, 1, 15, false, 0.2));
  const auto f = find_zeros(fold);
  REQUIRE_FALSE(f.empty());
  for (const auto& r : f) CHECK(r.flagged);

  ZeroOptions bad;
  bad.grid = {8};
  CHECK_THROWS_AS(find_zeros(torus_sine_section(), bad), UsageError);
  SectionField wrong = planar("wrong", [](const Point& x) { return std::vector<double>{x[0]}; });
  CHECK_THROWS_AS(find_zeros(wrong), UsageError);
}

TEST_CASE("index sums against characteristic numbers") {
  auto s2 = index_sum(s2_rotation_section(), registry_entry("s2").build());
  CHECK(s2.sum == 2);
  CHECK(s2.reliable);
  CHECK(s2.companion_class == "e");
  CHECK(s2.discrepancy <= 1e-3);

  auto torus = index_sum(torus_constant_section(), torus_model());
  CHECK(torus.sum == 0);
  CHECK(torus.discrepancy == 0.0);

  auto o3 = index_sum(section_entry("o3-poly").build(), line_bundle_model(3));
  CHECK(o3.sum == 3);
  CHECK(o3.zeros.size() == 3);
  CHECK(o3.discrepancy <= 1e-2);

  CHECK_THROWS_AS(index_sum(torus_constant_section(), cp_model(2)), UsageError);
  CHECK_THROWS_AS(section_entry("nope"), UsageError);
}

TEST_CASE("degeneracy scans") {
  const Chart c2 = Chart::box(2, -1, 1, 32, false, 0.2);
  auto e1 = window_section("e1", ScalarKind::Real, 2, c2, [](const Point&) { return std::vector<double>{1.0, 0.0}; });
  auto e2 = window_section("e2", ScalarKind::Real, 2, c2, [](const Point&) { return std::vector<double>{0.0, 1.0}; });
  ScanOptions small;
  small.grid = {32, 32};
  auto indep = degeneracy_scan({e1, e2}, 2, small);
  CHECK(indep.points.empty());
  CHECK_FALSE(indep.nongeneric);
  CHECK(genericity_check({e1, e2}, 2, small).all_pass);
  CHECK(genericity_check({e1, e2}, 2, small).points.empty());

  // s2 = f s1 everywhere
  auto dep = window_section("f e1", ScalarKind::Real, 2, c2, [](const Point& x) { return std::vector<double>{2.0 + x[0], 0.0}; });
  auto whole = degeneracy_scan({e1, dep}, 2, small);
  CHECK(whole.degenerate_fraction == 1.0);
  CHECK(whole.nongeneric);
  CHECK(whole.points.size() == 32u * 32u);
  CHECK(whole.fitted_dimension == doctest::Approx(2.0));

  // tangential: s2 = x^2 e2 + y e1 degenerates along x = 0 without transversality
  auto tang = window_section("tangential", ScalarKind::Real, 2, c2, [](const Point& x) { return std::vector<double>{x[1], x[0] * x[0]}; });
  auto gt = genericity_check({e1, tang}, 2, small);
  REQUIRE_FALSE(gt.points.empty());
  CHECK_FALSE(gt.all_pass);
  for (const auto& p : gt.points) CHECK(std::abs(p.location[0]) <= 1e-4);

  // transverse: s2 = x e2 + y e1 gives the line x = 0, dimension 1
  auto trans = window_section("transverse", ScalarKind::Real, 2, c2, [](const Point& x) { return std::vector<double>{x[1], x[0]}; });
  auto line = degeneracy_scan({e1, trans}, 2, small);
  CHECK(line.expected_dimension == 1);
  CHECK(std::abs(line.fitted_dimension - 1.0) <= 0.2);
  CHECK_FALSE(line.nongeneric);
  CHECK(genericity_check({e1, trans}, 2, small).all_pass);

  // complex pair on a 4-chart: (1, 0) and (z1, z2 - z1^2) degenerate on z2 = z1^2
  const Chart c4 = Chart::box(4, -1, 1, 12, false, 0.2);
  auto one = window_section("(1,0)", ScalarKind::Complex, 2, c4, [](const Point&) { return std::vector<double>{1.0, 0.0, 0.0, 0.0}; });
  auto curve = window_section("curve", ScalarKind::Complex, 2, c4, [](const Point& x) {
    const Complex z1(x[0], x[1]), z2(x[2], x[3]);
    const Complex b = z2 - z1 * z1;
    return std::vector<double>{z1.real(), z1.imag(), b.real(), b.imag()};
  });
  ScanOptions s4;
  s4.grid = {12, 12, 12, 12};
  auto surf = degeneracy_scan({one, curve}, 2, s4);
  CHECK(surf.expected_dimension == 2);
  REQUIRE(surf.points.size() > 20u);
  CHECK(std::abs(surf.fitted_dimension - 2.0) <= 0.2);
  CHECK_FALSE(surf.nongeneric);
  for (const auto& p : surf.points) {
    const Complex z1(p.location[0], p.location[1]), z2(p.location[2], p.location[3]);
    CHECK(std::abs(z2 - z1 * z1) <= 1e-8);
    CHECK(p.in_stratum);
  }
  CHECK(genericity_check({one, curve}, 2, s4).all_pass);

  // classification: where s1 itself vanishes the point is near D_1, not in N_2
  auto vanishing = window_section("x e1", ScalarKind::Real, 2, c2, [](const Point& x) { return std::vector<double>{x[0] - 0.01, 0.0}; });
  auto mixed = degeneracy_scan({vanishing, e1}, 2, small);
  CHECK(mixed.degenerate_fraction == 1.0);
  int near_d1 = 0;
  for (const auto& p : mixed.points) near_d1 += !p.in_stratum;
  CHECK(near_d1 == 0);  // s1 = x - 0.01 is never below tau on midpoints
  CHECK_THROWS_AS(degeneracy_scan({e1}, 2, small), UsageError);
  CHECK_THROWS_AS(degeneracy_scan({e1, one}, 2, small), UsageError);
}

TEST_CASE("fitted dimension of synthetic clouds") {
  std::vector<Point> plane, line, blob;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) plane.push_back({0.05 * i, 0.05 * j, 0.3, 0.05 * i - 0.05 * j});
  for (int i = 0; i < 100; ++i) line.push_back({0.01 * i, 0.02 * i, -0.01 * i});
  CHECK(fitted_dimension(plane, 0.2) == doctest::Approx(2.0));
  CHECK(fitted_dimension(line, 0.05) == doctest::Approx(1.0));
  CHECK(fitted_dimension({{0.0, 0.0}, {5.0, 5.0}}, 1.0) == 0.0);
}

TEST_CASE("intersection numbers on CP^1 x CP^1") {
  for (int d : {1, 2}) {
    auto ex = product_intersection_example(d);
    auto r = intersection_number(ex.S, ex.section, ex.ambient);
    CHECK(r.count == d);
    CHECK(r.reliable);
    CHECK(r.conventions_agree);
    CHECK(std::abs(r.companion - d) <= 1e-2);
    for (const auto& p : r.points) {
      CHECK(p.zero.index == 1);
      CHECK(p.transversality > 0.1);
    }
    // a small move of S keeps the count
    auto moved = product_intersection_example(d, Complex(0.45, -0.25));
    CHECK(intersection_number(moved.S, moved.section, moved.ambient).count == d);

    auto away = product_intersection_example(d, {}, true);
    auto r0 = intersection_number(away.S, away.section, away.ambient);
    CHECK(r0.count == 0);
    CHECK(r0.points.empty());
    CHECK(std::abs(r0.companion) <= 1e-2);
  }
}

TEST_CASE("Poincare dual checks") {
  auto line = line_dual_example();
  auto r = poincare_dual_check(line.model, line.k, line.xi, line.section);
  CHECK(std::abs(r.lhs - 2.0) <= 1e-2);
  CHECK(r.rhs == 2.0);
  CHECK(r.reliable);
  CHECK(r.zeros.size() == 2);

  auto prod = product_dual_example();
  auto p = poincare_dual_check(prod.model, prod.k, prod.xi, prod.section, prod.locus);
  CHECK(std::abs(p.lhs - 1.0) <= 2e-2);
  CHECK(std::abs(p.rhs - 1.0) <= 1e-9);
  CHECK(p.component_signs == std::vector<int>{1});
  CHECK(p.reliable);

  // degree and closedness preconditions
  CHECK_THROWS_AS(poincare_dual_check(line.model, 2, line.xi, line.section), UsageError);
  FormField<double> one_form(prod.model.base.chart, 1, [](const Point&) { return Form<double>::dx(4, 3); });
  CHECK_THROWS_AS(poincare_dual_check(prod.model, prod.k, one_form, prod.section, prod.locus), UsageError);
  FormField<double> open(prod.model.base.chart, 2, [](const Point& x) { return Form<double>::monomial(4, MultiIndex::from_mask(0b1100u), x[0]); });
  CHECK_THROWS_AS(poincare_dual_check(prod.model, prod.k, open, prod.section, prod.locus), UsageError);
  CHECK_THROWS_AS(poincare_dual_check(prod.model, prod.k, prod.xi, prod.section), UnsupportedError);
  // a component off the zero locus is rejected
  auto shifted = prod.locus;
  shifted[0].embedding.value = [](const Point& t) { return Point{0.0, 0.0, t[0], t[1]}; };
  shifted[0].embedding.jacobian = {};
  CHECK_THROWS_AS(poincare_dual_check(prod.model, prod.k, prod.xi, prod.section, shifted), UsageError);
}

TEST_CASE("section tables") {
  const std::string path = "section_table_test.txt";
  {
    std::ofstream out(path);
    out << "# linear field with a zero at (0.3, -0.2)\n";
    out << "x0 x1 v0 v1\n";
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) {
        const double x = -1.0 + 0.2 * i, y = -1.0 + 0.2 * j;
        out << x << ' ' << y << ' ' << (x - 0.3) << ' ' << -(y + 0.2) << '\n';
      }
  }
  auto s = load_section_table(path, "plane", ScalarKind::Real);
  CHECK(s.rank == 2);
  ZeroOptions opt;
  opt.grid = {20, 20};
  auto z = find_zeros(s, opt);
  REQUIRE(z.size() == 1);
  CHECK(z[0].location[0] == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(z[0].location[1] == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(z[0].index == -1);

  {
    std::ofstream out(path);
    out << "x0 x1 v0 v1\n0 0 1 1\n0 1 1 1\n";
  }
  CHECK_THROWS_AS(load_section_table(path, "plane", ScalarKind::Real), UsageError);
  {
    std::ofstream out(path);
    out << "x0 v0\n0 abc\n";
  }
  CHECK_THROWS_AS(load_section_table(path, "plane", ScalarKind::Real), UsageError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_section_table(path, "plane", ScalarKind::Real), UsageError);
}

TEST_CASE("complement of a nowhere-zero section") {
  // trivial flat C^2 over a box with v = (1, 0): F is spanned by (0, 1) and flat
  Base b{"box", Chart::box(2, -1, 1, 8), {}};
  auto flat = trivial_model(b, 2, ScalarKind::Complex);
  MatrixField<Complex> zero(b.chart, 1, [](const Point&) { return FormMatrix<Complex>(2, 2, 2); });
  flat.connection = zero;
  auto f = complement_line(flat, [](const Point&) { return std::vector<Complex>{1.0, 0.0}; });
  CHECK(f.complex_curvature()({0.1, 0.2}).max_abs() <= 1e-12);
  CHECK_THROWS_AS(complement_line(line_bundle_model(1), [](const Point&) { return std::vector<Complex>{1.0, 0.0}; }), UsageError);
}
