#include "chernlab/geometry_zoo.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>
#include <sstream>

namespace chernlab {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

template <class S>
FormMatrix<S> scalar_left(const Matrix<S>& a, const FormMatrix<S>& b) {
  return wedge(scalar_matrix<S>(a.rows, a.cols, a.data, b.ambient_dim()), b);
}
template <class S>
FormMatrix<S> scalar_right(const FormMatrix<S>& a, const Matrix<S>& b) {
  return wedge(a, scalar_matrix<S>(b.rows, b.cols, b.data, a.ambient_dim()));
}

template <class S>
FormMatrix<S> block_diagonal(const FormMatrix<S>& a, const FormMatrix<S>& b) {
  FormMatrix<S> out(a.rows() + b.rows(), a.cols() + b.cols(), a.ambient_dim());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) out(a.rows() + i, a.cols() + j) = b(i, j);
  return out;
}

template <class S>
MatrixField<S> zero_matrix_field(const Chart& chart, int rank, int degree) {
  const int m = chart.dim();
  return MatrixField<S>(chart, degree, [rank, m](const Point&) { return FormMatrix<S>(rank, rank, m); });
}

Matrix<Complex> cholesky(const Matrix<Complex>& h) {
  const int n = h.rows;
  Matrix<Complex> l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = h(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw DomainError("cholesky: metric not positive definite");
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      Complex s = h(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Field maps applied pointwise across the variant.
AnyMatrixField pull_any(const AnyMatrixField& f, const SmoothMap& phi, const Chart& chart) {
  return std::visit([&](const auto& field) -> AnyMatrixField { return pullback(field, phi).with_chart(chart); }, f);
}

AnyMatrixField sum_any(const AnyMatrixField& a, const AnyMatrixField& b, bool block) {
  return std::visit(
      [&](const auto& fa) -> AnyMatrixField {
        using F = std::decay_t<decltype(fa)>;
        const F& fb = std::get<F>(b);
        if (block)
          return F(fa.chart(), fa.degree(), [fa, fb](const Point& x) { return block_diagonal(fa(x), fb(x)); });
        return fa + fb;
      },
      a);
}

}  // namespace

Params IntegrationPlan::describe() const {
  Params p;
  switch (kind) {
    case Kind::Direct:
      p.push_back({"plan_direct", 1.0});
      break;
    case Kind::Caps:
      p.push_back({"plan_caps", 1.0});
      p.push_back({"cap_delta", cap_delta});
      break;
    case Kind::Radial:
      p.push_back({"plan_radial", 1.0});
      p.push_back({"radius", radius});
      p.push_back({"radial_nodes", static_cast<double>(radial_nodes)});
      p.push_back({"angular_nodes", static_cast<double>(angular_nodes)});
      p.push_back({"extrapolate", extrapolate ? 1.0 : 0.0});
      p.push_back({"gauss", gauss ? 1.0 : 0.0});
      break;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) p.push_back({"grid_" + std::to_string(i), static_cast<double>(grid[i])});
  return p;
}

Base product_base(const Base& a, const Base& b) {
  Base out;
  out.name = a.name + "x" + b.name;
  out.chart = Chart::product(a.chart, b.chart);
  using K = IntegrationPlan::Kind;
  if (a.plan.kind == K::Radial && b.plan.kind == K::Radial) {
    out.plan = a.plan;
    const int off = a.chart.dim();
    for (auto [x, y] : b.plan.pairs) out.plan.pairs.push_back({x + off, y + off});
    out.plan.radial_nodes = std::min(a.plan.radial_nodes, b.plan.radial_nodes);
    out.plan.angular_nodes = std::min(a.plan.angular_nodes, b.plan.angular_nodes);
  } else if (a.plan.kind == K::Direct && b.plan.kind == K::Direct) {
    out.plan = a.plan;
    out.plan.grid = a.plan.grid.empty() ? a.chart.grid() : a.plan.grid;
    const auto& gb = b.plan.grid.empty() ? b.chart.grid() : b.plan.grid;
    out.plan.grid.insert(out.plan.grid.end(), gb.begin(), gb.end());
  } else {
    throw UnsupportedError("product_base: only direct x direct and radial x radial bases are supported");
  }
  return out;
}

const MatrixField<double>& BundleModel::real_curvature() const {
  if (is_complex()) throw UsageError(name + ": model is complex");
  return std::get<MatrixField<double>>(curvature);
}
const MatrixField<Complex>& BundleModel::complex_curvature() const {
  if (!is_complex()) throw UsageError(name + ": model is real");
  return std::get<MatrixField<Complex>>(curvature);
}
const MatrixField<double>& BundleModel::real_connection() const {
  if (!connection) throw UsageError(name + ": model has no connection");
  if (is_complex()) throw UsageError(name + ": model is complex");
  return std::get<MatrixField<double>>(*connection);
}
const MatrixField<Complex>& BundleModel::complex_connection() const {
  if (!connection) throw UsageError(name + ": model has no connection");
  if (!is_complex()) throw UsageError(name + ": model is real");
  return std::get<MatrixField<Complex>>(*connection);
}

double structure_residual(const BundleModel& m, const std::vector<Point>& pts, double step) {
  double worst = 0.0;
  if (m.is_complex()) {
    auto derived = curvature_from_connection(m.complex_connection(), step);
    for (const auto& p : pts) worst = std::max(worst, distance(derived(p), m.complex_curvature()(p)));
  } else {
    auto derived = curvature_from_connection(m.real_connection(), step);
    for (const auto& p : pts) worst = std::max(worst, distance(derived(p), m.real_curvature()(p)));
  }
  return worst;
}

BundleModel s2_model(double cap_delta, int n_theta, int n_phi) {
  if (!(cap_delta > 0.0 && cap_delta < kPi / 4)) throw UsageError("s2_model: cap radius must lie in (0, pi/4)");
  Chart chart({{cap_delta, kPi - cap_delta}, {0.0, 2 * kPi}}, {n_theta, n_phi}, {false, true}, cap_delta / 2);
  BundleModel m;
  m.name = "s2";
  m.base = Base{"s2", chart, {}};
  m.base.plan.kind = IntegrationPlan::Kind::Caps;
  m.base.plan.cap_delta = cap_delta;
  m.rank = 2;
  m.kind = ScalarKind::Real;
  m.connection = MatrixField<double>(chart, 1, [](const Point& x) {
    FormMatrix<double> w(2, 2, 2);
    w(0, 1) = std::cos(x[0]) * Form<double>::dx(2, 2);
    w(1, 0) = -w(0, 1);
    return w;
  });
  m.curvature = MatrixField<double>(chart, 2, [](const Point& x) {
    FormMatrix<double> o(2, 2, 2);
    o(0, 1) = Form<double>::monomial(2, MultiIndex::from_mask(0b11), -std::sin(x[0]));
    o(1, 0) = -o(0, 1);
    return o;
  });
  m.parameters = {{"cap_delta", cap_delta}, {"n_theta", static_cast<double>(n_theta)}, {"n_phi", static_cast<double>(n_phi)}};
  // Each omitted cap {theta < delta} carries (1 - cos delta) of the Euler integral.
  m.cap_correction = [cap_delta](const std::string& mono) -> std::optional<double> {
    if (parse_monomial(mono).factors.size() == 1 && parse_monomial(mono).factors[0].kind == 'e' && parse_monomial(mono).factors[0].power == 1)
      return 2.0 * (1.0 - std::cos(cap_delta));
    return std::nullopt;
  };
  return m;
}

BundleModel torus_model(double perturbation, int grid) {
  Chart chart = Chart::box(2, 0.0, 2 * kPi, grid, true);
  BundleModel m;
  m.name = perturbation == 0.0 ? "torus" : "torus-perturbed";
  m.base = Base{"t2", chart, {}};
  m.rank = 2;
  m.kind = ScalarKind::Real;
  const double eps = perturbation;
  MatrixField<double> omega(chart, 1, [eps](const Point& x) {
    FormMatrix<double> w(2, 2, 2);
    if (eps != 0.0) {
      w(0, 1) = (eps * std::sin(x[1])) * Form<double>::dx(2, 1) + (eps * std::sin(x[0] + x[1])) * Form<double>::dx(2, 2);
      w(1, 0) = -w(0, 1);
    }
    return w;
  });
  m.connection = omega;
  if (eps == 0.0)
    m.curvature = zero_matrix_field<double>(chart, 2, 2);
  else
    m.curvature = curvature_from_connection(omega);
  m.parameters = {{"perturbation", perturbation}, {"grid", static_cast<double>(grid)}};
  return m;
}

Base affine_base(int n, double radius, int radial_nodes, int angular_nodes) {
  if (n < 1 || n > 2) throw UsageError("affine chart supported for n = 1, 2");
  if (radial_nodes <= 0) radial_nodes = n == 1 ? 400 : 160;
  Base b;
  b.name = "cp" + std::to_string(n);
  // Coordinates are unbounded in principle; the box only has to contain the
  // truncated polydisks and section scan regions.
  b.chart = Chart::box(2 * n, -1e4, 1e4, 8, false, 1.0);
  b.plan.kind = IntegrationPlan::Kind::Radial;
  for (int k = 0; k < n; ++k) b.plan.pairs.push_back({2 * k, 2 * k + 1});
  b.plan.radius = radius;
  b.plan.radial_nodes = radial_nodes;
  b.plan.angular_nodes = angular_nodes;
  return b;
}

FubiniStudyPoint fubini_study(const Point& x) {
  const int n = static_cast<int>(x.size()) / 2;
  const int m = 2 * n;
  std::vector<Complex> z(static_cast<std::size_t>(n)), zb(static_cast<std::size_t>(n));
  std::vector<Form<Complex>> dz, dzb;
  double phi = 1.0;
  for (int k = 0; k < n; ++k) {
    z[static_cast<std::size_t>(k)] = {x[static_cast<std::size_t>(2 * k)], x[static_cast<std::size_t>(2 * k + 1)]};
    zb[static_cast<std::size_t>(k)] = std::conj(z[static_cast<std::size_t>(k)]);
    phi += std::norm(z[static_cast<std::size_t>(k)]);
    const auto dxk = form_cast<Complex>(Form<double>::dx(m, 2 * k + 1));
    const auto dyk = form_cast<Complex>(Form<double>::dx(m, 2 * k + 2));
    dz.push_back(dxk + kI * dyk);
    dzb.push_back(dxk - kI * dyk);
  }
  const double p2 = phi * phi, p3 = p2 * phi, p4 = p3 * phi;
  auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  auto Z = [&](int i) { return z[static_cast<std::size_t>(i)]; };
  auto ZB = [&](int i) { return zb[static_cast<std::size_t>(i)]; };

  FubiniStudyPoint out;
  out.h = Matrix<Complex>(n, n);
  std::vector<Matrix<Complex>> dh(static_cast<std::size_t>(n), Matrix<Complex>(n, n));
  std::vector<Matrix<Complex>> dhb(static_cast<std::size_t>(n), Matrix<Complex>(n, n));
  std::vector<std::vector<Matrix<Complex>>> ddh(static_cast<std::size_t>(n), std::vector<Matrix<Complex>>(static_cast<std::size_t>(n), Matrix<Complex>(n, n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.h(i, j) = delta(i, j) / phi - ZB(i) * Z(j) / p2;
      for (int k = 0; k < n; ++k) {
        dh[static_cast<std::size_t>(k)](i, j) = -delta(i, j) * ZB(k) / p2 - ZB(i) * delta(j, k) / p2 + 2.0 * ZB(i) * Z(j) * ZB(k) / p3;
        dhb[static_cast<std::size_t>(k)](i, j) = -delta(i, j) * Z(k) / p2 - delta(i, k) * Z(j) / p2 + 2.0 * ZB(i) * Z(j) * Z(k) / p3;
        for (int l = 0; l < n; ++l) {
          // d/dzbar_l of dh_k
          ddh[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)](i, j) =
              -delta(i, j) * delta(k, l) / p2 + 2.0 * delta(i, j) * ZB(k) * Z(l) / p3 - delta(i, l) * delta(j, k) / p2 +
              2.0 * ZB(i) * delta(j, k) * Z(l) / p3 + 2.0 * (delta(i, l) * Z(j) * ZB(k) + ZB(i) * Z(j) * delta(k, l)) / p3 -
              6.0 * ZB(i) * Z(j) * ZB(k) * Z(l) / p4;
        }
      }
    }
  const Matrix<Complex> hinv = inverse(out.h);
  out.theta = FormMatrix<Complex>(n, n, m);
  out.big_theta = FormMatrix<Complex>(n, n, m);
  for (int k = 0; k < n; ++k) {
    const Matrix<Complex> a = dh[static_cast<std::size_t>(k)] * hinv;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.theta(i, j) += a(i, j) * dz[static_cast<std::size_t>(k)];
    for (int l = 0; l < n; ++l) {
      // Theta = sum_kl (dH_k H^-1 dbarH_l - dbar_l dH_k) H^-1 dz_k ^ dzbar_l
      const Matrix<Complex> mk = (a * dhb[static_cast<std::size_t>(l)] - ddh[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]) * hinv;
      const Form<Complex> basis = wedge(dz[static_cast<std::size_t>(k)], dzb[static_cast<std::size_t>(l)]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.big_theta(i, j) += mk(i, j) * basis;
    }
  }
  out.g = inverse(cholesky(out.h));
  return out;
}

BundleModel cp_model(int n, double radius, int radial_nodes, int angular_nodes) {
  Base base = affine_base(n, radius, radial_nodes, angular_nodes);
  BundleModel m;
  m.name = "cp" + std::to_string(n);
  m.base = base;
  m.rank = n;
  m.kind = ScalarKind::Complex;
  const Chart chart = base.chart;
  m.curvature = MatrixField<Complex>(chart, 2, [](const Point& x) {
    const auto fs = fubini_study(x);
    // unitary frame: Omega = g Theta g^-1
    return scalar_right(scalar_left(fs.g, fs.big_theta), inverse(fs.g));
  });
  m.connection = MatrixField<Complex>(chart, 1, [n](const Point& x) {
    const int dim = 2 * n;
    const auto fs = fubini_study(x);
    FormMatrix<Complex> dg(n, n, dim);
    const double h = 1e-5;
    for (int a = 0; a < dim; ++a) {
      Point xp = x, xm = x;
      xp[static_cast<std::size_t>(a)] += h;
      xm[static_cast<std::size_t>(a)] -= h;
      const Matrix<Complex> gp = inverse(cholesky(fubini_study(xp).h));
      const Matrix<Complex> gm = inverse(cholesky(fubini_study(xm).h));
      const auto dxa = form_cast<Complex>(Form<double>::dx(dim, a + 1));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dg(i, j) += ((gp(i, j) - gm(i, j)) / (2 * h)) * dxa;
    }
    const Matrix<Complex> ginv = inverse(fs.g);
    // omega = (dg + g theta) g^-1
    return scalar_right(dg + scalar_left(fs.g, fs.theta), ginv);
  });
  m.parameters = base.plan.describe();
  m.parameters.insert(m.parameters.begin(), {"n", static_cast<double>(n)});
  return m;
}

BundleModel line_bundle_model(int d, double radius, int radial_nodes, int angular_nodes) {
  Base base = affine_base(1, radius, radial_nodes, angular_nodes);
  BundleModel m;
  m.name = "o" + std::to_string(d);
  m.base = base;
  m.rank = 1;
  m.kind = ScalarKind::Complex;
  const Chart chart = base.chart;
  const double dd = d;
  m.curvature = MatrixField<Complex>(chart, 2, [dd](const Point& x) {
    const double phi = 1.0 + x[0] * x[0] + x[1] * x[1];
    FormMatrix<Complex> o(1, 1, 2);
    o(0, 0) = Form<Complex>::monomial(2, MultiIndex::from_mask(0b11), Complex(0.0, -2.0 * dd / (phi * phi)));
    return o;
  });
  m.connection = MatrixField<Complex>(chart, 1, [dd](const Point& x) {
    const double phi = 1.0 + x[0] * x[0] + x[1] * x[1];
    FormMatrix<Complex> w(1, 1, 2);
    // -i d (x dy - y dx) / phi
    w(0, 0) = Form<Complex>::from_terms(2, {{0b01, Complex(0.0, dd * x[1] / phi)}, {0b10, Complex(0.0, -dd * x[0] / phi)}});
    return w;
  });
  m.parameters = base.plan.describe();
  m.parameters.insert(m.parameters.begin(), {"degree", dd});
  return m;
}

BundleModel realify_model(const BundleModel& c) {
  if (!c.is_complex()) throw UsageError("realify_model: input must be complex");
  BundleModel m;
  m.name = "real-" + c.name;
  m.base = c.base;
  m.rank = 2 * c.rank;
  m.kind = ScalarKind::Real;
  m.orientation = c.orientation;
  const auto omega = c.complex_curvature();
  m.curvature = MatrixField<double>(omega.chart(), 2, [omega](const Point& x) { return realify_curvature(omega(x)); });
  if (c.connection) {
    const auto w = c.complex_connection();
    m.connection = MatrixField<double>(w.chart(), 1, [w](const Point& x) { return realify_curvature(w(x)); });
  }
  m.parameters = c.parameters;
  m.cap_correction = c.cap_correction;
  return m;
}

BundleModel direct_sum(const BundleModel& a, const BundleModel& b) {
  if (a.kind != b.kind) throw UsageError("direct_sum: scalar kinds differ");
  if (a.dim() != b.dim()) throw UsageError("direct_sum: bases differ");
  BundleModel m;
  m.name = a.name + "+" + b.name;
  m.base = a.base;
  m.rank = a.rank + b.rank;
  m.kind = a.kind;
  m.orientation = a.orientation * b.orientation;
  m.curvature = sum_any(a.curvature, b.curvature, true);
  if (a.connection && b.connection) m.connection = sum_any(*a.connection, *b.connection, true);
  m.parameters = a.parameters;
  m.parameters.insert(m.parameters.end(), b.parameters.begin(), b.parameters.end());
  return m;
}

BundleModel pullback_model(const BundleModel& src, const SmoothMap& phi, const Base& new_base) {
  if (phi.target.dim() != src.dim()) throw UsageError("pullback_model: map target is not the model base");
  if (phi.source.dim() != new_base.chart.dim()) throw UsageError("pullback_model: map source is not the new base");
  BundleModel m;
  m.name = "pullback-" + src.name;
  m.base = new_base;
  m.rank = src.rank;
  m.kind = src.kind;
  m.orientation = src.orientation;
  m.curvature = pull_any(src.curvature, phi, new_base.chart);
  if (src.connection) m.connection = pull_any(*src.connection, phi, new_base.chart);
  m.parameters = src.parameters;
  return m;
}

BundleModel tensor_line(const BundleModel& a, const BundleModel& b) {
  if (!a.is_complex() || !b.is_complex() || a.rank != 1 || b.rank != 1) throw UsageError("tensor_line: needs two complex line bundles");
  if (a.dim() != b.dim()) throw UsageError("tensor_line: bases differ");
  BundleModel m;
  m.name = a.name + "*" + b.name;
  m.base = a.base;
  m.rank = 1;
  m.kind = ScalarKind::Complex;
  m.curvature = sum_any(a.curvature, b.curvature, false);
  if (a.connection && b.connection) m.connection = sum_any(*a.connection, *b.connection, false);
  m.parameters = a.parameters;
  return m;
}

BundleModel trivial_model(const Base& base, int rank, ScalarKind kind) {
  BundleModel m;
  m.name = "trivial" + std::to_string(rank);
  m.base = base;
  m.rank = rank;
  m.kind = kind;
  if (kind == ScalarKind::Complex) {
    m.curvature = zero_matrix_field<Complex>(base.chart, rank, 2);
    m.connection = zero_matrix_field<Complex>(base.chart, rank, 1);
  } else {
    m.curvature = zero_matrix_field<double>(base.chart, rank, 2);
    m.connection = zero_matrix_field<double>(base.chart, rank, 1);
  }
  return m;
}

BundleModel pullback_first(const BundleModel& src, const Base& other) {
  Base prod = product_base(src.base, other);
  std::vector<int> axes;
  for (int i = 0; i < src.dim(); ++i) axes.push_back(i);
  auto m = pullback_model(src, SmoothMap::projection(prod.chart, src.base.chart, axes), prod);
  m.name = "pr1-" + src.name;
  return m;
}

BundleModel pullback_second(const Base& other, const BundleModel& src) {
  Base prod = product_base(other, src.base);
  std::vector<int> axes;
  for (int i = 0; i < src.dim(); ++i) axes.push_back(other.chart.dim() + i);
  auto m = pullback_model(src, SmoothMap::projection(prod.chart, src.base.chart, axes), prod);
  m.name = "pr2-" + src.name;
  return m;
}

BundleModel external_sum(const BundleModel& a, const BundleModel& b) {
  auto m = direct_sum(pullback_first(a, b.base), pullback_second(a.base, b));
  m.name = a.name + "[+]" + b.name;
  return m;
}

Monomial parse_monomial(const std::string& text) {
  Monomial mono;
  mono.text = text;
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw UsageError("empty characteristic-class monomial");
  std::size_t i = 0;
  auto read_int = [&](const char* what) {
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (start == i || i - start > 3) throw UsageError(std::string("monomial '") + text + "': expected " + what);
    return std::stoi(s.substr(start, i - start));
  };
  while (true) {
    ClassFactor f;
    if (i >= s.size()) throw UsageError("monomial '" + text + "': dangling '*'");
    f.kind = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++])));
    if (f.kind == 'c' || f.kind == 'p') {
      f.k = read_int("class index");
      if (f.k < 1) throw UsageError("monomial '" + text + "': class index must be at least 1");
    } else if (f.kind == 'e') {
      f.k = 0;
    } else {
      throw UsageError("monomial '" + text + "': unknown class '" + std::string(1, f.kind) + "'");
    }
    if (i < s.size() && s[i] == '^') {
      ++i;
      f.power = read_int("exponent");
      if (f.power < 1) throw UsageError("monomial '" + text + "': exponent must be at least 1");
    }
    mono.factors.push_back(f);
    if (i == s.size()) break;
    if (s[i] != '*') throw UsageError("monomial '" + text + "': unexpected '" + std::string(1, s[i]) + "'");
    ++i;
  }
  return mono;
}

int monomial_degree(const Monomial& mono, const BundleModel& m) {
  const int real_rank = m.is_complex() ? 2 * m.rank : m.rank;
  int deg = 0;
  for (const auto& f : mono.factors) {
    int d = 0;
    if (f.kind == 'c') {
      if (!m.is_complex()) throw UsageError("Chern classes need a complex model; " + m.name + " is real");
      d = 2 * f.k;
    } else if (f.kind == 'p') {
      d = 4 * f.k;
    } else {
      if (real_rank % 2 != 0) throw UsageError("Euler class needs even real rank");
      d = real_rank;
    }
    deg += d * f.power;
  }
  return deg;
}

Form<double> class_form(const BundleModel& m, char kind, int k, const Point& x) {
  const int dim = m.dim();
  if (m.is_complex()) {
    const auto omega = m.complex_curvature()(x);
    if (kind == 'c') {
      if (k > m.rank) return Form<double>(dim);
      return chern_forms(omega).c[static_cast<std::size_t>(k)];
    }
    const auto real = realify_curvature(omega);
    if (kind == 'e') return euler_form(real);
    const auto p = pontryagin_forms(real).p;
    return k < static_cast<int>(p.size()) ? p[static_cast<std::size_t>(k)] : Form<double>(dim);
  }
  if (kind == 'c') throw UsageError("Chern classes need a complex model");
  const auto omega = m.real_curvature()(x);
  if (kind == 'e') return euler_form(omega);
  const auto p = pontryagin_forms(omega).p;
  return k < static_cast<int>(p.size()) ? p[static_cast<std::size_t>(k)] : Form<double>(dim);
}

FormField<double> class_integrand(const BundleModel& m, const Monomial& mono) {
  const int deg = monomial_degree(mono, m);
  if (deg != m.dim())
    throw UsageError("monomial '" + mono.text + "' has degree " + std::to_string(deg) + " but the base of " + m.name + " has dimension " +
                     std::to_string(m.dim()));
  const BundleModel model = m;
  return FormField<double>(m.base.chart, deg, [model, mono](const Point& x) {
    const int dim = model.dim();
    std::optional<ChernForms> chern;
    std::optional<PontryaginForms> pont;
    std::optional<Form<double>> euler;
    std::optional<FormMatrix<double>> real;
    auto real_curv = [&]() -> const FormMatrix<double>& {
      if (!real) real = model.is_complex() ? realify_curvature(model.complex_curvature()(x)) : model.real_curvature()(x);
      return *real;
    };
    Form<double> acc = Form<double>::constant(dim, 1.0);
    for (const auto& f : mono.factors) {
      Form<double> cls(dim);
      if (f.kind == 'c') {
        if (!chern) chern = chern_forms(model.complex_curvature()(x));
        if (f.k < static_cast<int>(chern->c.size())) cls = chern->c[static_cast<std::size_t>(f.k)];
      } else if (f.kind == 'p') {
        if (!pont) pont = pontryagin_forms(real_curv());
        if (f.k < static_cast<int>(pont->p.size())) cls = pont->p[static_cast<std::size_t>(f.k)];
      } else {
        if (!euler) euler = euler_form(real_curv());
        cls = *euler;
      }
      for (int p = 0; p < f.power; ++p) acc = wedge(acc, cls);
    }
    return acc;
  });
}

namespace {

std::vector<int> halved(const std::vector<int>& g) {
  std::vector<int> h;
  for (int v : g) h.push_back(std::max(3, v / 2));
  return h;
}

double radial_value(const FormField<double>& f, const Base& base, double radius, int radial_nodes) {
  const IntegrationPlan& plan = base.plan;
  std::vector<Interval> bounds;
  std::vector<int> grid;
  std::vector<bool> periodic;
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    bounds.push_back({0.0, 1.0});
    bounds.push_back({0.0, 2 * kPi});
    grid.push_back(radial_nodes);
    grid.push_back(plan.angular_nodes);
    periodic.push_back(false);
    periodic.push_back(true);
  }
  Chart polar(bounds, grid, periodic);
  const int target_dim = base.chart.dim();
  const auto pairs = plan.pairs;
  const double r = radius;
  SmoothMap map{polar, base.chart,
                [pairs, r, target_dim](const Point& q) {
                  Point x(static_cast<std::size_t>(target_dim), 0.0);
                  for (std::size_t k = 0; k < pairs.size(); ++k) {
                    const double s = q[2 * k], a = q[2 * k + 1];
                    x[static_cast<std::size_t>(pairs[k].first)] = r * s * s * std::cos(a);
                    x[static_cast<std::size_t>(pairs[k].second)] = r * s * s * std::sin(a);
                  }
                  return x;
                },
                [pairs, r, target_dim](const Point& q) {
                  Jacobian j(target_dim, static_cast<int>(2 * pairs.size()));
                  for (std::size_t k = 0; k < pairs.size(); ++k) {
                    const double s = q[2 * k], a = q[2 * k + 1];
                    const int cs = static_cast<int>(2 * k), ca = cs + 1;
                    j(pairs[k].first, cs) = 2 * r * s * std::cos(a);
                    j(pairs[k].first, ca) = -r * s * s * std::sin(a);
                    j(pairs[k].second, cs) = 2 * r * s * std::sin(a);
                    j(pairs[k].second, ca) = r * s * s * std::cos(a);
                  }
                  return j;
                }};
  Quadrature q;
  q.gauss = plan.gauss;
  return integrate_top(pullback(f, map), q);
}

}  // namespace

PlanIntegral integrate_over_base(const FormField<double>& f, const Base& base, bool refine) {
  const IntegrationPlan& plan = base.plan;
  PlanIntegral out;
  if (plan.kind == IntegrationPlan::Kind::Radial) {
    if (2 * static_cast<int>(plan.pairs.size()) != base.chart.dim()) throw UsageError("radial plan must cover every axis");
    auto extrapolated = [&](int nodes, double* spread) {
      const double v1 = radial_value(f, base, plan.radius, nodes);
      if (!plan.extrapolate) {
        if (spread) *spread = 0.0;
        return v1;
      }
      const double v2 = radial_value(f, base, 2 * plan.radius, nodes);
      if (spread) *spread = std::abs(v2 - v1);
      return (4.0 * v2 - v1) / 3.0;
    };
    out.value = extrapolated(plan.radial_nodes, &out.truncation_estimate);
    if (refine) out.refinement_estimate = std::abs(out.value - extrapolated(std::max(3, plan.radial_nodes / 2), nullptr));
    return out;
  }
  Quadrature q;
  q.grid = plan.grid.empty() ? base.chart.grid() : plan.grid;
  out.value = integrate_top(f, q);
  if (refine) {
    Quadrature half = q;
    half.grid = halved(q.grid);
    out.refinement_estimate = std::abs(out.value - integrate_top(f, half));
  }
  return out;
}

CharacteristicNumber characteristic_number(const BundleModel& m, const std::string& monomial, bool refine) {
  const Monomial mono = parse_monomial(monomial);
  const auto integrand = class_integrand(m, mono);
  PlanIntegral r = integrate_over_base(integrand, m.base, refine);
  if (m.base.plan.kind == IntegrationPlan::Kind::Caps) {
    std::optional<double> cap = m.cap_correction ? m.cap_correction(monomial) : std::nullopt;
    if (!cap) throw UnsupportedError("no analytic cap correction for '" + monomial + "' on " + m.name);
    r.value += *cap;
  }
  CharacteristicNumber out;
  out.model = m.name;
  out.monomial = monomial;
  out.value = m.orientation * r.value;
  out.truncation_estimate = r.truncation_estimate;
  out.refinement_estimate = r.refinement_estimate;
  out.parameters = m.parameters;
  for (const auto& p : m.base.plan.describe())
    if (std::none_of(out.parameters.begin(), out.parameters.end(), [&](const auto& q) { return q.first == p.first; })) out.parameters.push_back(p);
  return out;
}

const std::vector<RegistryEntry>& model_registry() {
  static const std::vector<RegistryEntry> registry = [] {
    std::vector<RegistryEntry> r;
    r.push_back({"s2", "tangent bundle of the round 2-sphere", [] { return s2_model(); }, {{"e", 2.0}}, {{"e", 1e-3}}});
    r.push_back({"torus", "flat 2-torus, trivial tangent bundle", [] { return torus_model(); }, {{"e", 0.0}}, {{"e", 1e-9}}});
    r.push_back({"torus-perturbed", "flat 2-torus with a perturbed connection", [] { return torus_model(0.3); }, {{"e", 0.0}}, {{"e", 1e-6}}});
    r.push_back({"cp1", "holomorphic tangent bundle of CP^1 (Fubini-Study)", [] { return cp_model(1); }, {{"c1", 2.0}, {"e", 2.0}}, {{"c1", 1e-2}, {"e", 1e-2}}});
    r.push_back({"cp2", "holomorphic tangent bundle of CP^2 (Fubini-Study)", [] { return cp_model(2); },
                 {{"c2", 3.0}, {"c1^2", 9.0}, {"p1", 3.0}, {"e", 3.0}}, {{"c2", 5e-2}, {"c1^2", 1e-1}, {"p1", 1e-1}, {"e", 5e-2}}});
    for (int d = 0; d <= 3; ++d)
      r.push_back({"o" + std::to_string(d), "line bundle O(" + std::to_string(d) + ") over CP^1", [d] { return line_bundle_model(d); },
                   {{"c1", static_cast<double>(d)}}, {{"c1", 1e-2}}});
    r.push_back({"real-o1", "realified O(1)", [] { return realify_model(line_bundle_model(1)); }, {{"e", 1.0}}, {{"e", 1e-2}}});
    r.push_back({"real-cp1", "realified tangent bundle of CP^1", [] { return realify_model(cp_model(1)); }, {{"e", 2.0}}, {{"e", 1e-2}}});
    r.push_back({"real-cp2", "realified tangent bundle of CP^2", [] { return realify_model(cp_model(2)); }, {{"p1", 3.0}, {"e", 3.0}},
                 {{"p1", 1e-1}, {"e", 5e-2}}});
    r.push_back({"pr1-o1", "pr1^* O(1) over CP^1 x CP^1", [] { return pullback_first(line_bundle_model(1, 20.0, 160), affine_base(1, 20.0, 160)); },
                 {{"c1^2", 0.0}}, {{"c1^2", 2e-2}}});
    r.push_back({"o1-sum-o1", "pr1^* O(1) + pr2^* O(1) over CP^1 x CP^1",
                 [] { return external_sum(line_bundle_model(1, 20.0, 160), line_bundle_model(1, 20.0, 160)); },
                 {{"c1^2", 2.0}, {"c2", 1.0}, {"p1", 0.0}}, {{"c1^2", 3e-2}, {"c2", 2e-2}, {"p1", 3e-2}}});
    r.push_back({"o11-plus-r2", "realified O(1,1) + trivial R^2 over CP^1 x CP^1",
                 [] {
                   auto o11 = tensor_line(pullback_first(line_bundle_model(1, 20.0, 160), affine_base(1, 20.0, 160)),
                                          pullback_second(affine_base(1, 20.0, 160), line_bundle_model(1, 20.0, 160)));
                   auto m = direct_sum(realify_model(o11), trivial_model(o11.base, 2, ScalarKind::Real));
                   m.name = "o11-plus-r2";
                   return m;
                 },
                 {{"p1", 2.0}, {"e", 0.0}}, {{"p1", 5e-2}, {"e", 1e-9}}});
    return r;
  }();
  return registry;
}

const RegistryEntry& registry_entry(const std::string& name) {
  for (const auto& e : model_registry())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : model_registry()) known += (known.empty() ? "" : ", ") + e.name;
  throw UsageError("unknown model '" + name + "' (known: " + known + ")");
}

}  // namespace chernlab
