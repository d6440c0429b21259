#include "chernlab/transgression.hpp"

#include <numbers>

namespace chernlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

Matrix<double> rotation_frame(double psi) {
  Matrix<double> r(2, 2);
  r(0, 0) = std::sin(psi);
  r(0, 1) = -std::cos(psi);
  r(1, 0) = std::cos(psi);
  r(1, 1) = std::sin(psi);
  return r;
}

FormMatrix<double> as_forms(const Matrix<double>& a, int m) { return scalar_matrix<double>(a.rows, a.cols, a.data, m); }

std::vector<int> default_grid(const std::vector<int>& g, int dim, int n) {
  return g.empty() ? std::vector<int>(static_cast<std::size_t>(dim), n) : g;
}

// Max of f over points, evaluated in slices and reduced in order.
double max_over(const std::vector<Point>& pts, const std::function<double(const Point&)>& f) {
  const int slices = std::max(1, std::min(64, static_cast<int>(pts.size())));
  auto part = map_slices<double>(slices, [&](int s) {
    double worst = 0.0;
    const std::size_t lo = pts.size() * static_cast<std::size_t>(s) / static_cast<std::size_t>(slices);
    const std::size_t hi = pts.size() * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(slices);
    for (std::size_t i = lo; i < hi; ++i) worst = std::max(worst, f(pts[i]));
    return worst;
  });
  double worst = 0.0;
  for (double v : part) worst = std::max(worst, v);
  return worst;
}

std::vector<Point> base_samples(const Chart& base, int per_axis) {
  if (base.dim() == 0) return {Point{}};
  return sample_points(base, std::vector<int>(static_cast<std::size_t>(base.dim()), per_axis));
}

}  // namespace

Matrix<double> SphereBundle::frame(const Point& x) const { return rotation_frame(x.back()); }

SphereBundle sphere_bundle(const BundleModel& input, int fiber_grid) {
  BundleModel m = input;
  if (m.is_complex()) {
    if (m.rank != 1) throw UnsupportedError("sphere_bundle: only real rank 2 (or complex rank 1) is supported");
    m = realify_model(m);
  }
  if (m.rank != 2) throw UnsupportedError("sphere_bundle: only rank 2 is supported, got rank " + std::to_string(m.rank));
  if (!m.connection) throw UsageError("sphere_bundle: model needs a connection");
  SphereBundle sb;
  sb.model = m;
  sb.base = m.base.chart;
  Chart fiber({{0.0, kTwoPi}}, {fiber_grid}, {true});
  sb.total = Chart::product(sb.base, fiber);
  std::vector<int> axes;
  for (int i = 0; i < sb.base.dim(); ++i) axes.push_back(i);
  sb.projection = SmoothMap::projection(sb.total, sb.base, axes);
  return sb;
}

ModifiedConnection modified_connection(const SphereBundle& sb) {
  const int m = sb.total.dim();
  const auto pw = pullback(sb.model.real_connection(), sb.projection).with_chart(sb.total);
  MatrixField<double> adapted(sb.total, 1, [pw, m](const Point& x) {
    const double psi = x.back();
    const Matrix<double> r = rotation_frame(psi);
    Matrix<double> dr(2, 2);
    dr(0, 0) = std::cos(psi);
    dr(0, 1) = std::sin(psi);
    dr(1, 0) = -std::sin(psi);
    dr(1, 1) = std::cos(psi);
    const Form<double> dpsi = Form<double>::dx(m, m);
    FormMatrix<double> dR = as_forms(dr, m).template map<double>([&](const Form<double>& c) { return wedge(c, dpsi); });
    // frame change in the row convention: (dR + R omega) R^t
    return wedge(dR + wedge(as_forms(r, m), pw(x)), as_forms(r.transpose(), m));
  });
  MatrixField<double> modified(sb.total, 1, [adapted](const Point& x) {
    const auto a = adapted(x);
    FormMatrix<double> out(a.rows(), a.cols(), a.ambient_dim());
    // keep the block orthogonal to the tautological vector, zero its row and column
    for (int i = 0; i + 1 < a.rows(); ++i)
      for (int j = 0; j + 1 < a.cols(); ++j) out(i, j) = a(i, j);
    return out;
  });
  return {adapted, modified};
}

MatrixField<double> interpolated_curvature(const SphereBundle& sb, double t, double step) {
  const auto mc = modified_connection(sb);
  const auto a = mc.pullback_adapted;
  const auto b = mc.modified;
  MatrixField<double> omega_t(sb.total, 1, [a, b, t](const Point& x) {
    const auto pa = a(x);
    return pa + t * (b(x) - pa);
  });
  return curvature_from_connection(omega_t, step);
}

FormField<double> transgression_eta(const SphereBundle& sb, int n_quad, double step) {
  if (n_quad < 1) throw UsageError("transgression_eta: n_quad must be at least 1");
  const int n = sb.model.rank / 2;
  const auto mc = modified_connection(sb);
  const auto diff = mc.modified - mc.pullback_adapted;
  const SphereBundle bundle = sb;
  std::function<FormField<double>(double)> family = [diff, n, bundle, step](double t) {
    std::optional<MatrixField<double>> omega_t;
    if (n > 1) omega_t = interpolated_curvature(bundle, t, step);
    return FormField<double>(bundle.total, 2 * n - 1, [diff, omega_t, n](const Point& x) {
      std::vector<FormMatrix<double>> slots{diff(x)};
      for (int k = 1; k < n; ++k) slots.push_back((*omega_t)(x));
      return polarized_pfaffian<double>(slots);
    });
  };
  return std::pow(-1.0 / kTwoPi, n) * parameter_integral(family, n_quad);
}

TransgressionResult transgression_check(const SphereBundle& sb, const TransgressionOptions& opt) {
  TransgressionResult out;
  out.eta = transgression_eta(sb, opt.n_quad, opt.step);
  const auto d_eta = exterior_derivative(out.eta, opt.step);
  const BundleModel model = sb.model;
  FormField<double> e(sb.base, 2 * (model.rank / 2), [model](const Point& x) { return euler_form(model.real_curvature()(x)); });
  const auto pe = pullback(e, sb.projection).with_chart(sb.total);
  const auto pts = sample_points(sb.total, default_grid(opt.residual_grid, sb.total.dim(), 64));
  out.residual = max_over(pts, [&](const Point& x) { return (pe(x) + d_eta(x)).max_abs(); });

  const Chart fiber({{0.0, kTwoPi}}, {opt.fiber_nodes}, {true});
  for (const auto& b : base_samples(sb.base, opt.fiber_samples)) {
    SmoothMap inclusion{fiber, sb.total,
                        [b](const Point& s) {
                          Point x = b;
                          x.push_back(s[0]);
                          return x;
                        },
                        {}};
    const int dim = sb.total.dim();
    inclusion.jacobian = [dim](const Point&) {
      Jacobian j(dim, 1);
      j(dim - 1, 0) = 1.0;
      return j;
    };
    out.fiber_integrals.push_back(integrate_top(pullback(out.eta, inclusion)));
  }
  double lo = out.fiber_integrals.front(), hi = lo, sum = 0.0;
  for (double v : out.fiber_integrals) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  out.fiber_mean = sum / static_cast<double>(out.fiber_integrals.size());
  out.fiber_spread = hi - lo;
  return out;
}

ThomProfile smoothstep_profile() {
  // s(u) = f(u) / (f(u) + f(1-u)), f(u) = exp(-1/u) for u > 0
  auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  auto df = [f](double u) { return u > 0.0 ? f(u) / (u * u) : 0.0; };
  ThomProfile p;
  p.name = "smoothstep";
  p.rho = [f](double r) {
    const double u = r - 1.0;
    if (u <= 0.0) return -1.0;
    if (u >= 1.0) return 0.0;
    return -1.0 + f(u) / (f(u) + f(1.0 - u));
  };
  p.drho = [f, df](double r) {
    const double u = r - 1.0;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = f(u), b = f(1.0 - u);
    return (df(u) * b + a * df(1.0 - u)) / ((a + b) * (a + b));
  };
  return p;
}

void validate_profile(const ThomProfile& p) {
  if (!p.rho || !p.drho) throw UsageError("thom profile: rho and its derivative are required");
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    if (std::abs(p.rho(r) + 1.0) > 1e-12) throw UsageError("thom profile: rho must equal -1 on [0, 1]");
    if (std::abs(p.rho(2.0 + r)) > 1e-12) throw UsageError("thom profile: rho must vanish on [2, 3]");
  }
  double prev = p.rho(1.0);
  for (int i = 1; i <= 1000; ++i) {
    const double v = p.rho(1.0 + i / 1000.0);
    if (v < prev - 1e-15) throw UsageError("thom profile: rho must be nondecreasing on [1, 2]");
    prev = v;
  }
}

ThomResult thom_form(const SphereBundle& sb, const ThomProfile& profile, const ThomOptions& opt) {
  validate_profile(profile);
  const int b = sb.base.dim();
  const double r_max = 2.5;
  Chart radial({{0.0, r_max}}, {opt.radial_nodes}, {false}, 0.1);
  Chart fiber_angle({{0.0, kTwoPi}}, {opt.angular_nodes}, {true});
  const Chart disk = Chart::product(Chart::product(sb.base, radial), fiber_angle);
  const int m = disk.dim();

  const auto eta = transgression_eta(sb, 2, opt.step);
  const auto d_eta = exterior_derivative(eta, opt.step);
  std::vector<int> axes;
  for (int i = 0; i < b; ++i) axes.push_back(i);
  axes.push_back(b + 1);
  const SmoothMap tau = SmoothMap::projection(disk, sb.total, axes);
  const auto tau_eta = pullback(eta, tau);
  const auto tau_deta = pullback(d_eta, tau);
  const ThomProfile prof = profile;

  ThomResult out;
  // Phi = d(rho tau^* eta) = rho' dr ^ tau^* eta + rho tau^* d eta
  out.phi = FormField<double>(disk, 2, [tau_eta, tau_deta, prof, b, m](const Point& x) {
    const double r = x[static_cast<std::size_t>(b)];
    Form<double> phi = prof.rho(r) * tau_deta(x);
    const double dr = prof.drho(r);
    if (dr != 0.0) phi += dr * wedge(Form<double>::dx(m, b + 1), tau_eta(x));
    return phi;
  });

  const Chart fiber_disk({{0.0, 2.0}, {0.0, kTwoPi}}, {opt.radial_nodes, opt.angular_nodes}, {false, true});
  for (const auto& p : base_samples(sb.base, opt.fiber_samples)) {
    SmoothMap inclusion{fiber_disk, disk,
                        [p](const Point& s) {
                          Point x = p;
                          x.push_back(s[0]);
                          x.push_back(s[1]);
                          return x;
                        },
                        [m](const Point&) {
                          Jacobian j(m, 2);
                          j(m - 2, 0) = 1.0;
                          j(m - 1, 1) = 1.0;
                          return j;
                        }};
    out.fiber_integrals.push_back(integrate_top(pullback(out.phi, inclusion)));
  }

  const auto d_phi = exterior_derivative(out.phi, opt.step);
  const auto pts = sample_points(disk, default_grid(opt.check_grid, m, 12));
  out.closedness = max_over(pts, [&](const Point& x) { return d_phi(x).max_abs(); });
  out.support_violation = max_over(pts, [&](const Point& x) {
    const double r = x[static_cast<std::size_t>(b)];
    if (r >= 2.0) return out.phi(x).max_abs();
    if (r <= 1.0) return (out.phi(x) + tau_deta(x)).max_abs();
    return 0.0;
  });
  return out;
}

BoundaryTransgression boundary_transgression(const BundleModel& model, const std::function<std::pair<double, double>(const Point&)>& field,
                                             int nodes) {
  const Chart& base = model.base.chart;
  if (base.dim() != 2 || base.periodic(0) || !base.periodic(1))
    throw UsageError("boundary_transgression: needs a (non-periodic, periodic) 2-chart");
  const SphereBundle sb = sphere_bundle(model);
  const auto eta = transgression_eta(sb, 2);
  SmoothMap sigma{base, sb.total,
                  [field](const Point& x) {
                    const auto [v1, v2] = field(x);
                    if (v1 == 0.0 && v2 == 0.0) throw DomainError("boundary_transgression: field vanishes on the boundary");
                    return Point{x[0], x[1], std::atan2(v2, v1)};
                  },
                  {}};
  const auto sigma_eta = pullback(eta, sigma);
  const Chart circle({{0.0, kTwoPi}}, {nodes}, {true});
  auto circle_integral = [&](double level) {
    SmoothMap c{circle, base, [level](const Point& s) { return Point{level, s[0]}; }, [](const Point&) {
                  Jacobian j(2, 1);
                  j(1, 0) = 1.0;
                  return j;
                }};
    return integrate_top(pullback(sigma_eta, c));
  };
  BoundaryTransgression out;
  out.cap_delta = model.base.plan.cap_delta;
  // boundary of [lo, hi] x S^1 with the chart orientation: {hi} minus {lo}
  out.value = -(circle_integral(base.bound(0).hi) - circle_integral(base.bound(0).lo));
  return out;
}

}  // namespace chernlab
