#pragma once

// Forms (and form matrices) as functions of chart coordinates, with
// finite-difference exterior derivative, pullback, tensor-product quadrature
// and Gauss-Legendre parameter integrals.

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chernlab/errors.hpp"
#include "chernlab/exterior_algebra.hpp"
#include "chernlab/linalg.hpp"
#include "chernlab/parallel.hpp"

namespace chernlab {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double extent() const { return hi - lo; }
};

class Chart {
 public:
  Chart() = default;
  // `margin` is the padding beyond the bounds at which non-periodic axes may
  // still be evaluated (finite-difference stencils near the boundary).
  Chart(std::vector<Interval> bounds, std::vector<int> grid, std::vector<bool> periodic = {}, double margin = 0.0);

  static Chart box(int dim, double lo, double hi, int grid, bool periodic = false, double margin = 0.0);
  static Chart point() { return Chart({}, {}); }
  // Axes of `a` followed by axes of `b`.
  static Chart product(const Chart& a, const Chart& b);

  int dim() const { return static_cast<int>(bounds_.size()); }
  const Interval& bound(int axis) const { return bounds_.at(static_cast<std::size_t>(axis)); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  bool periodic(int axis) const { return periodic_.at(static_cast<std::size_t>(axis)); }
  const std::vector<bool>& periodic_axes() const { return periodic_; }
  int grid(int axis) const { return grid_.at(static_cast<std::size_t>(axis)); }
  const std::vector<int>& grid() const { return grid_; }
  double margin() const { return margin_; }

  Chart with_grid(std::vector<int> grid) const { return Chart(bounds_, std::move(grid), periodic_, margin_); }
  Chart with_bounds(std::vector<Interval> bounds) const { return Chart(std::move(bounds), grid_, periodic_, margin_); }

  // Wraps periodic axes into [lo, hi); throws DomainError if a non-periodic
  // coordinate lies outside the padded bounds.
  Point normalize(const Point& x) const;
  bool contains(const Point& x, double pad = 0.0) const;

  std::string describe() const;

 private:
  std::vector<Interval> bounds_;
  std::vector<int> grid_;
  std::vector<bool> periodic_;
  double margin_ = 0.0;
};

namespace detail {

template <class S>
Form<S> zero_like(const Form<S>& v) {
  return Form<S>(v.ambient_dim());
}
template <class S>
FormMatrix<S> zero_like(const FormMatrix<S>& v) {
  return FormMatrix<S>(v.rows(), v.cols(), v.ambient_dim());
}

template <class S>
Form<S> left_wedge(const Form<S>& a, const Form<S>& b) {
  return wedge(a, b);
}
template <class S>
FormMatrix<S> left_wedge(const Form<S>& a, const FormMatrix<S>& b) {
  return b.template map<S>([&](const Form<S>& e) { return wedge(a, e); });
}

template <class V>
struct ValueScalar;
template <class S>
struct ValueScalar<Form<S>> {
  using type = S;
};
template <class S>
struct ValueScalar<FormMatrix<S>> {
  using type = S;
};

}  // namespace detail

template <class V>
class Field {
 public:
  using Value = V;
  using Scalar = typename detail::ValueScalar<V>::type;
  using Fn = std::function<V(const Point&)>;

  Field() = default;
  Field(Chart chart, int degree, Fn fn) : chart_(std::move(chart)), degree_(degree), fn_(std::move(fn)) {
    if (degree < 0) throw UsageError("field degree must be nonnegative");
    if (!fn_) throw UsageError("field needs a coefficient function");
  }

  const Chart& chart() const { return chart_; }
  int degree() const { return degree_; }

  V operator()(const Point& x) const {
    if (static_cast<int>(x.size()) != chart_.dim()) throw UsageError("field evaluated with wrong coordinate count");
    V v = fn_(chart_.normalize(x));
    if (v.ambient_dim() != chart_.dim()) throw UsageError("field value has ambient dimension " + std::to_string(v.ambient_dim()) + ", chart has " + std::to_string(chart_.dim()));
    if (!v.is_homogeneous(degree_)) throw UsageError("field value is not homogeneous of degree " + std::to_string(degree_));
    return v;
  }

  Field with_chart(Chart chart) const {
    if (chart.dim() != chart_.dim()) throw UsageError("with_chart: dimension change");
    return Field(std::move(chart), degree_, fn_);
  }

 private:
  Chart chart_;
  int degree_ = 0;
  Fn fn_;
};

template <class S>
using FormField = Field<Form<S>>;
template <class S>
using MatrixField = Field<FormMatrix<S>>;

template <class V>
Field<V> operator+(const Field<V>& a, const Field<V>& b) {
  if (a.degree() != b.degree() || a.chart().dim() != b.chart().dim()) throw UsageError("field sum: degree or chart mismatch");
  return Field<V>(a.chart(), a.degree(), [a, b](const Point& x) { return a(x) + b(x); });
}
template <class V>
Field<V> operator-(const Field<V>& a, const Field<V>& b) {
  if (a.degree() != b.degree() || a.chart().dim() != b.chart().dim()) throw UsageError("field difference: degree or chart mismatch");
  return Field<V>(a.chart(), a.degree(), [a, b](const Point& x) { return a(x) - b(x); });
}
template <class V>
Field<V> operator*(const typename Field<V>::Scalar& c, const Field<V>& a) {
  return Field<V>(a.chart(), a.degree(), [c, a](const Point& x) { return c * a(x); });
}

template <class A, class B>
auto wedge(const Field<A>& a, const Field<B>& b) {
  using R = decltype(wedge(std::declval<A>(), std::declval<B>()));
  if (a.chart().dim() != b.chart().dim()) throw UsageError("field wedge: chart mismatch");
  return Field<R>(a.chart(), a.degree() + b.degree(), [a, b](const Point& x) { return wedge(a(x), b(x)); });
}

template <class S>
FormField<S> constant_field(const Chart& chart, Form<S> value) {
  if (value.ambient_dim() != chart.dim()) throw UsageError("constant_field: dimension mismatch");
  const int deg = value.is_zero() ? 0 : value.max_degree();
  if (!value.is_homogeneous(deg)) throw UsageError("constant_field: value must be homogeneous");
  return FormField<S>(chart, deg, [value](const Point&) { return value; });
}

// Central differences on every axis, assembled as sum_i dx_i ^ d_i f.
// `step` is absolute. With `richardson`, steps h and h/2 are combined to
// cancel the leading h^2 error term.
template <class V>
Field<V> exterior_derivative(const Field<V>& f, double step, bool richardson = false) {
  if (!(step > 0.0)) throw UsageError("exterior_derivative: step must be positive");
  const Chart& chart = f.chart();
  const int m = chart.dim();
  using S = typename Field<V>::Scalar;
  return Field<V>(chart, f.degree() + 1, [f, step, richardson, m](const Point& x) {
    V out = detail::zero_like(f(x));
    if (f.degree() >= m) return out;
    auto partial = [&](int axis, double h) {
      Point xp = x, xm = x;
      xp[static_cast<std::size_t>(axis)] += h;
      xm[static_cast<std::size_t>(axis)] -= h;
      return S(1.0 / (2.0 * h)) * (f(xp) - f(xm));
    };
    for (int axis = 0; axis < m; ++axis) {
      V d = partial(axis, step);
      if (richardson) d = S(4.0 / 3.0) * partial(axis, step / 2.0) - S(1.0 / 3.0) * d;
      out += detail::left_wedge(Form<S>::dx(m, axis + 1), d);
    }
    return out;
  });
}

using Jacobian = Matrix<double>;

struct SmoothMap {
  Chart source;
  Chart target;
  std::function<Point(const Point&)> value;
  // Optional analytic Jacobian (target.dim x source.dim); central differences otherwise.
  std::function<Jacobian(const Point&)> jacobian;

  Point operator()(const Point& x) const;
  Jacobian jacobian_at(const Point& x) const;

  static SmoothMap identity(const Chart& chart);
  // Coordinate projection onto the given source axes (in order).
  static SmoothMap projection(const Chart& source, const Chart& target, std::vector<int> axes);
};

// this-then-after.
SmoothMap compose(const SmoothMap& first, const SmoothMap& after);

namespace detail {

// Pulls back the target dy_a to sum_j J(a, j) dx_j and wedges them per
// multi-index, caching within one evaluation.
class PullbackContext {
 public:
  PullbackContext(const Jacobian& jac, int source_dim);
  const Form<double>& basis(std::uint32_t target_mask);

 private:
  int source_dim_;
  std::vector<Form<double>> one_forms_;
  std::unordered_map<std::uint32_t, Form<double>> cache_;
};

template <class S>
Form<S> pullback_value(const Form<S>& f, PullbackContext& ctx, int source_dim) {
  Form<S> out(source_dim);
  for (const auto& t : f.terms()) {
    const Form<double>& b = ctx.basis(t.mask);
    if (b.is_zero()) continue;
    if constexpr (std::is_same_v<S, double>) {
      out += t.coeff * b;
    } else {
      out += t.coeff * form_cast<S>(b);
    }
  }
  return out;
}

template <class S>
FormMatrix<S> pullback_value(const FormMatrix<S>& f, PullbackContext& ctx, int source_dim) {
  FormMatrix<S> out(f.rows(), f.cols(), source_dim);
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) out(i, j) = pullback_value(f(i, j), ctx, source_dim);
  return out;
}

}  // namespace detail

template <class V>
Field<V> pullback(const Field<V>& f, const SmoothMap& phi) {
  if (phi.target.dim() != f.chart().dim()) throw UsageError("pullback: map target does not match field chart");
  const int m = phi.source.dim();
  return Field<V>(phi.source, f.degree(), [f, phi, m](const Point& x) {
    const V v = f(phi(x));
    detail::PullbackContext ctx(phi.jacobian_at(x), m);
    return detail::pullback_value(v, ctx, m);
  });
}

enum class PeriodicRule { Midpoint, Trapezoid };

struct Quadrature {
  std::vector<int> grid;  // empty: use the chart's grid
  PeriodicRule periodic_rule = PeriodicRule::Midpoint;
  bool gauss = false;     // Gauss-Legendre instead of midpoints on nonperiodic axes
};

// Nodes and weights of the rule on one axis.
std::pair<std::vector<double>, std::vector<double>> axis_rule(const Chart& chart, int axis, int n, PeriodicRule rule, bool gauss = false);

// Integrates an arbitrary scalar density g(x) over the chart with the
// tensor-product rule. Slices along axis 0 are reduced in order.
double integrate_density(const Chart& chart, const std::function<double(const Point&)>& g, const Quadrature& q = {});
Complex integrate_density_complex(const Chart& chart, const std::function<Complex(const Point&)>& g, const Quadrature& q = {});

template <class S>
S integrate_top(const FormField<S>& f, const Quadrature& q = {}) {
  const Chart& chart = f.chart();
  if (f.degree() != chart.dim())
    throw UsageError("integrate_top: degree " + std::to_string(f.degree()) + " differs from chart dimension " + std::to_string(chart.dim()));
  if constexpr (std::is_same_v<S, double>) {
    return integrate_density(chart, [&f](const Point& x) { return f(x).top_coefficient(); }, q);
  } else {
    return integrate_density_complex(chart, [&f](const Point& x) { return f(x).top_coefficient(); }, q);
  }
}

// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

template <class V>
Field<V> parameter_integral(const std::function<Field<V>(double)>& family, int nodes) {
  if (nodes < 1) throw UsageError("parameter_integral: need at least one node");
  auto [t, w] = gauss_legendre(nodes);
  std::vector<Field<V>> fields;
  fields.reserve(t.size());
  for (double ti : t) fields.push_back(family(ti));
  for (const auto& fl : fields)
    if (fl.degree() != fields[0].degree() || fl.chart().dim() != fields[0].chart().dim())
      throw UsageError("parameter_integral: family changes degree or chart");
  using S = typename Field<V>::Scalar;
  return Field<V>(fields[0].chart(), fields[0].degree(), [fields, w](const Point& x) {
    V acc = S(w[0]) * fields[0](x);
    for (std::size_t k = 1; k < fields.size(); ++k) acc += S(w[k]) * fields[k](x);
    return acc;
  });
}

// Midpoint sample points of a grid, lexicographic (axis 0 slowest).
std::vector<Point> sample_points(const Chart& chart, const std::vector<int>& grid, double inset = 0.0);

}  // namespace chernlab
