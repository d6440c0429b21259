#include "chernlab/form_fields.hpp"

#include <numbers>
#include <sstream>

namespace chernlab {

Chart::Chart(std::vector<Interval> bounds, std::vector<int> grid, std::vector<bool> periodic, double margin)
    : bounds_(std::move(bounds)), grid_(std::move(grid)), periodic_(std::move(periodic)), margin_(margin) {
  const std::size_t n = bounds_.size();
  if (periodic_.empty()) periodic_.assign(n, false);
  if (grid_.size() != n || periodic_.size() != n) throw UsageError("chart: bounds, grid and periodic flags must have one entry per axis");
  if (n > static_cast<std::size_t>(kMaxAmbientDim)) throw UsageError("chart: too many axes");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(bounds_[i].hi > bounds_[i].lo)) throw UsageError("chart: empty interval on axis " + std::to_string(i));
    if (grid_[i] < 3) throw UsageError("chart: grid count must be at least 3 on axis " + std::to_string(i));
  }
  if (margin_ < 0.0) throw UsageError("chart: negative margin");
}

Chart Chart::box(int dim, double lo, double hi, int grid, bool periodic, double margin) {
  return Chart(std::vector<Interval>(static_cast<std::size_t>(dim), Interval{lo, hi}), std::vector<int>(static_cast<std::size_t>(dim), grid),
               std::vector<bool>(static_cast<std::size_t>(dim), periodic), margin);
}

Chart Chart::product(const Chart& a, const Chart& b) {
  auto bounds = a.bounds_;
  bounds.insert(bounds.end(), b.bounds_.begin(), b.bounds_.end());
  auto grid = a.grid_;
  grid.insert(grid.end(), b.grid_.begin(), b.grid_.end());
  auto periodic = a.periodic_;
  periodic.insert(periodic.end(), b.periodic_.begin(), b.periodic_.end());
  return Chart(std::move(bounds), std::move(grid), std::move(periodic), std::max(a.margin_, b.margin_));
}

Point Chart::normalize(const Point& x) const {
  Point y = x;
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const Interval& b = bounds_[i];
    if (periodic_[i]) {
      const double period = b.extent();
      double v = std::fmod(y[i] - b.lo, period);
      if (v < 0.0) v += period;
      y[i] = b.lo + v;
    } else if (!(y[i] >= b.lo - margin_ && y[i] <= b.hi + margin_)) {
      std::ostringstream os;
      os << "coordinate " << y[i] << " on axis " << i << " outside [" << b.lo << ", " << b.hi << "] (margin " << margin_ << ")";
      throw DomainError(os.str());
    }
  }
  return y;
}

bool Chart::contains(const Point& x, double pad) const {
  if (x.size() != bounds_.size()) return false;
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (periodic_[i]) continue;
    if (x[i] < bounds_[i].lo - pad || x[i] > bounds_[i].hi + pad) return false;
  }
  return true;
}

std::string Chart::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (i) os << " x ";
    os << "[" << bounds_[i].lo << "," << bounds_[i].hi << (periodic_[i] ? ")p" : "]") << "#" << grid_[i];
  }
  return os.str();
}

Point SmoothMap::operator()(const Point& x) const {
  Point y = value(source.normalize(x));
  if (static_cast<int>(y.size()) != target.dim()) throw UsageError("smooth map returned wrong number of coordinates");
  return y;
}

Jacobian SmoothMap::jacobian_at(const Point& x) const {
  const Point xs = source.normalize(x);
  if (jacobian) {
    Jacobian j = jacobian(xs);
    if (j.rows != target.dim() || j.cols != source.dim()) throw UsageError("smooth map Jacobian has wrong shape");
    return j;
  }
  Jacobian j(target.dim(), source.dim());
  for (int c = 0; c < source.dim(); ++c) {
    const double h = 6e-6 * std::max(1.0, std::abs(xs[static_cast<std::size_t>(c)]));
    Point xp = xs, xm = xs;
    xp[static_cast<std::size_t>(c)] += h;
    xm[static_cast<std::size_t>(c)] -= h;
    const Point yp = value(source.normalize(xp));
    const Point ym = value(source.normalize(xm));
    for (int r = 0; r < target.dim(); ++r) {
      double diff = yp[static_cast<std::size_t>(r)] - ym[static_cast<std::size_t>(r)];
      if (target.periodic(r)) {
        // undo a wrap between the two stencil points
        const double period = target.bound(r).extent();
        diff -= period * std::round(diff / period);
      }
      j(r, c) = diff / (2.0 * h);
    }
  }
  return j;
}

SmoothMap SmoothMap::identity(const Chart& chart) {
  const int m = chart.dim();
  return SmoothMap{chart, chart, [](const Point& x) { return x; }, [m](const Point&) { return Jacobian::identity(m); }};
}

SmoothMap SmoothMap::projection(const Chart& source, const Chart& target, std::vector<int> axes) {
  if (static_cast<int>(axes.size()) != target.dim()) throw UsageError("projection: axis count must equal target dimension");
  for (int a : axes)
    if (a < 0 || a >= source.dim()) throw UsageError("projection: axis out of range");
  const int m = source.dim();
  return SmoothMap{source, target,
                   [axes](const Point& x) {
                     Point y;
                     y.reserve(axes.size());
                     for (int a : axes) y.push_back(x[static_cast<std::size_t>(a)]);
                     return y;
                   },
                   [axes, m](const Point&) {
                     Jacobian j(static_cast<int>(axes.size()), m);
                     for (std::size_t r = 0; r < axes.size(); ++r) j(static_cast<int>(r), axes[r]) = 1.0;
                     return j;
                   }};
}

SmoothMap compose(const SmoothMap& first, const SmoothMap& after) {
  if (first.target.dim() != after.source.dim()) throw UsageError("compose: dimension mismatch");
  return SmoothMap{first.source, after.target, [first, after](const Point& x) { return after(first(x)); },
                   [first, after](const Point& x) { return after.jacobian_at(first(x)) * first.jacobian_at(x); }};
}

namespace detail {

PullbackContext::PullbackContext(const Jacobian& jac, int source_dim) : source_dim_(source_dim) {
  one_forms_.reserve(static_cast<std::size_t>(jac.rows));
  for (int a = 0; a < jac.rows; ++a) {
    std::vector<Form<double>::Term> terms;
    for (int j = 0; j < jac.cols; ++j)
      if (jac(a, j) != 0.0) terms.push_back({1u << j, jac(a, j)});
    one_forms_.push_back(Form<double>::from_terms(source_dim, std::move(terms)));
  }
}

const Form<double>& PullbackContext::basis(std::uint32_t target_mask) {
  auto it = cache_.find(target_mask);
  if (it != cache_.end()) return it->second;
  Form<double> acc = Form<double>::constant(source_dim_, 1.0);
  for (std::uint32_t rest = target_mask; rest != 0; rest &= rest - 1) {
    const int a = std::countr_zero(rest);
    acc = wedge(acc, one_forms_.at(static_cast<std::size_t>(a)));
    if (acc.is_zero()) break;
  }
  return cache_.emplace(target_mask, std::move(acc)).first->second;
}

}  // namespace detail

std::pair<std::vector<double>, std::vector<double>> axis_rule(const Chart& chart, int axis, int n, PeriodicRule rule, bool gauss) {
  if (n < 1) throw UsageError("quadrature: node count must be positive");
  const Interval& b = chart.bound(axis);
  if (gauss && !chart.periodic(axis)) {
    auto [x, w] = gauss_legendre(n);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = b.lo + b.extent() * x[k];
      w[k] *= b.extent();
    }
    return {x, w};
  }
  const double h = b.extent() / n;
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n), h);
  const bool trapezoid = chart.periodic(axis) && rule == PeriodicRule::Trapezoid;
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = b.lo + (trapezoid ? k : k + 0.5) * h;
  return {x, w};
}

namespace {

template <class T>
T integrate_impl(const Chart& chart, const std::function<T(const Point&)>& g, const Quadrature& q) {
  const int m = chart.dim();
  if (m == 0) return g(Point{});
  const std::vector<int>& grid = q.grid.empty() ? chart.grid() : q.grid;
  if (static_cast<int>(grid.size()) != m) throw UsageError("quadrature grid has wrong number of axes");
  std::vector<std::vector<double>> nodes, weights;
  for (int a = 0; a < m; ++a) {
    auto [x, w] = axis_rule(chart, a, grid[static_cast<std::size_t>(a)], q.periodic_rule, q.gauss);
    nodes.push_back(std::move(x));
    weights.push_back(std::move(w));
  }
  auto slices = map_slices<T>(grid[0], [&](int i0) {
    T acc{};
    Point x(static_cast<std::size_t>(m));
    x[0] = nodes[0][static_cast<std::size_t>(i0)];
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    // odometer over axes 1..m-1
    while (true) {
      double w = weights[0][static_cast<std::size_t>(i0)];
      for (int a = 1; a < m; ++a) {
        x[static_cast<std::size_t>(a)] = nodes[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        w *= weights[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      }
      acc += w * g(x);
      int a = m - 1;
      while (a >= 1 && ++idx[static_cast<std::size_t>(a)] == grid[static_cast<std::size_t>(a)]) idx[static_cast<std::size_t>(a--)] = 0;
      if (a < 1) break;
    }
    return acc;
  });
  T total{};
  for (const T& s : slices) total += s;
  return total;
}

}  // namespace

double integrate_density(const Chart& chart, const std::function<double(const Point&)>& g, const Quadrature& q) {
  return integrate_impl<double>(chart, g, q);
}

Complex integrate_density_complex(const Chart& chart, const std::function<Complex(const Point&)>& g, const Quadrature& q) {
  return integrate_impl<Complex>(chart, g, q);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw UsageError("gauss_legendre: need at least one node");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the standard cosine guess, on [-1, 1].
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      if (n == 1) p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(z), p0 = P_{n-1}(z)
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const std::size_t k = static_cast<std::size_t>(n - 1 - i);
    x[k] = 0.5 * (z + 1.0);
    w[k] = 1.0 / ((1.0 - z * z) * dp * dp);  // (2/((1-z^2) P'^2)) scaled by 1/2
  }
  return {x, w};
}

std::vector<Point> sample_points(const Chart& chart, const std::vector<int>& grid, double inset) {
  const int m = chart.dim();
  if (static_cast<int>(grid.size()) != m) throw UsageError("sample_points: grid has wrong number of axes");
  std::vector<Point> out;
  if (m == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    Point x(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      const Interval& b = chart.bound(a);
      const double lo = b.lo + inset * b.extent();
      const double hi = b.hi - inset * b.extent();
      x[static_cast<std::size_t>(a)] = lo + (idx[static_cast<std::size_t>(a)] + 0.5) * (hi - lo) / grid[static_cast<std::size_t>(a)];
    }
    out.push_back(std::move(x));
    int a = m - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == grid[static_cast<std::size_t>(a)]) idx[static_cast<std::size_t>(a--)] = 0;
    if (a < 0) break;
  }
  return out;
}

}  // namespace chernlab
