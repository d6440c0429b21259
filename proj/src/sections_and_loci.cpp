#include "chernlab/sections_and_loci.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <array>
#include <numbers>
#include <sstream>

#include "chernlab/parallel.hpp"

namespace chernlab {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd to_eigen(const Jacobian& j) {
  Eigen::MatrixXd m(j.rows, j.cols);
  for (int r = 0; r < j.rows; ++r)
    for (int c = 0; c < j.cols; ++c) m(r, c) = j(r, c);
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Distance in chart coordinates, wrapping periodic axes.
double chart_distance(const Chart& c, const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
    if (c.periodic(i)) {
      const double p = c.bound(i).extent();
      d -= p * std::round(d / p);
    }
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<int> default_grid(const Chart& c, const std::vector<int>& requested) {
  if (!requested.empty()) {
    if (static_cast<int>(requested.size()) != c.dim()) throw UsageError("scan grid needs one entry per chart axis");
    for (int g : requested)
      if (g < 2) throw UsageError("scan grid must have at least 2 cells per axis");
    return requested;
  }
  const int per_axis = c.dim() <= 2 ? 128 : (c.dim() == 3 ? 48 : 32);
  return std::vector<int>(static_cast<std::size_t>(c.dim()), per_axis);
}

double cell_diagonal(const Chart& c, const std::vector<int>& grid) {
  double s = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    const double h = c.bound(i).extent() / grid[static_cast<std::size_t>(i)];
    s += h * h;
  }
  return std::sqrt(s);
}

// Flat index <-> multi-index with axis 0 slowest.
std::vector<int> unflatten(long idx, const std::vector<int>& counts) {
  std::vector<int> out(counts.size());
  for (int a = static_cast<int>(counts.size()) - 1; a >= 0; --a) {
    out[static_cast<std::size_t>(a)] = static_cast<int>(idx % counts[static_cast<std::size_t>(a)]);
    idx /= counts[static_cast<std::size_t>(a)];
  }
  return out;
}

long flatten(const std::vector<int>& mi, const std::vector<int>& counts) {
  long idx = 0;
  for (std::size_t a = 0; a < counts.size(); ++a) idx = idx * counts[a] + mi[a];
  return idx;
}

long product(const std::vector<int>& counts) {
  long n = 1;
  for (int c : counts) n *= c;
  return n;
}

Jacobian fd_jacobian(const std::function<std::vector<double>(const Point&)>& f, const Point& x, int rows) {
  const int dim = static_cast<int>(x.size());
  Jacobian j(rows, dim);
  for (int c = 0; c < dim; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[static_cast<std::size_t>(c)]));
    Point xp = x, xm = x;
    xp[static_cast<std::size_t>(c)] += h;
    xm[static_cast<std::size_t>(c)] -= h;
    std::vector<double> fp, fm;
    double span = 2.0 * h;
    try {
      fp = f(xp);
    } catch (const DomainError&) {
      fp = f(x);
      span = h;
    }
    try {
      fm = f(xm);
    } catch (const DomainError&) {
      fm = f(x);
      span = span == h ? 0.0 : h;
    }
    if (span == 0.0) throw DomainError("finite-difference Jacobian: both stencil points leave the chart");
    for (int r = 0; r < rows; ++r) j(r, c) = (fp[static_cast<std::size_t>(r)] - fm[static_cast<std::size_t>(r)]) / span;
  }
  return j;
}

}  // namespace

// ---- SectionPatch / SectionField ----------------------------------------

std::vector<double> SectionPatch::operator()(const Point& x) const {
  if (static_cast<int>(x.size()) != chart.dim()) throw UsageError("section patch '" + name + "' evaluated with wrong coordinate count");
  return value(chart.normalize(x));
}

Jacobian SectionPatch::jacobian_at(const Point& x) const {
  const Point xs = chart.normalize(x);
  if (derivative) return derivative(xs);
  const auto v = value(xs);
  return fd_jacobian([this](const Point& p) { return (*this)(p); }, xs, static_cast<int>(v.size()));
}

bool SectionPatch::owns_point(const Point& x) const { return owns ? owns(x) : chart.contains(x); }

int SectionField::dim() const {
  if (patches.empty()) throw UsageError("section '" + name + "' has no patches");
  return patches.front().chart.dim();
}

const SectionPatch& SectionField::patch(const std::string& n) const {
  for (const auto& p : patches)
    if (p.name == n) return p;
  throw UsageError("section '" + name + "' has no patch '" + n + "'");
}

std::vector<Complex> complex_coordinates(const Point& x) {
  if (x.size() % 2 != 0) throw UsageError("complex coordinates need an even number of real coordinates");
  std::vector<Complex> z(x.size() / 2);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = {x[2 * k], x[2 * k + 1]};
  return z;
}

Point real_coordinates(const std::vector<Complex>& z) {
  Point x;
  x.reserve(2 * z.size());
  for (const auto& c : z) {
    x.push_back(c.real());
    x.push_back(c.imag());
  }
  return x;
}

SectionPatch holomorphic_patch(std::string name, Chart chart, std::function<bool(const Point&)> owns, Holomorphic f, HolomorphicDerivative df) {
  SectionPatch p;
  p.name = std::move(name);
  p.chart = std::move(chart);
  p.owns = std::move(owns);
  p.value = [f](const Point& x) { return real_coordinates(f(complex_coordinates(x))); };
  p.derivative = [df](const Point& x) {
    const Matrix<Complex> d = df(complex_coordinates(x));
    // df_a/dz_b = p + i q acts on (dx, dy) as [[p, -q], [q, p]]
    Jacobian j(2 * d.rows, 2 * d.cols);
    for (int a = 0; a < d.rows; ++a)
      for (int b = 0; b < d.cols; ++b) {
        const Complex c = d(a, b);
        j(2 * a, 2 * b) = c.real();
        j(2 * a, 2 * b + 1) = -c.imag();
        j(2 * a + 1, 2 * b) = c.imag();
        j(2 * a + 1, 2 * b + 1) = c.real();
      }
    return j;
  };
  return p;
}

// ---- zeros ----------------------------------------------------------------

int local_index(const SectionPatch& p, const Point& z, double degenerate) {
  const Jacobian j = p.jacobian_at(z);
  if (j.rows != j.cols) throw UsageError("local_index: section rank differs from base dimension");
  const Eigen::MatrixXd m = to_eigen(j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) throw UsageError("local_index: empty Jacobian");
  if (sv(sv.size() - 1) < degenerate * std::max(1.0, sv(0))) throw DegenerateZeroError("degenerate zero: smallest singular value " + std::to_string(sv(sv.size() - 1)));
  return sign_of(m.determinant()) * p.orientation;
}

namespace {

struct NewtonOutcome {
  enum class Kind { Converged, Stalled, Left } kind = Kind::Stalled;
  Point x;
  double residual = 0.0;
};

NewtonOutcome newton_zero(const SectionPatch& p, const Point& start, double radius, const ZeroOptions& opt) {
  NewtonOutcome out;
  Point x = start;
  std::vector<double> f = p(x);
  double res = max_abs(f);
  for (int it = 0; it < opt.max_iter && res > opt.tol; ++it) {
    const Eigen::MatrixXd j = to_eigen(p.jacobian_at(x));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = -f[i];
    const auto lu = j.fullPivLu();
    if (!lu.isInvertible()) break;
    const Eigen::VectorXd dx = lu.solve(rhs);
    bool accepted = false;
    for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
      Point xn = x;
      for (std::size_t i = 0; i < xn.size(); ++i) xn[i] += lambda * dx(static_cast<Eigen::Index>(i));
      try {
        xn = p.chart.normalize(xn);
        auto fn = p(xn);
        const double rn = max_abs(fn);
        if (rn < res) {
          x = std::move(xn);
          f = std::move(fn);
          res = rn;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    if (!accepted) break;
    if (chart_distance(p.chart, x, start) > radius) {
      out.kind = NewtonOutcome::Kind::Left;
      out.x = x;
      out.residual = res;
      return out;
    }
  }
  out.kind = res <= opt.tol ? NewtonOutcome::Kind::Converged : NewtonOutcome::Kind::Stalled;
  out.x = x;
  out.residual = res;
  return out;
}

// Within half a cell of a nonperiodic chart edge, or beyond it.
bool on_margin(const Chart& c, const Point& x, const std::vector<double>& h) {
  for (int a = 0; a < c.dim(); ++a) {
    if (c.periodic(a)) continue;
    const double v = x[static_cast<std::size_t>(a)];
    const double pad = 0.5 * h[static_cast<std::size_t>(a)];
    if (v < c.bound(a).lo + pad || v > c.bound(a).hi - pad) return true;
  }
  return false;
}

ZeroRecord classify_zero(const SectionPatch& p, const Point& x, double residual, const ZeroOptions& opt, const std::vector<double>& h) {
  ZeroRecord r;
  r.patch = p.name;
  r.location = x;
  r.refine_residual = residual;
  const Eigen::MatrixXd j = to_eigen(p.jacobian_at(x));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& sv = svd.singularValues();
  r.condition = sv(sv.size() - 1);
  r.jacobian_det = j.determinant();
  // Location is only known to about residual / sigma_min; a Jacobian that is
  // not stable over that ball means the zero is not isolated-nondegenerate.
  bool unstable = false;
  if (r.condition > 0.0 && residual > 0.0) {
    const double rho = 100.0 * residual / r.condition;
    for (std::size_t a = 0; a < x.size() && !unstable; ++a)
      for (double sgn : {-1.0, 1.0}) {
        Point y = x;
        y[a] += sgn * rho;
        try {
          Eigen::JacobiSVD<Eigen::MatrixXd> sy(to_eigen(p.jacobian_at(y)));
          const double s = sy.singularValues()(sy.singularValues().size() - 1);
          if (s > 2.0 * r.condition || s < 0.5 * r.condition) unstable = true;
        } catch (const DomainError&) {
        }
      }
  }
  if (unstable || r.condition < opt.degenerate * std::max(1.0, sv(0))) {
    r.flagged = true;
    r.flag = "degenerate";
    r.index = 0;
  } else {
    r.index = sign_of(r.jacobian_det) * p.orientation;
  }
  if (on_margin(p.chart, x, h)) {
    r.flagged = true;
    r.flag = r.flag.empty() ? "margin" : r.flag + ",margin";
  }
  return r;
}

std::vector<ZeroRecord> zeros_on_patch(const SectionPatch& p, const ZeroOptions& opt) {
  const Chart& c = p.chart;
  const int dim = c.dim();
  const std::vector<int> grid = default_grid(c, opt.grid);
  std::vector<int> nodes(static_cast<std::size_t>(dim));
  std::vector<double> h(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    nodes[static_cast<std::size_t>(a)] = c.periodic(a) ? grid[static_cast<std::size_t>(a)] : grid[static_cast<std::size_t>(a)] + 1;
    h[static_cast<std::size_t>(a)] = c.bound(a).extent() / grid[static_cast<std::size_t>(a)];
  }
  auto node_point = [&](const std::vector<int>& mi) {
    Point x(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) x[static_cast<std::size_t>(a)] = c.bound(a).lo + mi[static_cast<std::size_t>(a)] * h[static_cast<std::size_t>(a)];
    return x;
  };

  const long total = product(nodes);
  const int rank = static_cast<int>(p(node_point(std::vector<int>(static_cast<std::size_t>(dim), 0))).size());
  if (rank != dim) throw UsageError("find_zeros: section rank " + std::to_string(rank) + " differs from base dimension " + std::to_string(dim) + "; use degeneracy_scan");

  // node values, sliced along axis 0
  const int n0 = nodes[0];
  const long per_slice = total / n0;
  auto slices = map_slices<std::vector<double>>(n0, [&](int s) {
    std::vector<double> vals(static_cast<std::size_t>(per_slice * rank));
    for (long k = 0; k < per_slice; ++k) {
      const auto v = p(node_point(unflatten(s * per_slice + k, nodes)));
      std::copy(v.begin(), v.end(), vals.begin() + k * rank);
    }
    return vals;
  });
  auto node_value = [&](const std::vector<int>& mi, int comp) {
    const long idx = flatten(mi, nodes);
    return slices[static_cast<std::size_t>(idx / per_slice)][static_cast<std::size_t>((idx % per_slice) * rank + comp)];
  };

  // candidate cells: every component has a sign change (or a zero) over the corners
  const std::vector<int>& cells = grid;
  const long cell_total = product(cells);
  const int c0 = cells[0];
  const long cells_per_slice = cell_total / c0;
  auto cand_slices = map_slices<std::vector<long>>(c0, [&](int s) {
    std::vector<long> out;
    std::vector<double> lo(static_cast<std::size_t>(rank)), hi(static_cast<std::size_t>(rank));
    for (long k = 0; k < cells_per_slice; ++k) {
      const long cid = s * cells_per_slice + k;
      const auto mi = unflatten(cid, cells);
      std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
      std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
      for (int corner = 0; corner < (1 << dim); ++corner) {
        std::vector<int> ni = mi;
        for (int a = 0; a < dim; ++a)
          if (corner >> a & 1) ni[static_cast<std::size_t>(a)] = (ni[static_cast<std::size_t>(a)] + 1) % nodes[static_cast<std::size_t>(a)];
        for (int r = 0; r < rank; ++r) {
          const double v = node_value(ni, r);
          lo[static_cast<std::size_t>(r)] = std::min(lo[static_cast<std::size_t>(r)], v);
          hi[static_cast<std::size_t>(r)] = std::max(hi[static_cast<std::size_t>(r)], v);
        }
      }
      bool all = true;
      for (int r = 0; r < rank && all; ++r) all = lo[static_cast<std::size_t>(r)] <= 0.0 && hi[static_cast<std::size_t>(r)] >= 0.0;
      if (all) out.push_back(cid);
    }
    return out;
  });
  std::vector<long> candidates;
  for (const auto& s : cand_slices) candidates.insert(candidates.end(), s.begin(), s.end());

  const double diag = cell_diagonal(c, grid);
  auto refined = map_slices<std::optional<ZeroRecord>>(static_cast<int>(candidates.size()), [&](int i) -> std::optional<ZeroRecord> {
    const auto mi = unflatten(candidates[static_cast<std::size_t>(i)], cells);
    Point start(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) start[static_cast<std::size_t>(a)] = c.bound(a).lo + (mi[static_cast<std::size_t>(a)] + 0.5) * h[static_cast<std::size_t>(a)];
    start = c.normalize(start);
    const auto nt = newton_zero(p, start, 3.0 * diag, opt);
    // a candidate whose iteration leaves its neighbourhood was a spurious
    // cell; a genuine zero there is picked up by its own cell
    if (nt.kind == NewtonOutcome::Kind::Left) return std::nullopt;
    if (!p.owns_point(nt.x)) return std::nullopt;
    if (nt.kind == NewtonOutcome::Kind::Converged) return classify_zero(p, nt.x, nt.residual, opt, h);
    ZeroRecord r;
    r.patch = p.name;
    r.location = nt.x;
    r.refine_residual = nt.residual;
    r.flagged = true;
    r.flag = "no-convergence";
    return r;
  });

  std::vector<ZeroRecord> found;
  for (auto& r : refined)
    if (r) found.push_back(std::move(*r));
  // converged records first so duplicates keep the refined version
  std::stable_sort(found.begin(), found.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
    const bool ca = a.flag != "no-convergence", cb = b.flag != "no-convergence";
    if (ca != cb) return ca;
    return a.location < b.location;
  });
  std::vector<ZeroRecord> unique;
  for (auto& r : found) {
    bool dup = false;
    for (const auto& u : unique)
      if (chart_distance(c, u.location, r.location) < diag) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(std::move(r));
  }
  std::sort(unique.begin(), unique.end(), [](const ZeroRecord& a, const ZeroRecord& b) { return a.location < b.location; });
  return unique;
}

}  // namespace

std::vector<ZeroRecord> find_zeros(const SectionField& s, const ZeroOptions& opt) {
  if (s.patches.empty()) throw UsageError("find_zeros: section '" + s.name + "' has no patches");
  std::vector<ZeroRecord> all;
  for (const auto& p : s.patches) {
    auto z = zeros_on_patch(p, opt);
    all.insert(all.end(), std::make_move_iterator(z.begin()), std::make_move_iterator(z.end()));
  }
  return all;
}

IndexSum index_sum(const SectionField& s, const BundleModel& m, const ZeroOptions& opt) {
  if (s.real_rank() != m.dim()) throw UsageError("index_sum: section rank must equal the base dimension");
  IndexSum out;
  out.zeros = find_zeros(s, opt);
  for (const auto& z : out.zeros) {
    if (z.flagged) out.reliable = false;
    out.sum += z.index;
  }
  out.companion_class = m.is_complex() ? "c" + std::to_string(m.rank) : "e";
  out.companion = characteristic_number(m, out.companion_class).value;
  out.discrepancy = std::abs(out.sum - out.companion);
  return out;
}

// ---- degeneracy loci --------------------------------------------------------

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
Vec<T> fiber_vector(const std::vector<double>& v);
template <>
Vec<double> fiber_vector<double>(const std::vector<double>& v) {
  Vec<double> out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}
template <>
Vec<Complex> fiber_vector<Complex>(const std::vector<double>& v) {
  Vec<Complex> out(static_cast<Eigen::Index>(v.size() / 2));
  for (std::size_t i = 0; i < v.size() / 2; ++i) out(static_cast<Eigen::Index>(i)) = Complex(v[2 * i], v[2 * i + 1]);
  return out;
}

template <class T>
void append_real(std::vector<double>& out, const Vec<T>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if constexpr (std::is_same_v<T, Complex>) {
      out.push_back(v(i).real());
      out.push_back(v(i).imag());
    } else {
      out.push_back(v(i));
    }
  }
}

template <class T>
struct TupleView {
  std::vector<const SectionPatch*> patches;
  int n = 0;  // rank over T

  Mat<T> columns(const Point& x, int count) const {
    Mat<T> a(n, count);
    for (int c = 0; c < count; ++c) {
      const auto v = fiber_vector<T>((*patches[static_cast<std::size_t>(c)])(x));
      if (v.size() != n) throw UsageError("degeneracy_scan: section value has wrong rank");
      a.col(c) = v;
    }
    return a;
  }
};

template <class T>
double sigma_min(const Mat<T>& a) {
  if (a.cols() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Mat<T>> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Defining functions of D_i near a reference point: components of s_i
// orthogonal to span(s_1..s_{i-1}), read against the complement frame Q0
// frozen at the reference point.
template <class T>
struct DefiningFunctions {
  const TupleView<T>* view;
  int i;
  Mat<T> q0;

  DefiningFunctions(const TupleView<T>& v, int i_, const Point& ref) : view(&v), i(i_) {
    if (i == 1) {
      q0 = Mat<T>::Identity(v.n, v.n);
    } else {
      const Mat<T> a = v.columns(ref, i - 1);
      Eigen::HouseholderQR<Mat<T>> qr(a);
      const Mat<T> q = qr.householderQ() * Mat<T>::Identity(v.n, v.n);
      q0 = q.rightCols(v.n - i + 1);
    }
  }

  std::vector<double> operator()(const Point& x) const {
    const Mat<T> all = view->columns(x, i);
    Vec<T> r = all.col(i - 1);
    if (i > 1) {
      const Mat<T> a = all.leftCols(i - 1);
      Eigen::HouseholderQR<Mat<T>> qr(a);
      const Mat<T> q = (qr.householderQ() * Mat<T>::Identity(view->n, i - 1));
      r -= q * (q.adjoint() * r);
    }
    const Vec<T> f = q0.adjoint() * r;
    std::vector<double> out;
    append_real(out, f);
    return out;
  }
};

template <class T>
double transversality_at(const DefiningFunctions<T>& f, const Point& x, double normalizer) {
  const auto v = f(x);
  const Eigen::MatrixXd j = to_eigen(fd_jacobian([&f](const Point& p) { return f(p); }, x, static_cast<int>(v.size())));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0.0;
  return sv(sv.size() - 1) * normalizer;
}

template <class T>
DegeneracySample scan_impl(const std::vector<SectionField>& tuple, int i, const ScanOptions& opt) {
  TupleView<T> view;
  for (int k = 0; k < i; ++k) view.patches.push_back(&tuple[static_cast<std::size_t>(k)].patches.front());
  view.n = tuple.front().rank;
  const Chart& chart = view.patches.front()->chart;
  const int dim = chart.dim();
  const std::vector<int> grid = default_grid(chart, opt.grid);

  DegeneracySample out;
  out.tuple_size = i;
  const int codim = (std::is_same_v<T, Complex> ? 2 : 1) * (view.n - i + 1);
  out.expected_dimension = dim - codim;

  std::vector<double> h(static_cast<std::size_t>(dim));
  double mean_extent = 0.0, hmax = 0.0;
  for (int a = 0; a < dim; ++a) {
    h[static_cast<std::size_t>(a)] = chart.bound(a).extent() / grid[static_cast<std::size_t>(a)];
    mean_extent += chart.bound(a).extent() / dim;
    hmax = std::max(hmax, h[static_cast<std::size_t>(a)]);
  }
  auto midpoint = [&](const std::vector<int>& mi) {
    Point x(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) x[static_cast<std::size_t>(a)] = chart.bound(a).lo + (mi[static_cast<std::size_t>(a)] + 0.5) * h[static_cast<std::size_t>(a)];
    return x;
  };

  struct GridValue {
    double sigma = 0.0;
    double prefix = 0.0;
    double norm = 0.0;
  };
  const long total = product(grid);
  const long per_slice = total / grid[0];
  auto slices = map_slices<std::vector<GridValue>>(grid[0], [&](int s) {
    std::vector<GridValue> vals(static_cast<std::size_t>(per_slice));
    for (long k = 0; k < per_slice; ++k) {
      const Mat<T> a = view.columns(midpoint(unflatten(s * per_slice + k, grid)), i);
      GridValue g;
      g.sigma = sigma_min<T>(a);
      g.prefix = sigma_min<T>(Mat<T>(a.leftCols(i - 1)));
      for (int c = 0; c < i; ++c) g.norm = std::max(g.norm, a.col(c).norm());
      vals[static_cast<std::size_t>(k)] = g;
    }
    return vals;
  });
  auto at = [&](long idx) -> const GridValue& { return slices[static_cast<std::size_t>(idx / per_slice)][static_cast<std::size_t>(idx % per_slice)]; };

  for (const auto& s : slices)
    for (const auto& g : s) out.scale = std::max(out.scale, g.norm);
  out.tau = opt.tau * out.scale;
  const double normalizer = out.scale > 0.0 ? mean_extent / out.scale : 0.0;

  long degenerate = 0;
  std::vector<long> exact, near;
  for (long idx = 0; idx < total; ++idx) {
    const auto& g = at(idx);
    if (g.sigma < out.tau) {
      ++degenerate;
      exact.push_back(idx);
      continue;
    }
    if (!opt.project) continue;
    // within about a cell of the locus: sigma_min below its local variation
    const auto mi = unflatten(idx, grid);
    double variation = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int step : {-1, 1}) {
        auto nb = mi;
        int& c = nb[static_cast<std::size_t>(a)];
        c += step;
        if (c < 0 || c >= grid[static_cast<std::size_t>(a)]) {
          if (!chart.periodic(a)) continue;
          c = (c + grid[static_cast<std::size_t>(a)]) % grid[static_cast<std::size_t>(a)];
        }
        variation = std::max(variation, std::abs(g.sigma - at(flatten(nb, grid)).sigma));
      }
    if (g.sigma <= variation) near.push_back(idx);
  }
  out.degenerate_fraction = total > 0 ? static_cast<double>(degenerate) / static_cast<double>(total) : 0.0;
  const bool whole = out.degenerate_fraction > 0.5;

  for (long idx : exact) {
    DegeneracyPoint p;
    p.location = midpoint(unflatten(idx, grid));
    p.sigma_min = at(idx).sigma;
    p.prefix_sigma_min = at(idx).prefix;
    p.in_stratum = p.prefix_sigma_min >= out.tau;
    out.points.push_back(std::move(p));
  }

  if (!whole && opt.project) {
    const double diag = cell_diagonal(chart, grid);
    auto projected = map_slices<std::optional<DegeneracyPoint>>(static_cast<int>(near.size()), [&](int k) -> std::optional<DegeneracyPoint> {
      const long idx = near[static_cast<std::size_t>(k)];
      const Point start = midpoint(unflatten(idx, grid));
      if (at(idx).prefix < out.tau) return std::nullopt;
      DefiningFunctions<T> f(view, i, start);
      Point x = start;
      auto fx = f(x);
      double res = norm2(fx);
      const double target = opt.tol * std::max(1.0, out.scale);
      for (int it = 0; it < 60 && res > target; ++it) {
        const Eigen::MatrixXd j = to_eigen(fd_jacobian([&f](const Point& p) { return f(p); }, x, static_cast<int>(fx.size())));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(fx.size()));
        for (std::size_t r = 0; r < fx.size(); ++r) rhs(static_cast<Eigen::Index>(r)) = -fx[r];
        const Eigen::VectorXd dx = j.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
        bool accepted = false;
        for (double lambda = 1.0; lambda > 1e-4; lambda *= 0.5) {
          Point xn = x;
          for (int a = 0; a < dim; ++a) xn[static_cast<std::size_t>(a)] += lambda * dx(a);
          try {
            xn = chart.normalize(xn);
            auto fn = f(xn);
            const double rn = norm2(fn);
            if (rn < res) {
              x = std::move(xn);
              fx = std::move(fn);
              res = rn;
              accepted = true;
              break;
            }
          } catch (const DomainError&) {
          }
        }
        if (!accepted) break;
      }
      if (res > target || chart_distance(chart, x, start) > 2.0 * diag || !chart.contains(x)) return std::nullopt;
      DegeneracyPoint p;
      p.location = x;
      const Mat<T> a = view.columns(x, i);
      p.sigma_min = sigma_min<T>(a);
      p.prefix_sigma_min = sigma_min<T>(Mat<T>(a.leftCols(i - 1)));
      p.in_stratum = p.prefix_sigma_min >= out.tau;
      p.projected = true;
      p.transversality = transversality_at(f, x, normalizer);
      return p;
    });
    std::vector<DegeneracyPoint> kept;
    const double merge = 0.25 * hmax;
    for (auto& p : projected) {
      if (!p) continue;
      bool dup = false;
      for (const auto& q : kept)
        if (chart_distance(chart, q.location, p->location) < merge) {
          dup = true;
          break;
        }
      if (!dup) kept.push_back(std::move(*p));
    }
    out.points.insert(out.points.end(), std::make_move_iterator(kept.begin()), std::make_move_iterator(kept.end()));
  }

  // transversality of unprojected points (skipped for wholesale degeneracy on large grids)
  if (out.points.size() <= 20000) {
    for (auto& p : out.points) {
      if (p.projected || !p.in_stratum) continue;
      DefiningFunctions<T> f(view, i, p.location);
      p.transversality = transversality_at(f, p.location, normalizer);
    }
  }

  std::sort(out.points.begin(), out.points.end(), [](const DegeneracyPoint& a, const DegeneracyPoint& b) { return a.location < b.location; });
  if (!out.points.empty()) {
    std::vector<Point> cloud;
    cloud.reserve(out.points.size());
    for (const auto& p : out.points) cloud.push_back(p.location);
    out.fitted_dimension = fitted_dimension(cloud, 3.0 * hmax);
  }
  if (whole) {
    out.nongeneric = true;
    out.note = "sections are dependent on most of the chart";
  } else if (!out.points.empty() && out.expected_dimension < 0) {
    out.nongeneric = true;
    out.note = "degeneracy where none is expected";
  } else if (!out.points.empty() && std::abs(out.fitted_dimension - out.expected_dimension) > 0.2) {
    out.nongeneric = true;
    out.note = "fitted dimension differs from the expected one";
  }
  return out;
}

}  // namespace

double fitted_dimension(const std::vector<Point>& pts, double radius) {
  if (pts.empty()) return 0.0;
  const std::size_t dim = pts.front().size();
  const double r2 = radius * radius;
  auto dims = map_slices<double>(static_cast<int>(pts.size()), [&](int k) {
    const Point& c = pts[static_cast<std::size_t>(k)];
    std::vector<const Point*> nb;
    for (const auto& q : pts) {
      double d = 0.0;
      for (std::size_t a = 0; a < dim; ++a) d += (q[a] - c[a]) * (q[a] - c[a]);
      if (d <= r2) nb.push_back(&q);
    }
    if (nb.size() < 2) return 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (const Point* q : nb)
      for (std::size_t a = 0; a < dim; ++a) mean(static_cast<Eigen::Index>(a)) += (*q)[a];
    mean /= static_cast<double>(nb.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const Point* q : nb) {
      Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
      for (std::size_t a = 0; a < dim; ++a) d(static_cast<Eigen::Index>(a)) = (*q)[a] - mean(static_cast<Eigen::Index>(a));
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    if (top <= 0.0) return 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < ev.size(); ++j)
      if (ev(j) > 0.05 * top) ++count;
    return static_cast<double>(count);
  });
  double sum = 0.0;
  for (double d : dims) sum += d;
  return sum / static_cast<double>(dims.size());
}

DegeneracySample degeneracy_scan(const std::vector<SectionField>& tuple, int i, const ScanOptions& opt) {
  if (i < 1 || i > static_cast<int>(tuple.size())) throw UsageError("degeneracy_scan: tuple size i must be between 1 and the number of sections");
  const auto& first = tuple.front();
  for (const auto& s : tuple) {
    if (s.patches.empty()) throw UsageError("degeneracy_scan: section '" + s.name + "' has no patches");
    if (s.kind != first.kind || s.rank != first.rank) throw UsageError("degeneracy_scan: sections of different bundles");
    if (s.dim() != first.dim()) throw UsageError("degeneracy_scan: sections on different charts");
  }
  if (i > first.rank) throw UsageError("degeneracy_scan: more sections than the rank");
  return first.kind == ScalarKind::Complex ? scan_impl<Complex>(tuple, i, opt) : scan_impl<double>(tuple, i, opt);
}

GenericityReport genericity_check(const std::vector<SectionField>& tuple, int i, const ScanOptions& opt) {
  const auto sample = degeneracy_scan(tuple, i, opt);
  GenericityReport r;
  r.tuple_size = i;
  for (const auto& p : sample.points) {
    if (!p.in_stratum) continue;  // near D_{i-1}: transversality is not asked there
    r.points.push_back(p);
    const bool ok = p.transversality >= opt.transverse;
    r.pass.push_back(ok);
    r.all_pass = r.all_pass && ok;
  }
  return r;
}

// ---- intersections ----------------------------------------------------------

namespace {

int det_sign(const Eigen::MatrixXd& m) { return sign_of(m.determinant()); }

// Kernel of ds (r x m), oriented so that det[T N | ds^T] > 0.
Eigen::MatrixXd oriented_kernel(const Eigen::MatrixXd& ds) {
  const Eigen::Index m = ds.cols(), r = ds.rows();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ds, Eigen::ComputeFullV);
  Eigen::MatrixXd k = svd.matrixV().rightCols(m - r);
  Eigen::MatrixXd full(m, m);
  full << k, ds.transpose();
  if (full.determinant() < 0.0 && k.cols() > 0) k.col(0) *= -1.0;
  return k;
}

std::string top_class(const BundleModel& m) { return m.is_complex() ? "c" + std::to_string(m.rank) : "e"; }

}  // namespace

IntersectionResult intersection_number(const Submanifold& S, const SectionField& s, const BundleModel& ambient, const ZeroOptions& opt) {
  if (S.patches.empty()) throw UsageError("intersection_number: submanifold has no patches");
  SectionField pulled;
  pulled.name = s.name + "|" + S.name;
  pulled.bundle = s.bundle;
  pulled.kind = s.kind;
  pulled.rank = s.rank;
  std::map<std::string, const EmbeddedPatch*> by_name;
  for (const auto& ep : S.patches) {
    const SectionPatch& amb = s.patch(ep.ambient_patch);
    if (ep.embedding.target.dim() != amb.chart.dim()) throw UsageError("intersection_number: embedding of '" + ep.name + "' does not land in the ambient chart");
    if (ep.chart.dim() != s.real_rank()) throw UsageError("intersection_number: dim S must equal the real rank of E");
    SectionPatch p;
    p.name = ep.name;
    p.chart = ep.chart;
    p.owns = ep.owns;
    p.orientation = amb.orientation;
    const SmoothMap emb = ep.embedding;
    p.value = [amb, emb](const Point& x) { return amb(emb(x)); };
    p.derivative = [amb, emb](const Point& x) { return amb.jacobian_at(emb(x)) * emb.jacobian_at(x); };
    pulled.patches.push_back(std::move(p));
    by_name[ep.name] = &ep;
  }

  IntersectionResult out;
  for (auto& z : find_zeros(pulled, opt)) {
    IntersectionPoint ip;
    const EmbeddedPatch& ep = *by_name.at(z.patch);
    const SectionPatch& amb = s.patch(ep.ambient_patch);
    ip.ambient = ep.embedding(z.location);
    const Eigen::MatrixXd ds = to_eigen(amb.jacobian_at(ip.ambient));
    Eigen::MatrixXd ts = to_eigen(ep.embedding.jacobian_at(z.location));
    const Eigen::MatrixXd tn = oriented_kernel(ds);
    const Eigen::Index m = ds.cols();
    Eigen::MatrixXd ns(m, m), sn(m, m);
    ns << tn, ts;
    sn << ts, tn;
    ip.sign_normal_first = det_sign(ns) * amb.orientation;
    ip.sign_tangent_first = det_sign(sn) * amb.orientation;
    Eigen::MatrixXd unit = ns;
    for (Eigen::Index c = 0; c < m; ++c)
      if (unit.col(c).norm() > 0.0) unit.col(c).normalize();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(unit);
    ip.transversality = svd.singularValues()(m - 1);
    if (z.flagged) out.reliable = false;
    if (!z.flagged && (ip.sign_normal_first != z.index || ip.sign_tangent_first != z.index)) out.conventions_agree = false;
    out.count += z.index;
    ip.zero = std::move(z);
    out.points.push_back(std::move(ip));
  }

  const auto restricted = pullback_model(ambient, S.embedding, S.base);
  const auto cn = characteristic_number(restricted, top_class(restricted), false);
  out.companion = cn.value;
  out.companion_truncation = cn.truncation_estimate;
  out.discrepancy = std::abs(out.count - out.companion);
  return out;
}

// ---- Poincare dual check ------------------------------------------------------

namespace {

// Sample points of a chart, restricted to [-2, 2] on axes that extend beyond it.
std::vector<Point> probe_points(const Chart& c, int per_axis) {
  std::vector<Interval> b;
  for (int a = 0; a < c.dim(); ++a) {
    Interval iv = c.bound(a);
    if (iv.lo < -2.0 && iv.hi > 2.0) iv = {-2.0, 2.0};
    b.push_back(iv);
  }
  return sample_points(c.with_bounds(b), std::vector<int>(static_cast<std::size_t>(c.dim()), per_axis));
}

}  // namespace

DualCheck poincare_dual_check(const BundleModel& m, int k, const FormField<double>& xi, const SectionField& s, const std::vector<LocusComponent>& locus) {
  const int dim = m.dim();
  if (k < 1) throw UsageError("dual check: k must be positive");
  if (2 * k > dim) throw UsageError("dual check: class degree 2k = " + std::to_string(2 * k) + " exceeds dim M = " + std::to_string(dim));
  if (xi.degree() != dim - 2 * k)
    throw UsageError("dual check: xi must have degree dim M - 2k = " + std::to_string(dim - 2 * k) + ", got " + std::to_string(xi.degree()));
  if (xi.chart().dim() != dim) throw UsageError("dual check: xi lives on a chart of the wrong dimension");
  if (m.is_complex() && k != m.rank) throw UnsupportedError("dual check: only the top Chern class (locus D_1 of one section) is supported");
  if (!m.is_complex() && 2 * k != m.rank) throw UnsupportedError("dual check: real bundles need the Euler class, 2k = rank");
  if (s.real_rank() != (m.is_complex() ? 2 * m.rank : m.rank)) throw UsageError("dual check: section rank does not match the bundle");

  DualCheck out;
  out.k = k;
  const auto probes = probe_points(m.base.chart, dim <= 2 ? 6 : 3);
  const auto dxi = exterior_derivative(xi, 1e-4);
  for (const auto& p : probes) out.closedness = std::max(out.closedness, dxi(p).max_abs());
  if (out.closedness > 1e-6) throw UsageError("dual check: xi is not closed (max |d xi| = " + std::to_string(out.closedness) + ")");

  const char cls = m.is_complex() ? 'c' : 'e';
  const BundleModel model = m;
  FormField<double> integrand(m.base.chart, dim, [model, cls, k, xi](const Point& x) {
    return wedge(class_form(model, cls, cls == 'c' ? k : 0, x), xi(x));
  });
  const auto lhs = integrate_over_base(integrand, m.base, false);
  out.lhs = lhs.value;
  out.lhs_truncation = lhs.truncation_estimate;

  if (xi.degree() == 0) {
    // a closed 0-form is constant
    out.zeros = find_zeros(s);
    const double c = xi(probes.front()).coefficient(MultiIndex::from_mask(0u));
    int sum = 0;
    for (const auto& z : out.zeros) {
      if (z.flagged) out.reliable = false;
      sum += z.index;
    }
    out.rhs = c * sum;
  } else {
    if (locus.empty()) throw UnsupportedError("dual check: a positive-dimensional locus needs a parametrization");
    const SectionPatch& main = s.patches.front();
    for (const auto& comp : locus) {
      if (comp.embedding.target.dim() != dim || comp.embedding.source.dim() != xi.degree())
        throw UsageError("dual check: locus component '" + comp.name + "' has the wrong dimension");
      int sign = 0;
      for (const auto& t : probe_points(comp.base.chart, 3)) {
        const Point y = comp.embedding(t);
        const auto v = main(y);
        if (max_abs(v) > 1e-8) throw UsageError("dual check: locus component '" + comp.name + "' is not in the zero set of the section");
        const Eigen::MatrixXd tn = to_eigen(comp.embedding.jacobian_at(t));
        const Eigen::MatrixXd ds = to_eigen(main.jacobian_at(y));
        Eigen::MatrixXd full(dim, dim);
        full << tn, ds.transpose();
        const int sg = det_sign(full) * main.orientation;
        if (sign == 0) sign = sg;
        if (sg == 0 || sg != sign) out.reliable = false;
      }
      out.component_signs.push_back(sign);
      const auto r = integrate_over_base(pullback(xi, comp.embedding), comp.base, false);
      out.rhs += sign * r.value;
    }
  }
  out.discrepancy = std::abs(out.lhs - out.rhs);
  return out;
}

// ---- section tables -------------------------------------------------------------

SectionField load_section_table(const std::string& path, const std::string& bundle, ScalarKind kind) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open section table '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    if (header.empty()) {
      std::string tok;
      while (ss >> tok) header.push_back(tok);
      continue;
    }
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw UsageError(path + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
      }
    }
    if (row.size() != header.size()) throw UsageError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw UsageError("section table '" + path + "' has no header");
  std::vector<int> xcol, vcol;
  for (int expect = 0;; ++expect) {
    auto it = std::find(header.begin(), header.end(), "x" + std::to_string(expect));
    if (it == header.end()) break;
    xcol.push_back(static_cast<int>(it - header.begin()));
  }
  for (int expect = 0;; ++expect) {
    auto it = std::find(header.begin(), header.end(), "v" + std::to_string(expect));
    if (it == header.end()) break;
    vcol.push_back(static_cast<int>(it - header.begin()));
  }
  if (xcol.empty() || vcol.empty() || xcol.size() + vcol.size() != header.size())
    throw UsageError("section table header must name columns x0.. and v0.. only");
  if (kind == ScalarKind::Complex && vcol.size() % 2 != 0) throw UsageError("complex section table needs an even number of value columns");
  const int dim = static_cast<int>(xcol.size());
  const int r = static_cast<int>(vcol.size());

  std::vector<std::vector<double>> axes(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    auto& ax = axes[static_cast<std::size_t>(a)];
    for (const auto& row : rows) ax.push_back(row[static_cast<std::size_t>(xcol[static_cast<std::size_t>(a)])]);
    std::sort(ax.begin(), ax.end());
    ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
    if (ax.size() < 4) throw UsageError("section table needs at least 4 nodes per axis");
  }
  std::vector<int> counts;
  for (const auto& ax : axes) counts.push_back(static_cast<int>(ax.size()));
  if (product(counts) != static_cast<long>(rows.size())) throw UsageError("section table rows do not form a full tensor grid");
  auto table = std::make_shared<std::vector<double>>(rows.size() * static_cast<std::size_t>(r), std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : rows) {
    std::vector<int> mi(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      const auto& ax = axes[static_cast<std::size_t>(a)];
      mi[static_cast<std::size_t>(a)] = static_cast<int>(std::lower_bound(ax.begin(), ax.end(), row[static_cast<std::size_t>(xcol[static_cast<std::size_t>(a)])]) - ax.begin());
    }
    const long idx = flatten(mi, counts);
    for (int v = 0; v < r; ++v) (*table)[static_cast<std::size_t>(idx * r + v)] = row[static_cast<std::size_t>(vcol[static_cast<std::size_t>(v)])];
  }
  for (double v : *table)
    if (std::isnan(v)) throw UsageError("section table has a repeated grid node");

  std::vector<Interval> bounds;
  std::vector<int> grid;
  for (const auto& ax : axes) {
    bounds.push_back({ax.front(), ax.back()});
    grid.push_back(static_cast<int>(ax.size()) - 1);
  }
  SectionPatch p;
  p.name = "table";
  p.chart = Chart(bounds, grid);
  auto shared_axes = std::make_shared<std::vector<std::vector<double>>>(std::move(axes));
  p.value = [shared_axes, table, counts, dim, r](const Point& x) {
    std::vector<int> base(static_cast<std::size_t>(dim));
    std::vector<double> frac(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      const auto& ax = (*shared_axes)[static_cast<std::size_t>(a)];
      const double xa = std::clamp(x[static_cast<std::size_t>(a)], ax.front(), ax.back());
      auto it = std::upper_bound(ax.begin(), ax.end(), xa);
      int j = static_cast<int>(it - ax.begin()) - 1;
      j = std::clamp(j, 0, static_cast<int>(ax.size()) - 2);
      base[static_cast<std::size_t>(a)] = j;
      frac[static_cast<std::size_t>(a)] = (xa - ax[static_cast<std::size_t>(j)]) / (ax[static_cast<std::size_t>(j + 1)] - ax[static_cast<std::size_t>(j)]);
    }
    std::vector<double> out(static_cast<std::size_t>(r), 0.0);
    for (int corner = 0; corner < (1 << dim); ++corner) {
      double w = 1.0;
      std::vector<int> mi = base;
      for (int a = 0; a < dim; ++a) {
        const bool up = corner >> a & 1;
        w *= up ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
        if (up) ++mi[static_cast<std::size_t>(a)];
      }
      if (w == 0.0) continue;
      const long idx = flatten(mi, counts);
      for (int v = 0; v < r; ++v) out[static_cast<std::size_t>(v)] += w * (*table)[static_cast<std::size_t>(idx * r + v)];
    }
    return out;
  };
  SectionField s;
  s.name = path;
  s.bundle = bundle;
  s.kind = kind;
  s.rank = kind == ScalarKind::Complex ? r / 2 : r;
  s.patches.push_back(std::move(p));
  return s;
}

// ---- built-in examples ------------------------------------------------------------

SectionField s2_rotation_section(double cap_delta) {
  if (!(cap_delta > 0.0 && cap_delta < 0.5)) throw UsageError("rotation section: cap size must be in (0, 0.5)");
  const double d = cap_delta;
  SectionField s;
  s.name = "s2-rotation";
  s.bundle = "s2";
  s.kind = ScalarKind::Real;
  s.rank = 2;

  // d/dphi = sin(theta) e2 in the orthonormal frame (e_theta, e_phi / sin theta)
  SectionPatch main;
  main.name = "main";
  main.chart = Chart({{d, kPi - d}, {0.0, 2.0 * kPi}}, {128, 128}, {false, true}, d / 2);
  main.value = [](const Point& x) { return std::vector<double>{0.0, std::sin(x[0])}; };
  main.derivative = [](const Point& x) {
    Jacobian j(2, 2);
    j(1, 0) = std::cos(x[0]);
    return j;
  };
  s.patches.push_back(main);

  // caps in normal coordinates (u, v) with du ^ dv = theta' d theta ^ d phi > 0;
  // fiber frame (d/du, d/dv)
  const double cap = 2.0 * d;
  SectionPatch north;
  north.name = "north";
  north.chart = Chart::box(2, -cap, cap, 128, false, 0.0);
  north.owns = [d](const Point& x) { return x[0] * x[0] + x[1] * x[1] < d * d; };
  north.value = [](const Point& x) { return std::vector<double>{-x[1], x[0]}; };
  north.derivative = [](const Point&) {
    Jacobian j(2, 2);
    j(0, 1) = -1.0;
    j(1, 0) = 1.0;
    return j;
  };
  s.patches.push_back(north);

  // south: theta' = pi - theta, (u, v) = theta' (cos phi, -sin phi)
  SectionPatch south = north;
  south.name = "south";
  south.value = [](const Point& x) { return std::vector<double>{x[1], -x[0]}; };
  south.derivative = [](const Point&) {
    Jacobian j(2, 2);
    j(0, 1) = 1.0;
    j(1, 0) = -1.0;
    return j;
  };
  s.patches.push_back(south);
  return s;
}

std::vector<Complex> default_roots(int d) {
  if (d < 0) throw UsageError("degree must be nonnegative");
  switch (d) {
    case 0: return {};
    case 1: return {{0.5, 0.2}};
    case 2: return {{0.6, 0.3}, {-0.7, -0.2}};
    case 3: return {{0.8, 0.1}, {-0.5, 0.6}, {-0.3, -0.9}};
    default: {
      std::vector<Complex> r;
      for (int k = 0; k < d; ++k) r.push_back(std::polar(0.9, 2.0 * kPi * k / d + 0.3));
      return r;
    }
  }
}

namespace {

constexpr double kAffineRadius = 2.5;

Complex poly(const std::vector<Complex>& roots, Complex z) {
  Complex v = 1.0;
  for (const auto& r : roots) v *= z - r;
  return v;
}
Complex poly_derivative(const std::vector<Complex>& roots, Complex z) {
  Complex sum = 0.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    Complex term = 1.0;
    for (std::size_t j = 0; j < roots.size(); ++j)
      if (j != k) term *= z - roots[j];
    sum += term;
  }
  return sum;
}
// w^d p(1/w) = prod (1 - r_k w): the section in the frame at infinity
Complex reversed(const std::vector<Complex>& roots, Complex w) {
  Complex v = 1.0;
  for (const auto& r : roots) v *= 1.0 - r * w;
  return v;
}
Complex reversed_derivative(const std::vector<Complex>& roots, Complex w) {
  Complex sum = 0.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    Complex term = -roots[k];
    for (std::size_t j = 0; j < roots.size(); ++j)
      if (j != k) term *= 1.0 - roots[j] * w;
    sum += term;
  }
  return sum;
}

Matrix<Complex> complex_row(std::vector<Complex> entries) {
  Matrix<Complex> m(1, static_cast<int>(entries.size()));
  for (std::size_t j = 0; j < entries.size(); ++j) m(0, static_cast<int>(j)) = entries[j];
  return m;
}

Chart affine_patch_chart() { return Chart::box(2, -3.0, 3.0, 128, false, 0.5); }
Chart infinity_patch_chart() { return Chart::box(2, -0.5, 0.5, 128, false, 0.1); }
bool in_affine(const Point& x) { return x[0] * x[0] + x[1] * x[1] <= kAffineRadius * kAffineRadius; }
bool in_infinity(const Point& x) { return x[0] * x[0] + x[1] * x[1] < 1.0 / (kAffineRadius * kAffineRadius); }

Chart ambient_chart(int dim) { return Chart::box(dim, -1e4, 1e4, 8, false, 1.0); }

Jacobian constant_jacobian(int rows, int cols, const std::vector<std::pair<int, int>>& ones) {
  Jacobian j(rows, cols);
  for (const auto& [r, c] : ones) j(r, c) = 1.0;
  return j;
}

}  // namespace

SectionField polynomial_section(const std::vector<Complex>& roots, const std::string& bundle) {
  for (const auto& r : roots)
    if (std::abs(r) >= kAffineRadius - 0.1) throw UsageError("polynomial section: roots must lie well inside the affine patch");
  SectionField s;
  s.name = "poly" + std::to_string(roots.size());
  s.bundle = bundle;
  s.kind = ScalarKind::Complex;
  s.rank = 1;
  s.patches.push_back(holomorphic_patch(
      "affine", affine_patch_chart(), in_affine, [roots](const std::vector<Complex>& z) { return std::vector<Complex>{poly(roots, z[0])}; },
      [roots](const std::vector<Complex>& z) { return complex_row({poly_derivative(roots, z[0])}); }));
  s.patches.push_back(holomorphic_patch(
      "infinity", infinity_patch_chart(), in_infinity, [roots](const std::vector<Complex>& w) { return std::vector<Complex>{reversed(roots, w[0])}; },
      [roots](const std::vector<Complex>& w) { return complex_row({reversed_derivative(roots, w[0])}); }));
  return s;
}

SectionField torus_constant_section() {
  SectionField s;
  s.name = "torus-constant";
  s.bundle = "torus";
  s.rank = 2;
  SectionPatch p;
  p.name = "main";
  p.chart = Chart::box(2, 0.0, 2.0 * kPi, 128, true);
  p.value = [](const Point&) { return std::vector<double>{1.0, 0.5}; };
  p.derivative = [](const Point&) { return Jacobian(2, 2); };
  s.patches.push_back(p);
  return s;
}

SectionField torus_sine_section() {
  SectionField s = torus_constant_section();
  s.name = "torus-sine";
  auto& p = s.patches.front();
  p.value = [](const Point& x) { return std::vector<double>{std::sin(x[0] - 0.3), std::sin(x[1] - 0.7)}; };
  p.derivative = [](const Point& x) {
    Jacobian j(2, 2);
    j(0, 0) = std::cos(x[0] - 0.3);
    j(1, 1) = std::cos(x[1] - 0.7);
    return j;
  };
  return s;
}

const std::vector<SectionEntry>& section_registry() {
  static const std::vector<SectionEntry> registry = [] {
    std::vector<SectionEntry> r;
    r.push_back({"s2-rotation", "s2", [] { return s2_rotation_section(); }});
    r.push_back({"torus-constant", "torus", [] { return torus_constant_section(); }});
    r.push_back({"torus-sine", "torus", [] { return torus_sine_section(); }});
    r.push_back({"cp1-tangent", "cp1", [] { return polynomial_section(default_roots(2), "cp1"); }});
    for (int d = 1; d <= 3; ++d) {
      const std::string model = "o" + std::to_string(d);
      r.push_back({model + "-poly", model, [d, model] { return polynomial_section(default_roots(d), model); }});
    }
    return r;
  }();
  return registry;
}

const SectionEntry& section_entry(const std::string& name) {
  for (const auto& e : section_registry())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : section_registry()) known += (known.empty() ? "" : ", ") + e.name;
  throw UsageError("unknown section '" + name + "' (known: " + known + ")");
}

// ---- CP^1 x CP^1 examples -------------------------------------------------------------

namespace {

// pr1^* of a polynomial section, in the four product frames. Coordinates of a
// patch are (first factor, second factor), each affine (z) or at infinity (w).
SectionField pr1_polynomial_section(const std::vector<Complex>& roots) {
  SectionField s;
  s.name = "pr1-poly" + std::to_string(roots.size());
  s.bundle = "pr1-o" + std::to_string(roots.size());
  s.kind = ScalarKind::Complex;
  s.rank = 1;
  auto affine = [roots](const std::vector<Complex>& z) { return std::vector<Complex>{poly(roots, z[0])}; };
  auto affine_d = [roots](const std::vector<Complex>& z) { return complex_row({poly_derivative(roots, z[0]), 0.0}); };
  auto inf = [roots](const std::vector<Complex>& w) { return std::vector<Complex>{reversed(roots, w[0])}; };
  auto inf_d = [roots](const std::vector<Complex>& w) { return complex_row({reversed_derivative(roots, w[0]), 0.0}); };
  s.patches.push_back(holomorphic_patch("z1z2", ambient_chart(4), {}, affine, affine_d));
  s.patches.push_back(holomorphic_patch("w1z2", ambient_chart(4), {}, inf, inf_d));
  s.patches.push_back(holomorphic_patch("z1w2", ambient_chart(4), {}, affine, affine_d));
  s.patches.push_back(holomorphic_patch("w1w2", ambient_chart(4), {}, inf, inf_d));
  return s;
}

SmoothMap holomorphic_embedding(const Chart& source, std::function<std::vector<Complex>(Complex)> f,
                                std::function<std::vector<Complex>(Complex)> df) {
  SmoothMap m;
  m.source = source;
  m.target = ambient_chart(4);
  m.value = [f](const Point& x) { return real_coordinates(f(Complex(x[0], x[1]))); };
  m.jacobian = [df](const Point& x) {
    const auto d = df(Complex(x[0], x[1]));
    Jacobian j(2 * static_cast<int>(d.size()), 2);
    for (std::size_t a = 0; a < d.size(); ++a) {
      const int r = 2 * static_cast<int>(a);
      j(r, 0) = d[a].real();
      j(r, 1) = -d[a].imag();
      j(r + 1, 0) = d[a].imag();
      j(r + 1, 1) = d[a].real();
    }
    return j;
  };
  return m;
}

BundleModel pr1_line(int d, int radial = 160) { return pullback_first(line_bundle_model(d, 20.0, radial), affine_base(1, 20.0, radial)); }

BundleModel o11_model() {
  return tensor_line(pullback_first(line_bundle_model(1, 20.0, 160), affine_base(1, 20.0, 160)),
                     pullback_second(affine_base(1, 20.0, 160), line_bundle_model(1, 20.0, 160)));
}

}  // namespace

IntersectionExample product_intersection_example(int d, Complex q, bool complement) {
  if (d < 1) throw UsageError("intersection example needs d >= 1");
  const auto roots = default_roots(d);
  IntersectionExample ex;
  ex.ambient = pr1_line(d);
  ex.section = pr1_polynomial_section(roots);
  Submanifold& S = ex.S;
  S.base = affine_base(1, 20.0, 400);
  if (!complement) {
    S.name = "CP1 x {q}";
    auto main = [q](Complex z) { return std::vector<Complex>{z, q}; };
    auto main_d = [](Complex) { return std::vector<Complex>{1.0, 0.0}; };
    S.patches.push_back({"affine", affine_patch_chart(), in_affine, "z1z2", holomorphic_embedding(affine_patch_chart(), main, main_d)});
    S.patches.push_back({"infinity", infinity_patch_chart(), in_infinity, "w1z2", holomorphic_embedding(infinity_patch_chart(), main, main_d)});
    S.embedding = holomorphic_embedding(S.base.chart, main, main_d);
  } else {
    // a fiber {q'} x CP^1 with p(q') != 0 misses N_1 = {roots} x CP^1
    const Complex qp(2.0, -1.0);
    if (std::abs(poly(roots, qp)) < 1e-3) throw UsageError("complement point lies on the zero locus");
    S.name = "{q'} x CP1";
    auto main = [qp](Complex z) { return std::vector<Complex>{qp, z}; };
    auto main_d = [](Complex) { return std::vector<Complex>{0.0, 1.0}; };
    S.patches.push_back({"affine", affine_patch_chart(), in_affine, "z1z2", holomorphic_embedding(affine_patch_chart(), main, main_d)});
    S.patches.push_back({"infinity", infinity_patch_chart(), in_infinity, "z1w2", holomorphic_embedding(infinity_patch_chart(), main, main_d)});
    S.embedding = holomorphic_embedding(S.base.chart, main, main_d);
  }
  S.embedding.target = ex.ambient.base.chart;
  return ex;
}

DualExample line_dual_example() {
  DualExample ex;
  ex.model = line_bundle_model(2);
  ex.k = 1;
  ex.xi = constant_field(ex.model.base.chart, Form<double>::constant(2, 1.0));
  ex.section = polynomial_section(default_roots(2), "o2");
  return ex;
}

DualExample product_dual_example() {
  DualExample ex;
  ex.model = pr1_line(1);
  ex.k = 1;
  // pr2^* of the Fubini-Study area form divided by its total pi
  ex.xi = FormField<double>(ex.model.base.chart, 2, [](const Point& x) {
    const double phi = 1.0 + x[2] * x[2] + x[3] * x[3];
    return Form<double>::monomial(4, MultiIndex::from_mask(0b1100u), 1.0 / (kPi * phi * phi));
  });
  const Complex p0 = default_roots(1).front();
  ex.section = pr1_polynomial_section({p0});
  LocusComponent c;
  c.name = "{p0} x CP1";
  // the rhs is a single smooth 2-d integral: large radius and Gauss nodes
  // push it to roundoff level
  c.base = affine_base(1, 320.0, 400);
  c.base.plan.gauss = true;
  c.embedding = holomorphic_embedding(
      c.base.chart, [p0](Complex t) { return std::vector<Complex>{p0, t}; }, [](Complex) { return std::vector<Complex>{0.0, 1.0}; });
  c.embedding.target = ex.model.base.chart;
  ex.locus.push_back(c);
  return ex;
}

BundleModel complement_line(const BundleModel& e, std::function<std::vector<Complex>(const Point&)> v) {
  if (!e.is_complex() || e.rank != 2) throw UsageError("complement_line: needs a complex rank-2 model");
  if (!e.connection) throw UsageError("complement_line: model has no connection");
  const auto omega = e.complex_connection();
  const int dim = e.dim();
  // unit frame u of v^perp: u = (-conj v2, conj v1) / |v|
  auto frame = [v](const Point& x) {
    const auto c = v(x);
    if (c.size() != 2) throw UsageError("complement_line: v must have two components");
    const double n = std::sqrt(std::norm(c[0]) + std::norm(c[1]));
    if (n == 0.0) throw DomainError("complement_line: v vanishes");
    return std::array<Complex, 2>{-std::conj(c[1]) / n, std::conj(c[0]) / n};
  };
  MatrixField<Complex> conn(e.base.chart, 1, [frame, omega, dim](const Point& x) {
    const auto u = frame(x);
    std::array<Form<Complex>, 2> du{Form<Complex>(dim), Form<Complex>(dim)};
    for (int a = 0; a < dim; ++a) {
      const double h = 1e-4 * std::max(1.0, std::abs(x[static_cast<std::size_t>(a)]));
      Point xp = x, xm = x;
      xp[static_cast<std::size_t>(a)] += h;
      xm[static_cast<std::size_t>(a)] -= h;
      const auto up = frame(xp), um = frame(xm);
      const auto dx = form_cast<Complex>(Form<double>::dx(dim, a + 1));
      for (int k = 0; k < 2; ++k) du[static_cast<std::size_t>(k)] = du[static_cast<std::size_t>(k)] + ((up[static_cast<std::size_t>(k)] - um[static_cast<std::size_t>(k)]) / (2.0 * h)) * dx;
    }
    const auto w = omega(x);
    // <D u, u> with D e_j = sum_k w_jk e_k
    Form<Complex> f(dim);
    for (int k = 0; k < 2; ++k) {
      Form<Complex> dk = du[static_cast<std::size_t>(k)];
      for (int j = 0; j < 2; ++j) dk = dk + u[static_cast<std::size_t>(j)] * w(j, k);
      f = f + std::conj(u[static_cast<std::size_t>(k)]) * dk;
    }
    // <u, u> = 1 makes the exact value purely imaginary; drop the
    // finite-difference residue in the real part
    FormMatrix<Complex> out(1, 1, dim);
    out(0, 0) = Complex(0.0, 1.0) * form_cast<Complex>(imag_part(f));
    return out;
  });
  BundleModel f;
  f.name = "complement-" + e.name;
  f.base = e.base;
  f.rank = 1;
  f.kind = ScalarKind::Complex;
  f.connection = conn;
  f.curvature = curvature_from_connection(conn, 1e-4);
  f.parameters = e.parameters;
  return f;
}

namespace {

SmoothMap diagonal_map(const Chart& source, const Chart& target) {
  SmoothMap m;
  m.source = source;
  m.target = target;
  m.value = [](const Point& x) { return Point{x[0], x[1], x[0], x[1]}; };
  m.jacobian = [](const Point&) { return constant_jacobian(4, 2, {{0, 0}, {1, 1}, {2, 0}, {3, 1}}); };
  return m;
}

// Distance of a CP^1 x CP^1 affine point from the diagonal.
double off_diagonal(const Point& x) { return std::hypot(x[0] - x[2], x[1] - x[3]) / std::sqrt(2.0); }

Chart window(int grid) { return Chart::box(4, -1.5, 1.5, std::max(grid, 3), false, 0.5); }

SectionField constant_section(const std::string& name, ScalarKind kind, int rank, const Chart& chart, std::vector<double> value) {
  SectionField s;
  s.name = name;
  s.kind = kind;
  s.rank = rank;
  SectionPatch p;
  p.name = "window";
  p.chart = chart;
  p.value = [value](const Point&) { return value; };
  p.derivative = [n = static_cast<int>(value.size()), d = chart.dim()](const Point&) { return Jacobian(n, d); };
  s.patches.push_back(p);
  return s;
}

}  // namespace

BothSides product_chern_check(int grid) {
  BothSides out;
  out.name = "chern-product";
  const auto model = registry_entry("o1-sum-o1").build();
  const auto lhs = characteristic_number(model, "c1^2", false);
  out.lhs = lhs.value;
  out.lhs_truncation = lhs.truncation_estimate;

  // s1 = (z1, z2), s2 = (1, 1) in the holomorphic frames: D_2 is z1 = z2
  const Chart w = window(grid);
  SectionField s1;
  s1.name = "s1";
  s1.kind = ScalarKind::Complex;
  s1.rank = 2;
  s1.patches.push_back(holomorphic_patch(
      "window", w, {}, [](const std::vector<Complex>& z) { return std::vector<Complex>{z[0], z[1]}; },
      [](const std::vector<Complex>&) {
        Matrix<Complex> m(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = 1.0;
        return m;
      }));
  const SectionField s2 = constant_section("s2", ScalarKind::Complex, 2, w, {1.0, 0.0, 1.0, 0.0});
  ScanOptions so;
  so.grid = std::vector<int>(4, grid);
  const auto scan = degeneracy_scan({s1, s2}, 2, so);
  out.locus_dimension = scan.fitted_dimension;
  out.locus_points = static_cast<int>(scan.points.size());
  for (const auto& p : scan.points) out.cloud.push_back(p.location);
  for (const auto& p : scan.points) out.locus_offset = std::max(out.locus_offset, off_diagonal(p.location));

  // N = diagonal; E|_N = v + F with v = (1, t) nowhere zero on CP^1
  const Base nb = affine_base(1, 20.0, 400);
  const auto restricted = pullback_model(model, diagonal_map(nb.chart, model.base.chart), nb);
  const auto f = complement_line(restricted, [](const Point& x) { return std::vector<Complex>{1.0, Complex(x[0], x[1])}; });
  const auto rhs = characteristic_number(f, "c1", false);
  out.rhs = rhs.value;
  out.rhs_truncation = rhs.truncation_estimate;
  out.discrepancy = std::abs(out.lhs - out.rhs);
  out.parameters = {{"grid", grid}, {"radius", 20.0}, {"radial_nodes_locus", 400}};
  return out;
}

BothSides product_pontryagin_check(int grid) {
  BothSides out;
  out.name = "pontryagin-product";
  const auto model = registry_entry("o11-plus-r2").build();
  const auto lhs = characteristic_number(model, "p1", false);
  out.lhs = lhs.value;
  out.lhs_truncation = lhs.truncation_estimate;

  // real frame (Re, Im of the O(1,1) frame, e3, e4); s3 = z1 - z2
  const Chart w = window(grid);
  const SectionField s1 = constant_section("e3", ScalarKind::Real, 4, w, {0.0, 0.0, 1.0, 0.0});
  const SectionField s2 = constant_section("e4", ScalarKind::Real, 4, w, {0.0, 0.0, 0.0, 1.0});
  SectionField s3;
  s3.name = "z1-z2";
  s3.kind = ScalarKind::Real;
  s3.rank = 4;
  SectionPatch p;
  p.name = "window";
  p.chart = w;
  p.value = [](const Point& x) { return std::vector<double>{x[0] - x[2], x[1] - x[3], 0.0, 0.0}; };
  p.derivative = [](const Point&) {
    Jacobian j(4, 4);
    j(0, 0) = 1.0;
    j(0, 2) = -1.0;
    j(1, 1) = 1.0;
    j(1, 3) = -1.0;
    return j;
  };
  s3.patches.push_back(p);
  ScanOptions so;
  so.grid = std::vector<int>(4, grid);
  const auto scan = degeneracy_scan({s1, s2, s3}, 3, so);
  out.locus_dimension = scan.fitted_dimension;
  out.locus_points = static_cast<int>(scan.points.size());
  for (const auto& q : scan.points) out.cloud.push_back(q.location);
  for (const auto& q : scan.points) out.locus_offset = std::max(out.locus_offset, off_diagonal(q.location));

  // normal bundle of the diagonal = E / span(e3, e4) = realified O(1,1) restricted
  const auto o11 = o11_model();
  const Base nb = affine_base(1, 20.0, 400);
  const auto normal = pullback_model(realify_model(o11), diagonal_map(nb.chart, o11.base.chart), nb);
  const auto rhs = characteristic_number(normal, "e", false);
  out.rhs = rhs.value;
  out.rhs_truncation = rhs.truncation_estimate;

  // self-intersection through the push-off graph of z -> lambda z, which
  // meets the diagonal at 0 and infinity; sigma = z1 - z2 in the frames of O(1,1)
  const Complex lambda = std::polar(1.5, 0.4);
  SectionField sigma;
  sigma.name = "z1-z2";
  sigma.bundle = "o11";
  sigma.kind = ScalarKind::Complex;
  sigma.rank = 1;
  sigma.patches.push_back(holomorphic_patch(
      "z1z2", ambient_chart(4), {}, [](const std::vector<Complex>& z) { return std::vector<Complex>{z[0] - z[1]}; },
      [](const std::vector<Complex>&) { return complex_row({1.0, -1.0}); }));
  sigma.patches.push_back(holomorphic_patch(
      "w1w2", ambient_chart(4), {}, [](const std::vector<Complex>& w) { return std::vector<Complex>{w[1] - w[0]}; },
      [](const std::vector<Complex>&) { return complex_row({-1.0, 1.0}); }));
  Submanifold S;
  S.name = "graph(lambda z)";
  S.base = nb;
  auto graph = [lambda](Complex z) { return std::vector<Complex>{z, lambda * z}; };
  auto graph_d = [lambda](Complex) { return std::vector<Complex>{1.0, lambda}; };
  auto graph_inf = [lambda](Complex w) { return std::vector<Complex>{w, w / lambda}; };
  auto graph_inf_d = [lambda](Complex) { return std::vector<Complex>{1.0, 1.0 / lambda}; };
  S.patches.push_back({"affine", affine_patch_chart(), in_affine, "z1z2", holomorphic_embedding(affine_patch_chart(), graph, graph_d)});
  S.patches.push_back({"infinity", infinity_patch_chart(), in_infinity, "w1w2", holomorphic_embedding(infinity_patch_chart(), graph_inf, graph_inf_d)});
  S.embedding = holomorphic_embedding(nb.chart, graph, graph_d);
  S.embedding.target = o11.base.chart;
  const auto inter = intersection_number(S, sigma, o11);
  out.intersection_count = inter.reliable ? inter.count : 0;
  out.discrepancy = std::abs(out.lhs - out.rhs);
  out.parameters = {{"grid", grid}, {"radius", 20.0}, {"radial_nodes_locus", 400}, {"pushoff_abs", std::abs(lambda)}, {"pushoff_arg", std::arg(lambda)}};
  return out;
}

}  // namespace chernlab
