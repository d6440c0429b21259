#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chernlab/fuzz.hpp"
#include "chernlab/sections_and_loci.hpp"
#include "chernlab/transgression.hpp"

namespace chernlab::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json params_json(const Params& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Json point_json(const Point& x) {
  Json j = Json::array();
  for (double v : x) j.push_back(v);
  return j;
}

Record check(std::string command, Json params, std::string quantity, double value, double expected, double tol, std::string provenance) {
  Record r;
  r.command = std::move(command);
  r.parameters = std::move(params);
  r.quantity = std::move(quantity);
  r.value = value;
  r.expected = expected;
  r.tolerance = tol;
  r.pass = std::isfinite(value) && std::abs(value - expected) <= tol;
  r.provenance = std::move(provenance);
  return r;
}

Record info(std::string command, Json params, std::string quantity, double value, std::string provenance) {
  Record r;
  r.command = std::move(command);
  r.parameters = std::move(params);
  r.quantity = std::move(quantity);
  r.value = value;
  r.provenance = std::move(provenance);
  return r;
}

template <class S>
double relative(const Form<S>& a, const Form<S>& b) {
  const double scale = std::max({a.max_abs(), b.max_abs(), 1e-300});
  return distance(a, b) / scale;
}

fuzz::Engine trial_engine(std::uint64_t seed, int group, int trial) {
  return fuzz::Engine(fuzz::derive_seed(fuzz::derive_seed(seed, static_cast<std::uint64_t>(group)), static_cast<std::uint64_t>(trial)));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

void require_trials(int trials) { require(trials >= 1, "--trials must be at least 1"); }

template <class S>
FormMatrix<S> block_sum(const FormMatrix<S>& a, const FormMatrix<S>& b) {
  const int n = a.rows(), m = b.rows();
  FormMatrix<S> out(n + m, n + m, a.ambient_dim());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a(i, j);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out(n + i, n + j) = b(i, j);
  return out;
}

template <class S>
Record pfaffian_trial(int size, int trial, std::uint64_t seed, int ambient, double tol, const std::string& mode) {
  auto rng = trial_engine(seed, size, trial);
  const auto a = fuzz::random_skew<S>(rng, size, ambient, ambient == 0 ? 0 : 2);
  const auto fast = pfaffian(a);
  const auto slow = pfaffian_oracle(a);
  Json p{{"size", size}, {"trial", trial}, {"seed", seed}, {"mode", mode}, {"ambient", ambient}, {"entry_degree", ambient == 0 ? 0 : 2}};
  if constexpr (ScalarTraits<S>::exact) {
    return check("verify pfaffian", p, "mismatch", fast == slow ? 0.0 : 1.0, 0.0, 0.0, "exact T^n/(2^n n!) oracle in an auxiliary exterior algebra");
  } else {
    return check("verify pfaffian", p, "relative_residual", relative(fast, slow), 0.0, tol, "T^n/(2^n n!) oracle in an auxiliary exterior algebra");
  }
}

// Family of a model name: the part the builder understands.
struct Family {
  std::string kind;  // s2 torus torus-perturbed cp line
  int n = 0;         // cp dimension or line degree
  bool real = false;
};

std::optional<Family> family_of(std::string name) {
  Family f;
  if (name.rfind("real-", 0) == 0) {
    f.real = true;
    name = name.substr(5);
  }
  if (name == "s2" || name == "torus" || name == "torus-perturbed") {
    if (f.real) return std::nullopt;
    f.kind = name;
    return f;
  }
  if (name == "cp1" || name == "cp2") {
    f.kind = "cp";
    f.n = name[2] - '0';
    return f;
  }
  if (name.size() >= 2 && name[0] == 'o') {
    const std::string digits = name.substr(1);
    const bool neg = digits[0] == '-';
    const std::string body = neg ? digits.substr(1) : digits;
    if (!body.empty() && body.size() <= 3 && std::all_of(body.begin(), body.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      f.kind = "line";
      f.n = std::stoi(digits);
      return f;
    }
  }
  return std::nullopt;
}

int default_grid(const Family& f) {
  if (f.kind == "s2") return 512;
  if (f.kind == "torus" || f.kind == "torus-perturbed") return 64;
  if (f.kind == "cp") return f.n == 2 ? 160 : 400;
  return 400;
}

BundleModel build_family(const Family& f, int grid, double radius) {
  BundleModel m;
  if (f.kind == "s2") {
    require(radius == 0.0, "--radius applies to radial models only");
    m = s2_model(0.05, grid, 2 * grid);
  } else if (f.kind == "torus" || f.kind == "torus-perturbed") {
    require(radius == 0.0, "--radius applies to radial models only");
    m = torus_model(f.kind == "torus" ? 0.0 : 0.3, grid);
  } else if (f.kind == "cp") {
    m = cp_model(f.n, radius > 0 ? radius : 20.0, grid);
  } else {
    m = line_bundle_model(f.n, radius > 0 ? radius : 20.0, grid);
  }
  return f.real ? realify_model(m) : m;
}

const RegistryEntry* find_entry(const std::string& name) {
  for (const auto& e : model_registry())
    if (e.name == name) return &e;
  return nullptr;
}

// Top coefficient of a top-degree field on a grid over the first two axes,
// the remaining coordinates at the middle of their (clipped) range.
Table integrand_slice(const std::string& name, const FormField<double>& f, const Chart& c, int n, std::vector<std::string> comments) {
  Table t;
  t.name = name;
  t.comments = std::move(comments);
  const int dim = c.dim();
  auto range = [&](int a) {
    const auto b = c.bound(a);
    if (b.extent() <= 20.0) return std::pair<double, double>{b.lo, b.hi};
    return std::pair<double, double>{std::max(b.lo, -2.0), std::min(b.hi, 2.0)};
  };
  Point mid(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) mid[static_cast<std::size_t>(a)] = 0.5 * (range(a).first + range(a).second);
  const int axes = std::min(dim, 2);
  for (int a = 0; a < axes; ++a) t.header.push_back("x" + std::to_string(a));
  t.header.push_back("integrand");
  const int ny = axes == 2 ? n : 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < ny; ++j) {
      Point x = mid;
      const auto [lo0, hi0] = range(0);
      x[0] = lo0 + (hi0 - lo0) * (i + 0.5) / n;
      std::vector<std::string> row{num(x[0])};
      if (axes == 2) {
        const auto [lo1, hi1] = range(1);
        x[1] = lo1 + (hi1 - lo1) * (j + 0.5) / n;
        row.push_back(num(x[1]));
      }
      row.push_back(num(f(x).top_coefficient()));
      t.rows.push_back(std::move(row));
    }
  return t;
}

Table point_table(const std::string& name, const std::vector<Point>& pts, std::vector<std::string> comments) {
  Table t;
  t.name = name;
  t.comments = std::move(comments);
  const std::size_t dim = pts.empty() ? 0 : pts.front().size();
  for (std::size_t a = 0; a < dim; ++a) t.header.push_back("x" + std::to_string(a));
  for (const auto& p : pts) {
    std::vector<std::string> row;
    for (double v : p) row.push_back(num(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json zero_json(const ZeroRecord& z) {
  return Json{{"patch", z.patch},           {"location", point_json(z.location)}, {"index", z.index},
              {"jacobian_det", z.jacobian_det}, {"refine_residual", z.refine_residual}, {"condition", z.condition},
              {"flag", z.flag}};
}

Table zero_table(const std::string& name, const std::vector<ZeroRecord>& zeros, std::vector<std::string> comments) {
  Table t;
  t.name = name;
  t.comments = std::move(comments);
  t.header = {"patch", "index", "flag"};
  const std::size_t dim = zeros.empty() ? 0 : zeros.front().location.size();
  for (std::size_t a = 0; a < dim; ++a) t.header.push_back("x" + std::to_string(a));
  for (const auto& z : zeros) {
    std::vector<std::string> row{z.patch, std::to_string(z.index), z.flag.empty() ? "-" : z.flag};
    for (double v : z.location) row.push_back(num(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

SphereBundle sphere_for(const std::string& name) {
  if (name == "ts2") return sphere_bundle(s2_model());
  if (name == "flat") return sphere_bundle(torus_model());
  if (name == "point") return sphere_bundle(trivial_model(Base{"pt", Chart::point(), {}}, 2, ScalarKind::Real));
  return sphere_bundle(build_model({name}));
}

}  // namespace

Json Record::to_json() const {
  Json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["quantity"] = quantity;
  j["value"] = value;
  j["expected"] = expected ? Json(*expected) : Json(nullptr);
  j["tolerance"] = tolerance ? Json(*tolerance) : Json(nullptr);
  j["pass"] = pass ? Json(*pass) : Json(nullptr);
  j["reliable"] = reliable;
  j["provenance"] = provenance;
  j["runtime_ms"] = runtime_ms;
  if (!detail.is_null()) j["detail"] = detail;
  return j;
}

void Suite::append(Suite other) {
  for (auto& r : other.records) records.push_back(std::move(r));
  for (auto& t : other.tables) tables.push_back(std::move(t));
}

bool Suite::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.reliable && r.pass.value_or(true); });
}

std::string Suite::json_lines() const {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

void write_table(const Table& t, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / (t.name + ".csv");
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  for (const auto& c : t.comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::Exact;
  if (s == "float") return Mode::Float;
  throw UsageError("--mode must be exact or float");
}

Suite lemma21_suite(const std::vector<int>& ns, int trials, std::uint64_t seed, Mode mode, double tol) {
  require_trials(trials);
  Suite s;
  const std::string mode_name = mode == Mode::Exact ? "exact" : "float";
  for (int n : ns) {
    require(n >= 1 && n <= 8, "--n must be between 1 and 8");
    for (int t = 0; t < trials; ++t) {
      auto rng = trial_engine(seed, n, t);
      const auto r = mode == Mode::Exact ? verify_lemma21(fuzz::random_lie_element<Rational>(rng, n))
                                         : verify_lemma21(fuzz::random_lie_element<double>(rng, n), tol);
      Json p{{"n", n}, {"trial", t}, {"seed", seed}, {"mode", mode_name}};
      Record rec;
      if (mode == Mode::Exact) {
        rec = check("verify lemma21", p, "mismatch", r.residual, 0.0, 0.0, "exact fraction-free determinant against the matching-sum Pfaffian");
      } else {
        rec = check("verify lemma21", p, "relative_residual", r.residual, 0.0, tol, "pivoted complex LU determinant against the matching-sum Pfaffian, Hadamard-relative");
      }
      rec.pass = r.pass;
      rec.detail = Json{{"pfaffian", r.pfaffian}, {"determinant", r.determinant}, {"imaginary_residue", r.imaginary_residue}};
      s.records.push_back(std::move(rec));
    }
  }
  return s;
}

Suite pfaffian_suite(const std::vector<int>& sizes, int trials, std::uint64_t seed, Mode mode, int ambient, double tol) {
  require_trials(trials);
  require(ambient >= 0 && ambient <= 16, "--ambient must be between 0 and 16");
  Suite s;
  for (int size : sizes) {
    require(size >= 2 && size <= 10 && size % 2 == 0, "--size must be even, between 2 and 10");
    require(ambient + size <= kMaxAmbientDim, "--ambient plus --size exceeds the supported exterior algebra");
    for (int t = 0; t < trials; ++t)
      s.records.push_back(mode == Mode::Exact ? pfaffian_trial<Rational>(size, t, seed, ambient, tol, "exact")
                                              : pfaffian_trial<double>(size, t, seed, ambient, tol, "float"));
  }
  return s;
}

Suite pf_squared_suite(const std::vector<int>& ranks, int trials, std::uint64_t seed, int ambient, double tol) {
  require_trials(trials);
  Suite s;
  for (int rank : ranks) {
    require(rank >= 2 && rank <= 6 && rank % 2 == 0, "--rank must be 2, 4 or 6");
    require(ambient >= 2 && ambient <= 16, "--ambient must be between 2 and 16");
    for (int t = 0; t < trials; ++t) {
      auto rng = trial_engine(seed, rank, t);
      const auto a = fuzz::random_skew<double>(rng, rank, ambient, 2);
      Json p{{"rank", rank}, {"trial", t}, {"seed", seed}, {"ambient", ambient}};
      const auto pf = pfaffian(a);
      s.records.push_back(check("verify pf-squared", p, "pf_squared_vs_det", relative(wedge(pf, pf), det_form(a)), 0.0, tol,
                                "Leibniz determinant of the same matrix"));
      const auto e = euler_form(a);
      const auto pont = pontryagin_forms(a);
      Record top = check("verify pf-squared", p, "top_pontryagin_vs_euler_squared", relative(pont.p.back(), wedge(e, e)), 0.0, tol,
                         "p_n of the complexification against e ^ e");
      top.detail = Json{{"odd_chern_residue", pont.odd_chern_residue}};
      s.records.push_back(std::move(top));
    }
  }
  return s;
}

Suite corollary22_suite(const std::vector<int>& ns, int trials, std::uint64_t seed, int ambient, double tol) {
  require_trials(trials);
  Suite s;
  for (int n : ns) {
    require(n >= 1 && n <= 4, "--n must be between 1 and 4");
    require(ambient >= 2 && ambient <= 16, "--ambient must be between 2 and 16");
    for (int t = 0; t < trials; ++t) {
      auto rng = trial_engine(seed, n, t);
      const auto r = verify_corollary22(fuzz::random_skew_hermitian(rng, n, ambient));
      Record rec = check("verify corollary22", Json{{"n", n}, {"trial", t}, {"seed", seed}, {"ambient", ambient}}, "relative_residual", r.residual, 0.0,
                         tol, "det((i/2pi) Omega) against Pf((-1/2pi) Omega_R), all coefficients");
      rec.detail = Json{{"abs_residual", r.abs_residual}, {"imaginary_residue", r.imaginary_residue}};
      s.records.push_back(std::move(rec));
    }
  }
  return s;
}

Suite whitney_suite(int n1, int n2, int trials, std::uint64_t seed, int ambient, double tol) {
  require_trials(trials);
  require(n1 >= 1 && n2 >= 1 && n1 + n2 <= 4, "--n1, --n2 must be positive with n1 + n2 <= 4");
  require(ambient >= 2 && ambient <= 16, "--ambient must be between 2 and 16");
  Suite s;
  for (int t = 0; t < trials; ++t) {
    auto rng = trial_engine(seed, 10 * n1 + n2, t);
    Json p{{"n1", n1}, {"n2", n2}, {"trial", t}, {"seed", seed}, {"ambient", ambient}};
    const auto a = fuzz::random_skew_hermitian(rng, n1, ambient);
    const auto b = fuzz::random_skew_hermitian(rng, n2, ambient);
    const auto ca = chern_forms(a).c, cb = chern_forms(b).c, cs = chern_forms(block_sum(a, b)).c;
    double worst = 0.0;
    for (int k = 0; k <= n1 + n2; ++k) {
      Form<double> prod(ambient);
      for (int i = 0; i <= std::min(k, n1); ++i)
        if (k - i <= n2) prod += wedge(ca[static_cast<std::size_t>(i)], cb[static_cast<std::size_t>(k - i)]);
      worst = std::max(worst, relative(cs[static_cast<std::size_t>(k)], prod));
    }
    s.records.push_back(check("verify whitney", p, "chern_product_residual", worst, 0.0, tol, "c(A) ^ c(B) term by term"));

    const auto ra = fuzz::random_skew<double>(rng, 2 * n1, ambient, 2);
    const auto rb = fuzz::random_skew<double>(rng, 2 * n2, ambient, 2);
    s.records.push_back(check("verify whitney", p, "pfaffian_block_residual", relative(pfaffian(block_sum(ra, rb)), wedge(pfaffian(ra), pfaffian(rb))), 0.0,
                              tol, "Pf(A) ^ Pf(B)"));
  }
  return s;
}

BundleModel build_model(const ModelSpec& spec) {
  if (auto f = family_of(spec.name)) return build_family(*f, spec.grid > 0 ? spec.grid : default_grid(*f), spec.radius);
  const RegistryEntry* e = find_entry(spec.name);
  if (e == nullptr) {
    std::string known;
    for (const auto& r : model_registry()) known += (known.empty() ? "" : ", ") + r.name;
    throw UsageError("unknown model '" + spec.name + "' (known: " + known + ", o<d>, real-o<d>)");
  }
  require(spec.grid == 0 && spec.radius == 0.0, "--grid/--radius are not supported for model " + spec.name);
  return e->build();
}

std::optional<double> expected_value(const std::string& model, const std::string& cls) {
  if (const RegistryEntry* e = find_entry(model)) {
    auto it = e->expected.find(cls);
    if (it != e->expected.end()) return it->second;
    return std::nullopt;
  }
  // degree d line bundles outside the registry
  if (auto f = family_of(model); f && f->kind == "line") {
    if ((!f->real && cls == "c1") || (f->real && cls == "e")) return static_cast<double>(f->n);
  }
  return std::nullopt;
}

std::optional<double> expected_tolerance(const std::string& model, const std::string& cls) {
  if (const RegistryEntry* e = find_entry(model)) {
    auto it = e->tolerance.find(cls);
    if (it != e->tolerance.end()) return it->second;
    return std::nullopt;
  }
  if (expected_value(model, cls)) return 1e-2;
  return std::nullopt;
}

Suite charnum_suite(const CharnumRequest& r) {
  const BundleModel m = build_model(r.model);
  const auto cn = characteristic_number(m, r.cls, r.refine);
  Json p{{"model", r.model.name}, {"class", r.cls}, {"refine", r.refine}};
  p.update(params_json(cn.parameters));
  Suite s;
  Record rec;
  const auto expected = expected_value(r.model.name, r.cls);
  if (expected) {
    rec = check("charnum", p, "integral", cn.value, *expected, *expected_tolerance(r.model.name, r.cls), "cohomology ring of " + r.model.name);
  } else {
    rec = info("charnum", p, "integral", cn.value, "none");
  }
  rec.detail = Json{{"truncation_estimate", cn.truncation_estimate}, {"refinement_estimate", cn.refinement_estimate}};
  s.records.push_back(std::move(rec));

  if (r.cls == "p1" && m.dim() == 4) {
    // Hirzebruch: signature = p1 / 3
    const double sig = std::round(cn.value / 3.0);
    Record sr = info("charnum", p, "signature", sig, "round(integral / 3)");
    if (expected) {
      sr.expected = std::round(*expected / 3.0);
      sr.tolerance = 0.0;
      sr.pass = sig == *sr.expected;
    }
    s.records.push_back(std::move(sr));
  }

  if (r.doubling) {
    const auto f = family_of(r.model.name);
    require(f.has_value(), "--doubling needs a model with a grid (s2, torus, cp<n>, o<d> and their real- forms)");
    const int g = r.model.grid > 0 ? r.model.grid : default_grid(*f);
    ModelSpec doubled = r.model;
    doubled.grid = 2 * g;
    const auto fine = characteristic_number(build_model(doubled), r.cls, false);
    Json dp = p;
    dp["grid"] = g;
    dp["doubled_grid"] = 2 * g;
    Record d = check("charnum", dp, "grid_doubling_change", std::abs(fine.value - cn.value), 0.0, r.doubling_tol, "same integral at twice the grid");
    d.detail = Json{{"doubled_value", fine.value}};
    s.records.push_back(std::move(d));
  }

  if (r.slice > 0)
    s.tables.push_back(integrand_slice("charnum-" + r.model.name + "-" + r.cls, class_integrand(m, parse_monomial(r.cls)), m.base.chart, r.slice,
                                       {"integrand of " + r.cls + " on " + r.model.name + ", top coefficient in chart coordinates",
                                        "axes beyond the first two held at mid-range; unbounded radial axes clipped to [-2, 2]"}));
  return s;
}

Suite transgression_suite(const TransgressionRequest& r) {
  require(r.step > 0.0, "--step must be positive");
  require(r.grid >= 1, "--grid must be positive");
  const SphereBundle sb = sphere_for(r.model);
  TransgressionOptions opt;
  opt.step = r.step;
  opt.n_quad = r.n_quad;
  opt.fiber_samples = r.fiber_samples;
  if (r.check) opt.residual_grid.assign(static_cast<std::size_t>(sb.total.dim()), r.grid);
  const auto t = transgression_check(sb, opt);
  Json p{{"model", r.model}, {"step", r.step}, {"n_quad", r.n_quad}, {"fiber_samples", r.fiber_samples}, {"fiber_nodes", opt.fiber_nodes}};
  if (r.check) p["grid"] = r.grid;
  Suite s;
  if (r.check)
    s.records.push_back(check("transgression", p, "max_residual", t.residual, 0.0, r.tol, "p^* e(Omega) + d eta on the total-space grid, d by central differences"));
  s.records.push_back(check("transgression", p, "fiber_integral_mean", t.fiber_mean, 1.0, 1e-3, "unit fiber normalization of eta"));
  Record spread = check("transgression", p, "fiber_integral_spread", t.fiber_spread, 0.0, 1e-3, "fiber integrals of eta are constant over the base");
  spread.detail = Json{{"fiber_integrals", t.fiber_integrals}};
  s.records.push_back(std::move(spread));
  return s;
}

Suite thom_suite(const ThomRequest& r) {
  const SphereBundle sb = sphere_for(r.model);
  ThomOptions opt;
  opt.radial_nodes = r.radial_nodes;
  opt.angular_nodes = r.angular_nodes;
  opt.fiber_samples = r.fiber_samples;
  opt.check_grid.assign(static_cast<std::size_t>(sb.total.dim() + 1), r.grid);
  const auto profile = smoothstep_profile();
  validate_profile(profile);
  const auto t = thom_form(sb, profile, opt);
  Json p{{"model", r.model},          {"profile", profile.name},         {"radial_nodes", r.radial_nodes},
         {"angular_nodes", r.angular_nodes}, {"fiber_samples", r.fiber_samples}, {"step", opt.step}};
  if (r.check) p["grid"] = r.grid;
  Suite s;
  for (std::size_t i = 0; i < t.fiber_integrals.size(); ++i) {
    Json pi = p;
    pi["sample"] = i;
    s.records.push_back(check("thom", pi, "fiber_integral", t.fiber_integrals[i], 1.0, 1e-2, "unit fiber integral of a Thom form"));
  }
  if (r.check) {
    s.records.push_back(check("thom", p, "closedness", t.closedness, 0.0, 1e-6, "max |d Phi| by central differences"));
    s.records.push_back(check("thom", p, "support_violation", t.support_violation, 0.0, 1e-12, "Phi = rho d eta away from the profile's transition"));
  }
  return s;
}

Suite zeros_suite(const ZerosRequest& r) {
  const auto& entry = section_entry(r.section);
  const std::string model_name = r.model.empty() ? entry.model : r.model;
  require(model_name == entry.model, "section " + r.section + " belongs to model " + entry.model + ", not " + model_name);
  const SectionField sec = entry.build();
  ZeroOptions zo;
  if (r.grid > 0) zo.grid.assign(static_cast<std::size_t>(sec.dim()), r.grid);
  const auto is = index_sum(sec, build_model({model_name}), zo);
  Json p{{"model", model_name}, {"section", r.section}, {"tol", zo.tol}, {"max_iter", zo.max_iter}, {"degenerate", zo.degenerate}};
  if (r.grid > 0) p["grid"] = r.grid;
  Suite s;
  for (const auto& z : is.zeros) {
    Record rec = info("zeros", p, "zero_index", z.index, "sign of the Jacobian determinant times the patch orientation");
    rec.reliable = !z.flagged;
    rec.detail = zero_json(z);
    s.records.push_back(std::move(rec));
  }
  const auto expected = expected_value(model_name, is.companion_class);
  Record sum = expected ? check("zeros", p, "index_sum", is.sum, *expected, 0.0, "cohomology ring of " + model_name)
                        : info("zeros", p, "index_sum", is.sum, "none");
  sum.reliable = is.reliable;
  sum.detail = Json{{"zero_count", is.zeros.size()}};
  s.records.push_back(std::move(sum));
  const double tol = expected_tolerance(model_name, is.companion_class).value_or(1e-2);
  Record comp = check("zeros", p, "top_class_integral", is.companion, is.sum, tol, "index sum of the section");
  comp.detail = Json{{"class", is.companion_class}};
  s.records.push_back(std::move(comp));
  s.tables.push_back(zero_table("zeros-" + r.section, is.zeros, {"zeros of " + r.section + " on " + model_name, "patch chart coordinates"}));
  return s;
}

Suite dual_check_suite(const std::string& example, double tol) {
  DualExample ex;
  if (example == "line") {
    ex = line_dual_example();
  } else if (example == "product") {
    ex = product_dual_example();
  } else {
    throw UsageError("--example must be line or product");
  }
  const auto d = poincare_dual_check(ex.model, ex.k, ex.xi, ex.section, ex.locus);
  Json p{{"example", example}, {"model", ex.model.name}, {"section", ex.section.name}, {"k", ex.k}};
  p.update(params_json(ex.model.parameters));
  Suite s;
  Record rec = check("dual-check", p, "class_times_xi", d.lhs, d.rhs, tol, "integral of xi over the degeneracy cycle");
  rec.reliable = d.reliable;
  rec.detail = Json{{"lhs_truncation", d.lhs_truncation}, {"closedness", d.closedness}, {"component_signs", d.component_signs}};
  s.records.push_back(std::move(rec));
  Record rhs = info("dual-check", p, "xi_over_cycle", d.rhs, ex.locus.empty() ? "signed sum over zeros" : "integral over parametrized components");
  rhs.reliable = d.reliable;
  s.records.push_back(std::move(rhs));
  for (const auto& z : d.zeros) {
    Record zr = info("dual-check", p, "zero_index", z.index, "sign of the Jacobian determinant times the patch orientation");
    zr.reliable = !z.flagged;
    zr.detail = zero_json(z);
    s.records.push_back(std::move(zr));
  }
  if (!d.zeros.empty()) s.tables.push_back(zero_table("dual-" + example + "-zeros", d.zeros, {"zero locus of " + ex.section.name}));
  const BundleModel m = ex.model;
  const FormField<double> xi = ex.xi;
  const char kind = ex.model.is_complex() ? 'c' : 'e';
  const int k = ex.k;
  FormField<double> lhs_integrand(m.base.chart, m.dim(), [m, xi, kind, k](const Point& x) { return wedge(class_form(m, kind, k, x), xi(x)); });
  s.tables.push_back(integrand_slice("dual-" + example + "-integrand", lhs_integrand, m.base.chart, 64, {"c_k ^ xi, top coefficient in chart coordinates"}));
  return s;
}

Suite intersect_suite(int d, double q_re, double q_im, bool complement, double tol) {
  require(d >= 1 && d <= 3, "--d must be 1, 2 or 3");
  const auto ex = product_intersection_example(d, Complex(q_re, q_im), complement);
  const auto r = intersection_number(ex.S, ex.section, ex.ambient);
  Json p{{"d", d}, {"q_re", q_re}, {"q_im", q_im}, {"complement", complement}, {"submanifold", ex.S.name}, {"section", ex.section.name}};
  Suite s;
  Record count = info("intersect", p, "intersection_number", r.count, "signed count of transverse intersection points");
  count.reliable = r.reliable;
  count.detail = Json{{"points", r.points.size()}, {"conventions_agree", r.conventions_agree}};
  s.records.push_back(std::move(count));
  Record comp = check("intersect", p, "restricted_top_class", r.companion, r.count, tol, "intersection number of S with the zero locus");
  comp.reliable = r.reliable && r.conventions_agree;
  comp.detail = Json{{"truncation", r.companion_truncation}};
  s.records.push_back(std::move(comp));
  std::vector<Point> pts;
  for (const auto& ip : r.points) {
    Record pr = info("intersect", p, "local_sign", ip.zero.index, "orientation of T N followed by T S");
    pr.reliable = !ip.zero.flagged;
    pr.detail = Json{{"ambient", point_json(ip.ambient)},
                     {"sign_normal_first", ip.sign_normal_first},
                     {"sign_tangent_first", ip.sign_tangent_first},
                     {"transversality", ip.transversality}};
    s.records.push_back(std::move(pr));
    pts.push_back(ip.ambient);
  }
  s.tables.push_back(point_table("intersect-d" + std::to_string(d) + (complement ? "-complement" : ""), pts, {"intersection points in ambient chart coordinates"}));
  return s;
}

Suite both_sides_suite(const std::string& which, int grid, double tol) {
  require(grid >= 4, "--grid must be at least 4");
  BothSides b;
  if (which == "chern") {
    b = product_chern_check(grid);
  } else if (which == "pontryagin") {
    b = product_pontryagin_check(grid);
  } else {
    throw UsageError("--check must be chern or pontryagin");
  }
  Json p{{"check", which}, {"grid", grid}};
  p.update(params_json(b.parameters));
  Suite s;
  Record rec = check("both-sides", p, "class_integral", b.lhs, b.rhs, tol,
                     which == "chern" ? "Euler integral of the complement line over the degeneracy cycle" : "Euler number of the normal bundle of the cycle");
  rec.detail = Json{{"name", b.name}, {"lhs_truncation", b.lhs_truncation}, {"rhs_truncation", b.rhs_truncation}};
  s.records.push_back(std::move(rec));
  s.records.push_back(info("both-sides", p, "cycle_side", b.rhs, "integral over the parametrized cycle"));
  Record dim = check("both-sides", p, "locus_dimension", b.locus_dimension, 2.0, 0.2, "expected dimension of the degeneracy cycle");
  dim.detail = Json{{"points", b.locus_points}, {"max_offset", b.locus_offset}};
  s.records.push_back(std::move(dim));
  if (which == "pontryagin")
    s.records.push_back(check("both-sides", p, "self_intersection", b.intersection_count, b.lhs, tol, "signed count of the cycle against a push-off"));
  s.tables.push_back(point_table("both-sides-" + which + "-locus", b.cloud, {"detected degeneracy points, model chart coordinates"}));
  return s;
}

Suite list_suite() {
  Suite s;
  for (const auto& e : model_registry()) {
    Record r = info("list", Json{{"kind", "model"}, {"name", e.name}}, "classes", static_cast<double>(e.expected.size()), e.description);
    Json exp = Json::object();
    for (const auto& [k, v] : e.expected) exp[k] = v;
    r.detail = Json{{"expected", exp}};
    s.records.push_back(std::move(r));
  }
  for (const auto& e : section_registry())
    s.records.push_back(info("list", Json{{"kind", "section"}, {"name", e.name}, {"model", e.model}}, "sections", 1.0, "built-in section"));
  return s;
}

}  // namespace chernlab::cli
