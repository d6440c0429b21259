#include "cli.hpp"

#include <chrono>
#include <functional>

#include <CLI11.hpp>

#include "chernlab/errors.hpp"
#include "suites.hpp"

namespace chernlab::cli {

namespace {

struct Globals {
  std::string emit_csv;
  bool timing = false;
};

void summarize(const Suite& s, const std::string& command, std::ostream& err) {
  int checks = 0, passed = 0, unreliable = 0;
  for (const auto& r : s.records) {
    if (r.pass) {
      ++checks;
      passed += *r.pass;
    }
    unreliable += !r.reliable;
  }
  err << command << ": " << s.records.size() << " records, " << passed << "/" << checks << " checks pass";
  if (unreliable > 0) err << ", " << unreliable << " unreliable";
  err << '\n';
  for (const auto& r : s.records)
    if ((r.pass && !*r.pass) || !r.reliable) {
      err << "  " << (r.reliable ? "FAIL " : "UNRELIABLE ") << r.quantity << " = " << r.value;
      if (r.expected) err << " (expected " << *r.expected << " +- " << r.tolerance.value_or(0.0) << ")";
      err << " " << r.parameters.dump() << '\n';
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Characteristic-class laboratory: identity fuzzing, characteristic numbers, transgression, zeros and degeneracy loci"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key=value file presetting options (subcommand options as [subcommand] sections or subcommand.option keys)");
  Globals g;
  app.add_option("--emit-csv", g.emit_csv, "directory for columnar point clouds and integrand slices");
  app.add_flag("--timing", g.timing, "record wall-clock runtime_ms (otherwise 0, keeping output reproducible)");

  std::function<Suite()> job;
  std::string command;

  // verify ...
  auto* verify = app.add_subcommand("verify", "fuzz the algebraic identities");
  verify->require_subcommand(1);
  verify->fallthrough();

  std::vector<int> l_n{3};
  int l_trials = 100;
  std::uint64_t l_seed = 1;
  std::string l_mode = "exact";
  double l_tol = 1e-9;
  auto* lemma = verify->add_subcommand("lemma21", "Pf(C) = det(-i(A + iB)) on random u(n) elements");
  lemma->add_option("--n", l_n, "matrix sizes")->expected(1, 16);
  lemma->add_option("--trials", l_trials, "trials per size");
  lemma->add_option("--seed", l_seed, "root seed");
  lemma->add_option("--mode", l_mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
  lemma->add_option("--tol", l_tol, "relative tolerance in float mode");
  lemma->callback([&] {
    command = "verify lemma21";
    job = [&] { return lemma21_suite(l_n, l_trials, l_seed, parse_mode(l_mode), l_tol); };
  });

  std::vector<int> p_sizes{2, 4, 6, 8};
  int p_trials = 200, p_ambient = 0;
  std::uint64_t p_seed = 1;
  std::string p_mode = "exact";
  double p_tol = 1e-10;
  auto* pf = verify->add_subcommand("pfaffian", "matching-sum Pfaffian against the T^n/(2^n n!) oracle");
  pf->add_option("--size", p_sizes, "matrix sizes")->expected(1, 16);
  pf->add_option("--trials", p_trials, "trials per size");
  pf->add_option("--seed", p_seed, "root seed");
  pf->add_option("--mode", p_mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
  pf->add_option("--ambient", p_ambient, "0 for scalar entries, otherwise 2-form entries in this many variables");
  pf->add_option("--tol", p_tol, "relative tolerance in float mode");
  pf->callback([&] {
    command = "verify pfaffian";
    job = [&] { return pfaffian_suite(p_sizes, p_trials, p_seed, parse_mode(p_mode), p_ambient, p_tol); };
  });

  std::vector<int> c_n{1, 2, 3};
  int c_trials = 100, c_ambient = 8;
  std::uint64_t c_seed = 1;
  double c_tol = 1e-9;
  auto* cor = verify->add_subcommand("corollary22", "det((i/2pi) Omega) = Pf((-1/2pi) Omega_R) on random curvature matrices");
  cor->add_option("--n", c_n, "complex ranks")->expected(1, 16);
  cor->add_option("--trials", c_trials, "trials per rank");
  cor->add_option("--seed", c_seed, "root seed");
  cor->add_option("--ambient", c_ambient, "number of variables of the 2-form entries");
  cor->add_option("--tol", c_tol, "relative tolerance");
  cor->callback([&] {
    command = "verify corollary22";
    job = [&] { return corollary22_suite(c_n, c_trials, c_seed, c_ambient, c_tol); };
  });

  int w_n1 = 1, w_n2 = 2, w_trials = 100, w_ambient = 8;
  std::uint64_t w_seed = 1;
  double w_tol = 1e-9;
  auto* whitney = verify->add_subcommand("whitney", "total Chern form and Pfaffian of block sums");
  whitney->add_option("--n1", w_n1, "rank of the first block");
  whitney->add_option("--n2", w_n2, "rank of the second block");
  whitney->add_option("--trials", w_trials, "trials");
  whitney->add_option("--seed", w_seed, "root seed");
  whitney->add_option("--ambient", w_ambient, "number of variables of the 2-form entries");
  whitney->add_option("--tol", w_tol, "relative tolerance");
  whitney->callback([&] {
    command = "verify whitney";
    job = [&] { return whitney_suite(w_n1, w_n2, w_trials, w_seed, w_ambient, w_tol); };
  });

  std::vector<int> s_ranks{2, 4};
  int s_trials = 200, s_ambient = 8;
  std::uint64_t s_seed = 1;
  double s_tol = 1e-9;
  auto* sq = verify->add_subcommand("pf-squared", "Pf^2 = det and p_n = e ^ e on random 2-form matrices");
  sq->add_option("--rank", s_ranks, "real ranks")->expected(1, 16);
  sq->add_option("--trials", s_trials, "trials per rank");
  sq->add_option("--seed", s_seed, "root seed");
  sq->add_option("--ambient", s_ambient, "number of variables of the 2-form entries");
  sq->add_option("--tol", s_tol, "relative tolerance");
  sq->callback([&] {
    command = "verify pf-squared";
    job = [&] { return pf_squared_suite(s_ranks, s_trials, s_seed, s_ambient, s_tol); };
  });

  // charnum
  CharnumRequest cn;
  auto* charnum = app.add_subcommand("charnum", "integrate a characteristic monomial over a model's base");
  charnum->add_option("--model", cn.model.name, "model name (see `list`)")->required();
  charnum->add_option("--class", cn.cls, "monomial such as c1, c2, c1^2, p1, e")->required();
  charnum->add_option("--grid", cn.model.grid, "grid override (s2: theta nodes; torus: per axis; radial models: radial nodes)");
  charnum->add_option("--radius", cn.model.radius, "truncation radius of radial models");
  charnum->add_flag("--doubling", cn.doubling, "repeat at twice the grid and report the change");
  charnum->add_option("--doubling-tol", cn.doubling_tol, "tolerance on the grid-doubling change");
  charnum->add_flag("--refine", cn.refine, "half-grid refinement estimate");
  charnum->add_option("--slice", cn.slice, "integrand slice resolution for --emit-csv");
  charnum->callback([&] {
    command = "charnum";
    job = [&] {
      if (cn.slice == 0 && !g.emit_csv.empty()) cn.slice = 64;
      return charnum_suite(cn);
    };
  });

  // transgression, thom
  TransgressionRequest tr;
  auto* trans = app.add_subcommand("transgression", "transgression form on the unit sphere bundle of a rank-2 model");
  trans->add_option("--model", tr.model, "ts2, flat, point or a real rank-2 model");
  trans->add_flag("--check", tr.check, "max residual of p^* e + d eta on the total-space grid");
  trans->add_option("--step", tr.step, "finite-difference step");
  trans->add_option("--grid", tr.grid, "residual grid per axis");
  trans->add_option("--n-quad", tr.n_quad, "Gauss nodes in the parameter integral");
  trans->add_option("--fiber-samples", tr.fiber_samples, "base samples per axis for fiber integrals");
  trans->add_option("--tol", tr.tol, "residual tolerance");
  trans->callback([&] {
    command = "transgression";
    job = [&] { return transgression_suite(tr); };
  });

  ThomRequest th;
  auto* thom = app.add_subcommand("thom", "Thom form d(rho(|e|) eta) on the disk bundle");
  thom->add_option("--model", th.model, "point, flat, ts2 or a real rank-2 model");
  thom->add_flag("--check", th.check, "closedness and support checks");
  thom->add_option("--grid", th.grid, "check grid per axis");
  thom->add_option("--radial-nodes", th.radial_nodes, "radial quadrature nodes");
  thom->add_option("--angular-nodes", th.angular_nodes, "angular quadrature nodes");
  thom->add_option("--fiber-samples", th.fiber_samples, "base samples per axis");
  thom->callback([&] {
    command = "thom";
    job = [&] { return thom_suite(th); };
  });

  // zeros, dual-check, intersect, both-sides
  ZerosRequest zr;
  auto* zeros = app.add_subcommand("zeros", "zeros of a built-in section, their indices and the top class");
  zeros->add_option("--section", zr.section, "section name (see `list`)")->required();
  zeros->add_option("--model", zr.model, "bundle model (must match the section)");
  zeros->add_option("--grid", zr.grid, "scan grid per axis");
  zeros->callback([&] {
    command = "zeros";
    job = [&] { return zeros_suite(zr); };
  });

  std::string d_example = "line";
  double d_tol = 2e-2;
  auto* dual = app.add_subcommand("dual-check", "class integral against the integral over the degeneracy cycle");
  dual->add_option("--example", d_example, "line or product")->check(CLI::IsMember({"line", "product"}));
  dual->add_option("--tol", d_tol, "agreement tolerance");
  dual->callback([&] {
    command = "dual-check";
    job = [&] { return dual_check_suite(d_example, d_tol); };
  });

  int i_d = 1;
  double i_re = 0.4, i_im = -0.3, i_tol = 1e-2;
  bool i_complement = false;
  auto* inter = app.add_subcommand("intersect", "intersection number of a sphere with a zero locus in S^2 x S^2");
  inter->add_option("--d", i_d, "degree of the pulled-back line bundle");
  inter->add_option("--q-re", i_re, "real part of the point fixing S");
  inter->add_option("--q-im", i_im, "imaginary part of the point fixing S");
  inter->add_flag("--complement", i_complement, "use a vertical sphere away from the zeros");
  inter->add_option("--tol", i_tol, "agreement tolerance");
  inter->callback([&] {
    command = "intersect";
    job = [&] { return intersect_suite(i_d, i_re, i_im, i_complement, i_tol); };
  });

  std::string b_which = "chern";
  int b_grid = 12;
  double b_tol = 5e-2;
  auto* both = app.add_subcommand("both-sides", "class integral against the degeneracy-cycle side on S^2 x S^2");
  both->add_option("--check", b_which, "chern or pontryagin")->check(CLI::IsMember({"chern", "pontryagin"}));
  both->add_option("--grid", b_grid, "degeneracy scan grid per axis");
  both->add_option("--tol", b_tol, "agreement tolerance");
  both->callback([&] {
    command = "both-sides";
    job = [&] { return both_sides_suite(b_which, b_grid, b_tol); };
  });

  auto* list = app.add_subcommand("list", "registered models and sections");
  list->callback([&] {
    command = "list";
    job = [] { return list_suite(); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Suite s = job();
    const long ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
    if (g.timing)
      for (auto& r : s.records) r.runtime_ms = ms;
    out << s.json_lines();
    out.flush();
    if (!g.emit_csv.empty())
      for (const auto& t : s.tables) write_table(t, g.emit_csv);
    summarize(s, command, err);
    return s.exit_code();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace chernlab::cli
