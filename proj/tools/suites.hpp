#pragma once

// Result records and the runnable suites behind the command line. Every
// suite is a pure function of its arguments (and CHERNLAB_THREADS, which
// never changes results), so equal arguments give byte-identical JSON.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chernlab/geometry_zoo.hpp"

namespace chernlab::cli {

using Json = nlohmann::ordered_json;

struct Record {
  std::string command;
  Json parameters = Json::object();
  std::string quantity;
  double value = 0.0;
  std::optional<double> expected;
  std::optional<double> tolerance;
  std::optional<bool> pass;
  bool reliable = true;
  std::string provenance;
  long runtime_ms = 0;
  Json detail;  // omitted when null

  Json to_json() const;
};

// Columnar text for external plotters: '#' comment lines, one header line,
// comma-separated rows.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Suite {
  std::vector<Record> records;
  std::vector<Table> tables;

  void append(Suite other);
  bool all_pass() const;  // every decided check passes and every record is reliable
  int exit_code() const { return all_pass() ? 0 : 1; }
  std::string json_lines() const;
};

void write_table(const Table& t, const std::string& dir);

enum class Mode { Exact, Float };
Mode parse_mode(const std::string& s);

// ---- algebraic fuzz suites ----------------------------------------------
// Trial t of a suite with root seed s draws from derive_seed(derive_seed(s, size), t).

Suite lemma21_suite(const std::vector<int>& ns, int trials, std::uint64_t seed, Mode mode, double tol = 1e-9);
// Matching-sum Pfaffian against the T^n / (2^n n!) oracle. ambient = 0 gives
// scalar entries, otherwise 2-form entries in that many variables.
Suite pfaffian_suite(const std::vector<int>& sizes, int trials, std::uint64_t seed, Mode mode, int ambient = 0, double tol = 1e-10);
// Pf^2 = det and p_n = e ^ e on skew matrices of 2-forms.
Suite pf_squared_suite(const std::vector<int>& ranks, int trials, std::uint64_t seed, int ambient = 8, double tol = 1e-9);
Suite corollary22_suite(const std::vector<int>& ns, int trials, std::uint64_t seed, int ambient = 8, double tol = 1e-9);
// Block sums: c(A + B) = c(A) c(B) and Pf(A + B) = Pf(A) Pf(B).
Suite whitney_suite(int n1, int n2, int trials, std::uint64_t seed, int ambient = 8, double tol = 1e-9);

// ---- model computations ---------------------------------------------------

// Registry models, plus o<d> for any integer d and real-<model> for the
// base families. grid overrides the family's resolution (s2: n_theta, with
// n_phi = 2 n_theta; torus: per axis; radial models: radial nodes).
struct ModelSpec {
  std::string name;
  int grid = 0;        // 0: family default
  double radius = 0;   // 0: family default (radial models only)
};
BundleModel build_model(const ModelSpec& spec);
std::optional<double> expected_value(const std::string& model, const std::string& cls);
std::optional<double> expected_tolerance(const std::string& model, const std::string& cls);

struct CharnumRequest {
  ModelSpec model;
  std::string cls;
  bool doubling = false;          // also integrate at twice the grid
  double doubling_tol = 5e-4;
  bool refine = false;            // half-grid refinement estimate
  int slice = 0;                  // integrand slice resolution for --emit-csv (0: none)
};
Suite charnum_suite(const CharnumRequest& r);

struct TransgressionRequest {
  std::string model = "ts2";
  bool check = false;     // residual of p^* e + d eta on the total-space grid
  double step = 1e-4;
  int grid = 64;
  int n_quad = 2;
  int fiber_samples = 9;
  double tol = 1e-4;
};
Suite transgression_suite(const TransgressionRequest& r);

struct ThomRequest {
  std::string model = "point";
  bool check = false;
  int grid = 12;
  int radial_nodes = 400;
  int angular_nodes = 128;
  int fiber_samples = 3;
};
Suite thom_suite(const ThomRequest& r);

struct ZerosRequest {
  std::string section;
  std::string model;  // empty: the section's own bundle
  int grid = 0;
};
Suite zeros_suite(const ZerosRequest& r);

Suite dual_check_suite(const std::string& example, double tol = 2e-2);
Suite intersect_suite(int d, double q_re, double q_im, bool complement, double tol = 1e-2);
Suite both_sides_suite(const std::string& which, int grid = 12, double tol = 5e-2);
Suite list_suite();

}  // namespace chernlab::cli
