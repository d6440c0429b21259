#pragma once

// Model bundles with explicit connections and curvatures, and the
// integration of characteristic forms over their bases.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chernlab/form_fields.hpp"
#include "chernlab/invariant_polynomials.hpp"

namespace chernlab {

using Params = std::vector<std::pair<std::string, double>>;

// How the base is integrated.
//  Direct: the chart itself, tensor grid.
//  Caps:   the chart omits two polar caps; the model supplies the cap
//          contribution of each class analytically.
//  Radial: noncompact affine chart; each complex coordinate (x, y) is
//          reparametrized as (R s^2 cos a, R s^2 sin a), s in [0,1], and the
//          polydisk of radius R is integrated for R0 and 2 R0; the two values
//          are extrapolated assuming an R^-2 tail.
struct IntegrationPlan {
  enum class Kind { Direct, Caps, Radial };
  Kind kind = Kind::Direct;
  std::vector<int> grid;                  // Direct/Caps override; empty = chart grid
  double cap_delta = 0.0;                 // Caps
  std::vector<std::pair<int, int>> pairs; // Radial: (x axis, y axis) per complex coordinate
  double radius = 20.0;                   // Radial: R0
  int radial_nodes = 160;
  int angular_nodes = 4;
  bool extrapolate = true;
  bool gauss = false;                     // Radial: Gauss-Legendre in s instead of midpoints

  Params describe() const;
};

struct Base {
  std::string name;
  Chart chart;
  IntegrationPlan plan;
};

Base product_base(const Base& a, const Base& b);

using AnyMatrixField = std::variant<MatrixField<double>, MatrixField<Complex>>;

struct BundleModel {
  std::string name;
  Base base;
  int rank = 0;  // over the scalar field
  ScalarKind kind = ScalarKind::Real;
  std::optional<AnyMatrixField> connection;
  AnyMatrixField curvature;
  int orientation = 1;
  Params parameters;
  // Closed-form contribution of the omitted caps to a class integral
  // (Caps plans only); nullopt when the model has none for that class.
  std::function<std::optional<double>(const std::string& monomial)> cap_correction;

  bool is_complex() const { return kind == ScalarKind::Complex; }
  const MatrixField<double>& real_curvature() const;
  const MatrixField<Complex>& complex_curvature() const;
  const MatrixField<double>& real_connection() const;
  const MatrixField<Complex>& complex_connection() const;
  int dim() const { return base.chart.dim(); }
};

// Omega_ij = d omega_ij - sum_k omega_ik ^ omega_kj, d by central differences.
template <class S>
MatrixField<S> curvature_from_connection(const MatrixField<S>& omega, double step = 1e-4, bool richardson = false) {
  if (omega.degree() != 1) throw UsageError("curvature_from_connection: connection entries must be 1-forms");
  auto d_omega = exterior_derivative(omega, step, richardson);
  return MatrixField<S>(omega.chart(), 2, [omega, d_omega](const Point& x) {
    const auto w = omega(x);
    return d_omega(x) - wedge(w, w);
  });
}

// Max coefficient of d Omega - omega ^ Omega + Omega ^ omega on the sample points.
template <class S>
double bianchi_residual(const MatrixField<S>& omega, const MatrixField<S>& curvature, const std::vector<Point>& pts, double step = 1e-4) {
  auto d_curv = exterior_derivative(curvature, step);
  double worst = 0.0;
  for (const auto& p : pts) {
    const auto w = omega(p);
    const auto o = curvature(p);
    worst = std::max(worst, (d_curv(p) - wedge(w, o) + wedge(o, w)).max_abs());
  }
  return worst;
}

// Max over sample points of |curvature_from_connection(omega) - Omega|.
double structure_residual(const BundleModel& m, const std::vector<Point>& pts, double step = 1e-4);

// Round S^2, tangent bundle, orthonormal coframe (d theta, sin theta d phi).
BundleModel s2_model(double cap_delta = 0.05, int n_theta = 512, int n_phi = 1024);
// Flat T^2 with trivial tangent bundle; `perturbation` adds
// eps (sin y dx + sin(x + y) dy) to omega_12, whose curvature is exact.
BundleModel torus_model(double perturbation = 0.0, int grid = 64);
// Holomorphic tangent bundle of CP^n (n = 1, 2), Fubini-Study, unitary frame.
BundleModel cp_model(int n, double radius = 20.0, int radial_nodes = 0, int angular_nodes = 4);
// O(d) over CP^1.
BundleModel line_bundle_model(int d, double radius = 20.0, int radial_nodes = 400, int angular_nodes = 4);
BundleModel realify_model(const BundleModel& m);
BundleModel direct_sum(const BundleModel& a, const BundleModel& b);
BundleModel pullback_model(const BundleModel& m, const SmoothMap& phi, const Base& new_base);
BundleModel tensor_line(const BundleModel& a, const BundleModel& b);
BundleModel trivial_model(const Base& base, int rank, ScalarKind kind);
// pr1^* a (+) pr2^* b over base(a) x base(b).
BundleModel external_sum(const BundleModel& a, const BundleModel& b);
// pr1^* m over base(m) x other.
BundleModel pullback_first(const BundleModel& m, const Base& other);
BundleModel pullback_second(const Base& other, const BundleModel& m);

// Affine chart of CP^n in interleaved real coordinates (x1, y1, ..., xn, yn).
Base affine_base(int n, double radius = 20.0, int radial_nodes = 0, int angular_nodes = 4);

// Analytic pieces of the Fubini-Study geometry at z (complex coordinates).
struct FubiniStudyPoint {
  Matrix<Complex> h;                       // h_ij = <d/dz_i, d/dz_j>
  FormMatrix<Complex> theta;               // holomorphic-frame connection dH H^-1
  FormMatrix<Complex> big_theta;           // holomorphic-frame curvature
  Matrix<Complex> g;                       // unitary frame e = g s, g = L^-1 with H = L L^*
};
FubiniStudyPoint fubini_study(const Point& x);

struct ClassFactor {
  char kind = 'c';  // 'c', 'p' or 'e'
  int k = 1;
  int power = 1;
};
struct Monomial {
  std::string text;
  std::vector<ClassFactor> factors;
};
Monomial parse_monomial(const std::string& text);
// Real degree of the monomial's form for the given model.
int monomial_degree(const Monomial& mono, const BundleModel& m);

// Top-degree integrand of the monomial (validates degree and class availability).
FormField<double> class_integrand(const BundleModel& m, const Monomial& mono);
// The individual characteristic forms at a point.
Form<double> class_form(const BundleModel& m, char kind, int k, const Point& x);

struct CharacteristicNumber {
  std::string model;
  std::string monomial;
  double value = 0.0;
  double truncation_estimate = 0.0;
  double refinement_estimate = 0.0;
  Params parameters;
};

// Integrates a top-degree field over a base with its plan. `refine` also
// integrates on the half grid and reports the difference.
struct PlanIntegral {
  double value = 0.0;
  double truncation_estimate = 0.0;
  double refinement_estimate = 0.0;
};
PlanIntegral integrate_over_base(const FormField<double>& f, const Base& base, bool refine = true);

CharacteristicNumber characteristic_number(const BundleModel& m, const std::string& monomial, bool refine = true);

struct RegistryEntry {
  std::string name;
  std::string description;
  std::function<BundleModel()> build;
  std::map<std::string, double> expected;  // monomial -> exact value
  std::map<std::string, double> tolerance;
};
const std::vector<RegistryEntry>& model_registry();
const RegistryEntry& registry_entry(const std::string& name);

}  // namespace chernlab
