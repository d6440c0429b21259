#pragma once

// Rank-2 sphere bundles: adapted frames, the transgression form eta with
// p^* e(Omega) = -d eta, and the Thom form built from it.

#include <functional>
#include <string>
#include <vector>

#include "chernlab/geometry_zoo.hpp"

namespace chernlab {

// Total chart = base x [0, 2 pi) (fiber angle psi, last axis). The adapted
// frame is e2~ = cos psi e1 + sin psi e2 (tautological unit vector) and
// e1~ = sin psi e1 - cos psi e2, its clockwise quarter-turn, so (e1~, e2~) is
// positively oriented.
struct SphereBundle {
  BundleModel model;
  Chart base;
  Chart total;
  SmoothMap projection;
  // frame(x)(a, b): component of e_a~ along e_b at a total-chart point
  Matrix<double> frame(const Point& x) const;
};

SphereBundle sphere_bundle(const BundleModel& m, int fiber_grid = 64);

struct ModifiedConnection {
  MatrixField<double> pullback_adapted;  // p^* omega written in the adapted frame
  MatrixField<double> modified;          // omega~: D~ e_2~ = 0, omega~_ab = (p^* omega)_ab for a, b < 2
};
ModifiedConnection modified_connection(const SphereBundle& sb);

// Curvature of p^* D + t (D~ - p^* D), by finite differences.
MatrixField<double> interpolated_curvature(const SphereBundle& sb, double t, double step = 1e-4);

struct TransgressionOptions {
  int n_quad = 2;
  double step = 1e-4;
  std::vector<int> residual_grid;   // empty: 64 per axis
  int fiber_samples = 9;            // base points for fiber integrals (per axis)
  int fiber_nodes = 256;
};

struct TransgressionResult {
  FormField<double> eta;
  double residual = 0.0;                 // max |p^* e(Omega) + d eta|
  std::vector<double> fiber_integrals;
  double fiber_mean = 0.0;
  double fiber_spread = 0.0;
};

// eta = (-1/2 pi)^n int_0^1 Pf(omega~ - p^* omega, Omega_t, ..., Omega_t) dt (rank 2: n = 1).
FormField<double> transgression_eta(const SphereBundle& sb, int n_quad = 2, double step = 1e-4);
TransgressionResult transgression_check(const SphereBundle& sb, const TransgressionOptions& opt = {});

// Radial profile rho with rho = -1 on [0,1], rho = 0 on [2, inf).
struct ThomProfile {
  std::string name;
  std::function<double(double)> rho;
  std::function<double(double)> drho;
};
ThomProfile smoothstep_profile();
// Throws UsageError if the boundary values or monotonicity on [1,2] fail.
void validate_profile(const ThomProfile& p);

struct ThomResult {
  FormField<double> phi;                 // on base x [0, r_max] x [0, 2 pi)
  std::vector<double> fiber_integrals;   // one per sampled base point
  double closedness = 0.0;               // max |d Phi| on the sample grid
  double support_violation = 0.0;        // max |Phi - rho d eta| for r outside (1, 2)
};

struct ThomOptions {
  double step = 1e-4;
  int radial_nodes = 400;
  int angular_nodes = 128;
  std::vector<int> check_grid;  // empty: 12 per axis
  int fiber_samples = 3;
};

ThomResult thom_form(const SphereBundle& sb, const ThomProfile& profile, const ThomOptions& opt = {});

// Gauss-Bonnet through transgression on a capped 2-sphere chart: sigma is the
// section x -> (x, angle of V(x)), and -int_{boundary} sigma^* eta over the
// two cap circles is the Euler integral of the annulus; it tends to the index
// sum as the caps shrink.
struct BoundaryTransgression {
  double cap_delta = 0.0;
  double value = 0.0;
};
BoundaryTransgression boundary_transgression(const BundleModel& s2_like, const std::function<std::pair<double, double>(const Point&)>& field,
                                             int nodes = 512);

}  // namespace chernlab
