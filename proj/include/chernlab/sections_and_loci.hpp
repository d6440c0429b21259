#pragma once

// Sections of model bundles: zeros and their indices, degeneracy loci of
// section tuples, intersection numbers and Poincare-dual integral checks.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chernlab/geometry_zoo.hpp"

namespace chernlab {

// One chart of a section. Values are real fiber components in an oriented
// frame; complex sections are stored realified as (Re s1, Im s1, Re s2, ...),
// the same interleaving used for realified curvature.
struct SectionPatch {
  std::string name;
  Chart chart;                                            // scan region; grid = default scan resolution
  std::function<bool(const Point&)> owns;                 // points this patch is responsible for; empty = inside chart
  std::function<std::vector<double>(const Point&)> value;
  std::function<Jacobian(const Point&)> derivative;       // rank x dim; central differences when empty
  // Product of the chart and fiber-frame orientation signs relative to the
  // declared orientations of base and bundle.
  int orientation = 1;

  std::vector<double> operator()(const Point& x) const;
  Jacobian jacobian_at(const Point& x) const;
  bool owns_point(const Point& x) const;
};

struct SectionField {
  std::string name;
  std::string bundle;  // model the section belongs to (registry name or description)
  ScalarKind kind = ScalarKind::Real;
  int rank = 0;        // over the scalar field
  std::vector<SectionPatch> patches;

  int real_rank() const { return kind == ScalarKind::Complex ? 2 * rank : rank; }
  int dim() const;
  const SectionPatch& patch(const std::string& name) const;
};

using Holomorphic = std::function<std::vector<Complex>(const std::vector<Complex>&)>;
using HolomorphicDerivative = std::function<Matrix<Complex>(const std::vector<Complex>&)>;

// Patch of a section that is holomorphic in the chart's complex coordinates
// z_k = x_{2k} + i x_{2k+1}. The realified Jacobian is assembled from dF.
SectionPatch holomorphic_patch(std::string name, Chart chart, std::function<bool(const Point&)> owns, Holomorphic f, HolomorphicDerivative df);

std::vector<Complex> complex_coordinates(const Point& x);
Point real_coordinates(const std::vector<Complex>& z);

struct ZeroRecord {
  std::string patch;
  Point location;
  int index = 0;                 // +-1; 0 only on flagged degenerate zeros
  double jacobian_det = 0.0;
  double refine_residual = 0.0;  // max |s| at the refined point
  double condition = 0.0;        // smallest singular value of the Jacobian
  bool flagged = false;
  std::string flag;              // degenerate | no-convergence | margin
};

struct ZeroOptions {
  std::vector<int> grid;     // per axis; empty: 128 on 2-charts, 32 on 4-charts
  double tol = 1e-10;        // Newton residual
  int max_iter = 60;
  double degenerate = 1e-8;  // relative singular-value threshold
};

// Isolated zeros (rank == dim) over all patches, each kept by the patch that
// owns it, ordered by patch and then lexicographically by location.
std::vector<ZeroRecord> find_zeros(const SectionField& s, const ZeroOptions& opt = {});

// Sign of the Jacobian determinant at a zero, times the patch orientation.
// Throws DegenerateZeroError when the Jacobian is numerically singular.
int local_index(const SectionPatch& p, const Point& z, double degenerate = 1e-8);

struct IndexSum {
  int sum = 0;
  std::vector<ZeroRecord> zeros;
  bool reliable = true;       // false if any zero is flagged
  std::string companion_class;
  double companion = 0.0;     // characteristic number of the top class
  double discrepancy = 0.0;
};
IndexSum index_sum(const SectionField& s, const BundleModel& m, const ZeroOptions& opt = {});

struct DegeneracyPoint {
  Point location;
  double sigma_min = 0.0;       // of (s_1, ..., s_i)
  double prefix_sigma_min = 0.0;  // of (s_1, ..., s_{i-1}); +inf for i = 1
  bool in_stratum = true;       // N_i (prefix has full rank) rather than near D_{i-1}
  bool projected = false;       // moved onto the locus by Newton
  double transversality = 0.0;  // smallest singular value of the defining functions' differential, normalized
};

struct DegeneracySample {
  int tuple_size = 0;
  int expected_dimension = 0;  // dim M - (real codimension of D_i)
  double scale = 0.0;          // max section norm on the grid
  double tau = 0.0;            // absolute threshold tau * scale
  std::vector<DegeneracyPoint> points;
  double degenerate_fraction = 0.0;  // grid points with sigma_min < tau
  double fitted_dimension = 0.0;     // local PCA, averaged
  bool nongeneric = false;
  std::string note;
};

struct ScanOptions {
  std::vector<int> grid;          // empty: 128 on 2-charts, 32 on 4-charts
  double tau = 1e-6;
  bool project = true;            // Newton-project near-locus grid points
  double tol = 1e-10;
  double transverse = 1e-3;       // genericity threshold on the normalized singular value
};

// All sections of the tuple are read on their first patch, which must share a chart.
DegeneracySample degeneracy_scan(const std::vector<SectionField>& tuple, int i, const ScanOptions& opt = {});

struct GenericityReport {
  int tuple_size = 0;
  std::vector<DegeneracyPoint> points;
  std::vector<bool> pass;
  bool all_pass = true;  // vacuous for an empty locus
};
GenericityReport genericity_check(const std::vector<SectionField>& tuple, int i, const ScanOptions& opt = {});

// Local PCA dimension of a point cloud (neighbors within `radius`).
double fitted_dimension(const std::vector<Point>& pts, double radius);

// An oriented submanifold S -> M given by patches, each mapped into one
// patch of the ambient section; `base` and `embedding` (into the ambient
// model chart) are used for the companion integral.
struct EmbeddedPatch {
  std::string name;
  Chart chart;
  std::function<bool(const Point&)> owns;
  std::string ambient_patch;
  SmoothMap embedding;
};

struct Submanifold {
  std::string name;
  std::vector<EmbeddedPatch> patches;
  Base base;
  SmoothMap embedding;
};

struct IntersectionPoint {
  ZeroRecord zero;
  Point ambient;
  int sign_normal_first = 0;   // det[T N | T S]
  int sign_tangent_first = 0;  // det[T S | T N]
  double transversality = 0.0;
};

struct IntersectionResult {
  int count = 0;
  std::vector<IntersectionPoint> points;
  bool reliable = true;
  bool conventions_agree = true;
  double companion = 0.0;  // int_S c_n(i^* E) or int_S e(i^* E)
  double companion_truncation = 0.0;
  double discrepancy = 0.0;
};

// Signed count of S meeting the zero locus N_1 of s.
IntersectionResult intersection_number(const Submanifold& S, const SectionField& s, const BundleModel& ambient, const ZeroOptions& opt = {});

// Parametrized component of a degeneracy cycle.
struct LocusComponent {
  std::string name;
  Base base;
  SmoothMap embedding;  // into the model chart
};

struct DualCheck {
  int k = 0;
  double lhs = 0.0;
  double lhs_truncation = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0;
  double closedness = 0.0;
  std::vector<int> component_signs;
  std::vector<ZeroRecord> zeros;
  bool reliable = true;
};

// int_M c_k(E) ^ xi against int_{D_1} xi for the top class k (Euler class for
// real models). For dim M = 2k the locus is the zero set of s; otherwise the
// caller supplies its parametrized components, which are checked to lie in
// the zero set and oriented by the positivity rule.
DualCheck poincare_dual_check(const BundleModel& m, int k, const FormField<double>& xi, const SectionField& s,
                              const std::vector<LocusComponent>& locus = {});

// Columnar section table: a header line naming columns x0 .. x{m-1} and
// v0 .. v{r-1} (complex sections: real and imaginary parts interleaved),
// then one row per node of a full tensor grid. Lines starting with '#' are
// comments. Values between nodes are multilinear interpolants.
SectionField load_section_table(const std::string& path, const std::string& bundle, ScalarKind kind);

// ---- Built-in examples --------------------------------------------------

// d/dphi on the round S^2: main (theta, phi) chart plus north and south caps
// in normal coordinates.
SectionField s2_rotation_section(double cap_delta = 0.05);
// Polynomial section of O(d) over CP^1 with the given simple roots (d = roots.size()).
SectionField polynomial_section(const std::vector<Complex>& roots, const std::string& bundle);
std::vector<Complex> default_roots(int d);
SectionField torus_constant_section();
SectionField torus_sine_section();

struct SectionEntry {
  std::string name;
  std::string model;  // registry name of the bundle
  std::function<SectionField()> build;
};
const std::vector<SectionEntry>& section_registry();
const SectionEntry& section_entry(const std::string& name);

// Locus identity examples on CP^1 x CP^1 (that is S^2 x S^2).
struct IntersectionExample {
  BundleModel ambient;
  SectionField section;
  Submanifold S;
};
// E = pr1^* O(d), s = pr1^* p with simple roots; S = CP^1 x {q}, or
// {q'} x CP^1 with p(q') != 0 when `complement`.
IntersectionExample product_intersection_example(int d, Complex q = {0.4, -0.3}, bool complement = false);

struct DualExample {
  BundleModel model;
  int k = 0;
  FormField<double> xi;
  SectionField section;
  std::vector<LocusComponent> locus;
};
DualExample line_dual_example();     // O(2) over CP^1, xi = 1
DualExample product_dual_example();  // pr1^* O(1) over CP^1 x CP^1, xi = pr2^* area / its total

struct BothSides {
  std::string name;
  double lhs = 0.0;
  double lhs_truncation = 0.0;
  double rhs = 0.0;
  double rhs_truncation = 0.0;
  double discrepancy = 0.0;
  int intersection_count = 0;  // push-off count (Corollary of the normal bundle check)
  double locus_dimension = 0.0;
  double locus_offset = 0.0;   // max distance of detected locus points from the parametrized locus
  int locus_points = 0;
  std::vector<Point> cloud;    // detected locus points, model chart coordinates
  Params parameters;
};

// E = pr1^* O(1) + pr2^* O(1), sections s1 = (z1, z2), s2 = (1, 1): the
// locus N_2 is the diagonal, and int c1^2 is compared with int_N c1(F) for
// F the orthogonal complement of the nowhere-zero section (1, t) of E|_N.
BothSides product_chern_check(int grid = 12);
// E = realified O(1,1) + R^2, sections e3, e4, z1 - z2: N_3 is the diagonal
// and int p1 is compared with the Euler number of its normal bundle, both as
// an integral and as the self-intersection count against a push-off.
BothSides product_pontryagin_check(int grid = 12);

// Complex rank-1 orthogonal complement of a nowhere-zero section v of a
// complex rank-2 model, with the projected connection. v is given in the
// model's unitary frame.
BundleModel complement_line(const BundleModel& e, std::function<std::vector<Complex>(const Point&)> v);

}  // namespace chernlab
