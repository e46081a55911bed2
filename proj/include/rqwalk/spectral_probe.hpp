#pragma once

#include <functional>
#include <vector>

#include "rqwalk/green.hpp"
#include "rqwalk/walk.hpp"

namespace rqwalk {

// Scalar function on the unit circle, evaluated at angle theta.
using CircleFunction = std::function<cd(double)>;

CircleFunction circle_constant_one();
CircleFunction circle_identity();   // f(e^{i theta}) = e^{i theta}
CircleFunction circle_square();     // e^{2 i theta}
CircleFunction circle_real_part();  // cos(theta)

struct PoissonConfig {
  double r = 0.999;  // in (0, 1)
  int grid = 1 << 16;
  bool check_positivity = true;  // assert diagonal integrand >= 0 for f >= 0
};

// Rejects r outside (0,1) and grids too coarse for the kernel width: the
// Poisson kernel at radius r needs at least 64/(1-r) nodes.
void check_poisson_config(const PoissonConfig& cfg);

// Matrix element <to| f_r(U) |from> of the Poisson-smoothed functional
// calculus (1-r^2)/(2 pi) Int (U - r e^{it})^{-1} (U^* - r e^{-it})^{-1}
// f(e^{it}) dt, by trapezoid on a uniform grid.  In the eigenbasis the double
// resolvent collapses to the Poisson kernel P_r(t - arg lambda), so the
// integral runs per node over the spectral weights; aliasing decays like
// r^grid.  The n-th Fourier mode of f comes back damped by r^|n|; that bias
// vanishes as r -> 1.
cd poisson_reconstruct(const UnitaryEigensystem& es, std::size_t to, std::size_t from,
                       const CircleFunction& f, const PoissonConfig& cfg);
cd poisson_reconstruct(const WalkOperator& u, const BasisLabel& to, const BasisLabel& from,
                       const CircleFunction& f, const PoissonConfig& cfg);

// Same integral by direct resolvent solves at each node; O(grid) dense
// factorizations, so keep the grid small.  Cross-checks the spectral route.
cd poisson_reconstruct_resolvent(const Eigen::MatrixXcd& u, std::size_t to, std::size_t from,
                                 const CircleFunction& f, const PoissonConfig& cfg);

struct PoissonProbe {
  double r = 0.0;
  cd reconstructed;
  cd reference;       // exact matrix element of f(U)
  double abs_error = 0.0;
};

// Reconstruction error against the exact element of f(U) along a radius
// ladder; the error should shrink as r -> 1.
std::vector<PoissonProbe> poisson_radius_ladder(const UnitaryEigensystem& es, std::size_t to,
                                                std::size_t from, const CircleFunction& f,
                                                cd reference, const std::vector<double>& radii,
                                                int grid);

struct GrafSample {
  cd z;
  Coord x = 0;
  double lhs = 0.0;    // (1 - |z|^2) E |G((+1,x), origin; z)|^2
  double rhs = 0.0;    // sum_{|m-x|<=4, coins} max_z E |G((coin,m), origin)|^s
  double ratio = 0.0;  // lhs / rhs
};

struct GrafDiagnostic {
  double s = 0.0;
  std::vector<GrafSample> samples;
  double fitted_k = 0.0;  // max ratio over probes
};

// Second-moment diagnostic: the weighted second moment of the Green function
// against the local sum of fractional moments.  The fitted constant (max
// observed ratio) should be stable in the volume.  Requires |z| < 1 on the
// whole grid and a d = 1 model.
GrafDiagnostic graf_diagnostic(const DisorderModel& model, const std::vector<cd>& z_grid,
                               double s, const std::vector<Coord>& x_probes, int samples,
                               std::uint64_t seed);

struct ConditionalMomentResult {
  double s = 0.0;
  double quad_mean = 0.0;     // tensor-quadrature average of |G|^s over two phases
  double quad_shifted = 0.0;  // same integral from a shifted grid origin
  double max_node = 0.0;      // largest |G|^s over quadrature nodes
  double min_node = 0.0;
  int nodes_per_axis = 0;
};

// Conditions on every phase except two distinguished ones and averages |G|^s
// over those two with an n x n tensor midpoint rule.  The two phases enter as
// unit scalings of single operator rows, so each node is a row rescale plus a
// dense solve.  The phase law is rotation invariant, so the shifted-origin
// quadrature must agree with the plain one.
ConditionalMomentResult conditional_moment_check(const DisorderModel& model, cd z, double s,
                                                const BasisLabel& row_a, const BasisLabel& row_b,
                                                const BasisLabel& to, const BasisLabel& from,
                                                std::uint64_t background_seed, int n = 64);

}  // namespace rqwalk
