#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rqwalk/stats.hpp"
#include "rqwalk/walk.hpp"

namespace rqwalk {

// |z| must stay off the unit circle by at least this much; the resolvent of a
// unitary blows up as the circle is approached.
inline constexpr double kMinCircleGap = 1e-12;
// A solve must reach this relative residual (after refinement) or fail.
inline constexpr double kGreenResidualTol = 1e-10;
// Dense LU below this dimension, sparse LU above.
inline constexpr std::size_t kDenseCutoff = 512;
// Dense Schur eigenvectors carry absolute entry errors of order n*eps, so
// disorder-averaged correlators bottom out around 1e-15 no matter how fast
// the true decay is.  Distances whose mean falls below this margin measure
// the eigensolver rather than the walk and are dropped from decay fits.
// (Triangular resolvent solves do not share this floor: they track components
// down to the underflow range with full relative accuracy.)
inline constexpr double kCorrelatorFitFloor = 1e-12;

void check_spectral_parameter(cd z);

// Factorization of (U - z) for one square operator and one z; solves columns
// of the Green function G(.,y;z) = (U - z)^{-1} e_{(sigma,y)} on demand.
// Solutions are iteratively refined; a residual above tolerance throws.
class GreenSolver {
 public:
  GreenSolver(const WalkOperator& u, cd z);

  cd z() const { return z_; }
  const LabelBasis& basis() const { return *basis_; }

  Eigen::VectorXcd column(std::size_t from_index) const;
  Eigen::VectorXcd column(const BasisLabel& from) const;
  cd element(const BasisLabel& to, const BasisLabel& from) const;

  double last_residual() const { return last_residual_; }

 private:
  Eigen::VectorXcd solve_refined(const Eigen::VectorXcd& rhs) const;

  cd z_;
  std::shared_ptr<const LabelBasis> basis_;
  Eigen::SparseMatrix<cd> a_;  // U - z
  bool dense_route_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> dense_lu_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cd>>> sparse_lu_;
  mutable double last_residual_ = 0.0;
};

cd green(const WalkOperator& u, cd z, const BasisLabel& to, const BasisLabel& from);

// Default ladder of spectral parameters: radii 1 +- 1e-3, `angles` angles.
std::vector<cd> default_z_grid(int angles = 8, double offset = 1e-3);

struct FractionalMomentConfig {
  double s = 0.5;               // moment exponent, in (0,1)
  int samples = 200;            // disorder realizations
  std::vector<cd> z_grid;       // empty = default_z_grid()
  Coord dist_min = 2;
  Coord dist_max = 0;           // 0 = L/2
  std::uint64_t seed = 1;
  double max_failure_rate = 0.01;  // solver failures tolerated before aborting
};

struct DistanceStats {
  Coord distance = 0;
  double mean = 0.0;
  double median_v = 0.0;
  double trimmed = 0.0;  // 10% two-sided trim
  double std_error = 0.0;
  std::size_t n = 0;
};

struct FractionalMomentSweep {
  double s = 0.0;
  std::vector<DistanceStats> per_distance;
  // Per-realization profile of distance-wise means (pooled over z and signs);
  // rows feed the bootstrap.
  std::vector<std::vector<double>> realization_profiles;
  std::size_t solves = 0, failures = 0;
};

// E|G(x, 0; z)|^s along the first axis of a d = 1 model: pairs are
// ((+1, +-k), (+1, 0)) for k = dist_min..dist_max, pooled over the z grid.
FractionalMomentSweep fractional_moment_sweep(const DisorderModel& model,
                                              const FractionalMomentConfig& cfg);

struct DecayFit {
  double gamma = 0.0;      // decay rate, -slope of log(mean) vs distance
  double prefactor = 0.0;  // exp(intercept)
  double r2 = 0.0;
  int points = 0;
  Interval gamma_ci;       // bootstrap percentile CI (when rows available)
  bool has_ci = false;
};

DecayFit decay_fit(const std::vector<Coord>& distances, const std::vector<double>& means);
DecayFit decay_fit_with_bootstrap(const std::vector<Coord>& distances,
                                  const std::vector<std::vector<double>>& rows,
                                  int resamples, std::uint64_t seed);
DecayFit decay_fit(const FractionalMomentSweep& sweep, int resamples = 400,
                   std::uint64_t seed = 7);

struct GapProbePoint {
  double eta = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  Interval wilson;
  double oracle_p = -1.0;  // exact value when available, else -1
};

// P(dist(spec(U^Lambda_omega), z) < eta) over disorder, per eta.  For a
// permutation coin the spectrum comes from the exact orbit formula and the
// probability also has a closed form (independent orbits, evenly spaced
// eigenphase combs), reported as oracle_p.
std::vector<GapProbePoint> spectral_gap_probe(const DisorderModel& model, cd z,
                                              const std::vector<double>& etas, int samples,
                                              std::uint64_t seed);

// Closed-form P(dist <= eta) for the permutation-coin model with uniform
// phases and |z| = rho: each orbit's evenly spaced eigenphase comb hits the
// eta-ball around z independently with probability (arc width * d / pi).
double gap_probability_oracle(const CoinPermutation& pi, Coord L, double eta, double rho = 1.0);

// Spectral decomposition of a square unitary via Schur (the Schur vectors of
// a normal matrix are eigenvectors).  Eigenvalues within `cluster_tol` along
// the circle are merged into one spectral cluster.
class UnitaryEigensystem {
 public:
  explicit UnitaryEigensystem(const Eigen::MatrixXcd& m, double cluster_tol = 1e-12);
  explicit UnitaryEigensystem(const WalkOperator& u, double cluster_tol = 1e-12);

  std::size_t size() const { return static_cast<std::size_t>(eigvals_.size()); }
  const Eigen::VectorXcd& eigenvalues() const { return eigvals_; }
  const Eigen::MatrixXcd& vectors() const { return q_; }
  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  double max_offdiagonal() const { return max_offdiag_; }

  // Eigenfunction correlator sum_E |<x| P_E |y>| over spectral clusters.
  double correlator(std::size_t xi, std::size_t yi) const;

 private:
  Eigen::VectorXcd eigvals_;
  Eigen::MatrixXcd q_;
  std::vector<std::vector<int>> clusters_;
  double max_offdiag_ = 0.0;
};

double eigenfunction_correlator(const UnitaryEigensystem& es, std::size_t xi, std::size_t yi);

struct CorrelatorDecay {
  std::vector<Coord> distances;
  std::vector<double> means;                          // E A(x,0) per distance
  std::vector<std::vector<double>> realization_rows;  // for bootstrap
  // Distances whose mean clears kCorrelatorFitFloor; only these enter the fit.
  std::vector<Coord> fitted_distances;
  DecayFit fit;
  double noise_floor = 0.0;      // max off-diagonal Schur residue seen
  // Correlator vanished at every probed distance (fully decoupled walk); the
  // fit is left default with points = 0.
  bool compact_support = false;
};

// Disorder-averaged correlator A((+1, +-k), (+1, 0)) along axis 1 (d = 1).
CorrelatorDecay correlator_decay_experiment(const DisorderModel& model, int samples,
                                            Coord dist_min, Coord dist_max, std::uint64_t seed);

}  // namespace rqwalk
