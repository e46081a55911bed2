#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rqwalk/stats.hpp"
#include "rqwalk/walk.hpp"

namespace rqwalk {

// Finitely supported wave packet given by explicit amplitudes.
class StateVector {
 public:
  static StateVector basis_state(const BasisLabel& label, cd amp = 1.0);
  static StateVector from_amplitudes(std::vector<std::pair<BasisLabel, cd>> amps);

  int dim() const;
  double norm() const;
  StateVector& normalize();
  const std::vector<std::pair<BasisLabel, cd>>& amplitudes() const { return amps_; }

  // Largest sup_norm over supported sites.
  Coord support_radius() const;

  Eigen::VectorXcd embed(const LabelBasis& basis) const;  // throws if a label is absent

 private:
  explicit StateVector(std::vector<std::pair<BasisLabel, cd>> amps);
  std::vector<std::pair<BasisLabel, cd>> amps_;
};

// U^n psi for square U; negative n applies the adjoint |n| times.
Eigen::VectorXcd evolve(const WalkOperator& u, const Eigen::VectorXcd& psi, long n);

// || |X|^p psi || with |X| the sup-norm position: sqrt(sum |x|^2p |psi|^2).
double position_moment(const LabelBasis& basis, const Eigen::VectorXcd& psi, int p);

struct TransportSeries {
  int p = 1;
  std::vector<double> times;    // 0..N
  std::vector<double> moments;  // position moment at each time
  LineFit fit;                  // log-log fit over the tail half (positive moments)
  double growth_exponent = 0.0;
  int fit_points = 0;
};

// Evolves psi0 under u for N steps, recording the p-th position moment at
// every step, and fits log(moment) vs log(n) over n in [N/2, N].
TransportSeries transport_series(const WalkOperator& u, const StateVector& psi0, int N, int p);

// Window radius that keeps an N-step evolution of a packet with the given
// support away from any boundary effect.
Coord transport_window_radius(int N, Coord support_radius);

}  // namespace rqwalk
