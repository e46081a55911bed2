#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rqwalk/lattice.hpp"
#include "rqwalk/rng.hpp"

namespace rqwalk {

using cd = std::complex<double>;

inline constexpr double kUnitaryTol = 1e-10;

// 2d x 2d unitary acting on the coin space, rows and columns ordered by
// CoinIndex::ord().  Construction rejects matrices with ||C*C - I|| > 1e-10.
class CoinMatrix {
 public:
  CoinMatrix(Eigen::MatrixXcd m, int dim);

  int dim() const { return dim_; }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  cd entry(const CoinIndex& to, const CoinIndex& from) const {
    return m_(to.ord(), from.ord());
  }
  double unitarity_defect() const;  // ||C^* C - I||_2

 private:
  Eigen::MatrixXcd m_;
  int dim_;
};

// Permutation of the 2d coin labels.  The canonical full cycle steps through
// the ord sequence +1 -> -1 -> +2 -> -2 -> ... -> +1.
class CoinPermutation {
 public:
  // images[k] = ord of the image of the coin with ord k.
  CoinPermutation(int dim, std::vector<int> images);
  static CoinPermutation canonical_cycle(int dim);

  int dim() const { return dim_; }
  CoinIndex apply(const CoinIndex& tau) const;
  CoinIndex apply_inverse(const CoinIndex& tau) const;
  bool is_full_cycle() const;

  const std::vector<int>& images() const { return images_; }

 private:
  int dim_;
  std::vector<int> images_;          // by ord
  std::vector<int> inverse_images_;  // by ord
};

// Permutation matrix C_pi: column ord(tau) carries a 1 in row ord(pi(tau)).
CoinMatrix permutation_coin(const CoinPermutation& pi);

// Operator-norm distance ||A - B||_2 on the coin space.
double coin_distance(const CoinMatrix& a, const CoinMatrix& b);

// One-parameter real family [[t, r], [r, -t]] with t^2 + r^2 = 1 (d = 1).
CoinMatrix one_dim_tr_coin(double t, double r);

// Balanced d = 1 coin [[1, 1], [1, -1]] / sqrt(2).
CoinMatrix hadamard_coin();

// Law of a single phase in [0, 2pi).  "tabulated" interprets the weight table
// as a piecewise-constant density on a uniform grid over [0, 2pi).
class PhaseDistribution {
 public:
  enum class Kind { Uniform, Zero, Tabulated };

  static PhaseDistribution uniform();
  static PhaseDistribution zero();
  static PhaseDistribution tabulated(std::vector<double> weights);

  Kind kind() const { return kind_; }
  // Maps a uniform [0,1) variate through the inverse CDF.
  double transform(double u01) const;

  nlohmann::json to_json() const;
  static PhaseDistribution from_json(const nlohmann::json& j);

  bool operator==(const PhaseDistribution& o) const;

 private:
  PhaseDistribution(Kind k, std::vector<double> w) : kind_(k), weights_(std::move(w)) {}
  void build_table();

  Kind kind_;
  std::vector<double> weights_;
  std::vector<double> cdf_;  // tabulated only; cdf_[i] = P(phase <= grid edge i)
};

// I.i.d. phase field omega^tau_x over a cube |x| <= radius, one draw per
// (coin, site) pair.  Values are a pure function of (seed, coin, site), so the
// field costs nothing to store and is stable under coverage enlargement.
class PhaseField {
 public:
  PhaseField(int dim, Coord radius, PhaseDistribution dist, std::uint64_t seed);

  int dim() const { return dim_; }
  Coord radius() const { return radius_; }
  std::uint64_t seed() const { return seed_; }
  const PhaseDistribution& distribution() const { return dist_; }

  // Phase in [0, 2pi); throws CoverageError when sup_norm(x) > radius.
  double at(const CoinIndex& tau, const Site& x) const;

  nlohmann::json to_json() const;
  static PhaseField from_json(const nlohmann::json& j);

 private:
  int dim_;
  Coord radius_;
  PhaseDistribution dist_;
  std::uint64_t seed_;
};

// Field covering the cube |x| <= radius.
PhaseField sample_phases(int dim, Coord radius, const PhaseDistribution& dist,
                         std::uint64_t seed);

// Site-dependent decorated coin: row tau of C picks up e^{i omega^tau_{x + jump(tau)}}.
Eigen::MatrixXcd decorate_coin(const CoinMatrix& c, const PhaseField& omega, const Site& x);

}  // namespace rqwalk
