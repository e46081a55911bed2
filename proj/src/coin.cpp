#include "rqwalk/coin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rqwalk {

namespace {
double hermitian_norm(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}
}  // namespace

CoinMatrix::CoinMatrix(Eigen::MatrixXcd m, int dim) : m_(std::move(m)), dim_(checked_dim(dim)) {
  int n = 2 * dim_;
  if (m_.rows() != n || m_.cols() != n) {
    throw ConfigError("coin matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  double defect = unitarity_defect();
  if (!(defect <= kUnitaryTol)) {
    throw ConfigError("coin matrix not unitary: defect " + std::to_string(defect));
  }
}

double CoinMatrix::unitarity_defect() const {
  Eigen::MatrixXcd g = m_.adjoint() * m_;
  g.diagonal().array() -= 1.0;
  return hermitian_norm(g);
}

CoinPermutation::CoinPermutation(int dim, std::vector<int> images)
    : dim_(checked_dim(dim)), images_(std::move(images)) {
  int n = 2 * dim_;
  if (static_cast<int>(images_.size()) != n) {
    throw ConfigError("permutation needs " + std::to_string(n) + " images");
  }
  inverse_images_.assign(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    int img = images_[static_cast<std::size_t>(k)];
    if (img < 0 || img >= n) throw ConfigError("permutation image out of range");
    if (inverse_images_[static_cast<std::size_t>(img)] != -1) {
      throw ConfigError("permutation images collide");
    }
    inverse_images_[static_cast<std::size_t>(img)] = k;
  }
}

CoinPermutation CoinPermutation::canonical_cycle(int dim) {
  int n = 2 * checked_dim(dim);
  std::vector<int> images(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) images[static_cast<std::size_t>(k)] = (k + 1) % n;
  return CoinPermutation(dim, std::move(images));
}

CoinIndex CoinPermutation::apply(const CoinIndex& tau) const {
  if (tau.dim() != dim_) throw ConfigError("permutation dimension mismatch");
  return CoinIndex::from_ord(images_[static_cast<std::size_t>(tau.ord())], dim_);
}

CoinIndex CoinPermutation::apply_inverse(const CoinIndex& tau) const {
  if (tau.dim() != dim_) throw ConfigError("permutation dimension mismatch");
  return CoinIndex::from_ord(inverse_images_[static_cast<std::size_t>(tau.ord())], dim_);
}

bool CoinPermutation::is_full_cycle() const {
  int n = 2 * dim_;
  int at = 0;
  for (int steps = 1; steps < n; ++steps) {
    at = images_[static_cast<std::size_t>(at)];
    if (at == 0) return false;
  }
  return images_[static_cast<std::size_t>(at)] == 0;
}

CoinMatrix permutation_coin(const CoinPermutation& pi) {
  int n = 2 * pi.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) m(pi.images()[static_cast<std::size_t>(k)], k) = 1.0;
  return CoinMatrix(std::move(m), pi.dim());
}

double coin_distance(const CoinMatrix& a, const CoinMatrix& b) {
  if (a.dim() != b.dim()) throw ConfigError("coin dimension mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.matrix() - b.matrix());
  return svd.singularValues()(0);
}

CoinMatrix one_dim_tr_coin(double t, double r) {
  if (std::abs(t * t + r * r - 1.0) > 1e-12) {
    throw ConfigError("t^2 + r^2 must equal 1");
  }
  Eigen::MatrixXcd m(2, 2);
  m << t, r, r, -t;
  return CoinMatrix(std::move(m), 1);
}

CoinMatrix hadamard_coin() {
  double h = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << h, h, h, -h;
  return CoinMatrix(std::move(m), 1);
}

PhaseDistribution PhaseDistribution::uniform() { return PhaseDistribution(Kind::Uniform, {}); }

PhaseDistribution PhaseDistribution::zero() { return PhaseDistribution(Kind::Zero, {}); }

PhaseDistribution PhaseDistribution::tabulated(std::vector<double> weights) {
  PhaseDistribution d(Kind::Tabulated, std::move(weights));
  d.build_table();
  return d;
}

void PhaseDistribution::build_table() {
  if (weights_.empty()) throw ConfigError("tabulated distribution needs weights");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("weights must not all vanish");
  cdf_.assign(weights_.size() + 1, 0.0);
  for (std::size_t i = 0; i < weights_.size(); ++i) cdf_[i + 1] = cdf_[i] + weights_[i] / total;
  cdf_.back() = 1.0;
}

double PhaseDistribution::transform(double u01) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Uniform:
      return u01 * two_pi;
    case Kind::Tabulated: {
      auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u01);
      std::size_t bin = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
      bin = bin > 0 ? bin - 1 : 0;
      if (bin >= weights_.size()) bin = weights_.size() - 1;
      double lo = cdf_[bin], hi = cdf_[bin + 1];
      double frac = hi > lo ? (u01 - lo) / (hi - lo) : 0.0;
      double width = two_pi / static_cast<double>(weights_.size());
      double theta = (static_cast<double>(bin) + frac) * width;
      return theta < two_pi ? theta : std::nextafter(two_pi, 0.0);
    }
  }
  throw SolverError("unreachable distribution kind");
}

nlohmann::json PhaseDistribution::to_json() const {
  switch (kind_) {
    case Kind::Uniform:
      return {{"kind", "uniform"}};
    case Kind::Zero:
      return {{"kind", "zero"}};
    case Kind::Tabulated:
      return {{"kind", "tabulated"}, {"weights", weights_}};
  }
  throw SolverError("unreachable distribution kind");
}

PhaseDistribution PhaseDistribution::from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return uniform();
  if (kind == "zero") return zero();
  if (kind == "tabulated") return tabulated(j.at("weights").get<std::vector<double>>());
  throw ConfigError("unknown distribution kind: " + kind);
}

bool PhaseDistribution::operator==(const PhaseDistribution& o) const {
  return kind_ == o.kind_ && weights_ == o.weights_;
}

PhaseField::PhaseField(int dim, Coord radius, PhaseDistribution dist, std::uint64_t seed)
    : dim_(checked_dim(dim)), radius_(radius), dist_(std::move(dist)), seed_(seed) {
  if (radius_ < 0) throw ConfigError("phase field radius must be >= 0");
}

double PhaseField::at(const CoinIndex& tau, const Site& x) const {
  if (tau.dim() != dim_ || x.dim() != dim_) {
    throw ConfigError("phase field dimension mismatch");
  }
  if (sup_norm(x) > radius_) {
    throw CoverageError("site " + x.str() + " outside phase coverage radius " +
                        std::to_string(radius_));
  }
  std::uint64_t counter = (x.key() << 3) | static_cast<std::uint64_t>(tau.ord());
  return dist_.transform(counter_uniform01(seed_, counter));
}

nlohmann::json PhaseField::to_json() const {
  return {{"dim", dim_},
          {"radius", radius_},
          {"seed", seed_},
          {"distribution", dist_.to_json()}};
}

PhaseField PhaseField::from_json(const nlohmann::json& j) {
  return PhaseField(j.at("dim").get<int>(), j.at("radius").get<Coord>(),
                    PhaseDistribution::from_json(j.at("distribution")),
                    j.at("seed").get<std::uint64_t>());
}

PhaseField sample_phases(int dim, Coord radius, const PhaseDistribution& dist,
                         std::uint64_t seed) {
  return PhaseField(dim, radius, dist, seed);
}

Eigen::MatrixXcd decorate_coin(const CoinMatrix& c, const PhaseField& omega, const Site& x) {
  int n = 2 * c.dim();
  Eigen::MatrixXcd m = c.matrix();
  for (int row = 0; row < n; ++row) {
    CoinIndex tau = CoinIndex::from_ord(row, c.dim());
    double phi = omega.at(tau, x + jump(tau));
    m.row(row) *= std::exp(cd(0.0, phi));
  }
  return m;
}

}  // namespace rqwalk
