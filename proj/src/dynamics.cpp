#include "rqwalk/dynamics.hpp"

#include <cmath>

namespace rqwalk {

StateVector::StateVector(std::vector<std::pair<BasisLabel, cd>> amps) : amps_(std::move(amps)) {
  if (amps_.empty()) throw ConfigError("state needs at least one amplitude");
  int d = amps_.front().first.coin.dim();
  for (const auto& [label, amp] : amps_) {
    if (label.coin.dim() != d || label.site.dim() != d) {
      throw ConfigError("state label dimension mismatch");
    }
  }
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    for (std::size_t j = i + 1; j < amps_.size(); ++j) {
      if (amps_[i].first == amps_[j].first) {
        throw ConfigError("duplicate label in state: " + amps_[i].first.str());
      }
    }
  }
}

StateVector StateVector::basis_state(const BasisLabel& label, cd amp) {
  return StateVector({{label, amp}});
}

StateVector StateVector::from_amplitudes(std::vector<std::pair<BasisLabel, cd>> amps) {
  return StateVector(std::move(amps));
}

int StateVector::dim() const { return amps_.front().first.coin.dim(); }

double StateVector::norm() const {
  double acc = 0;
  for (const auto& [label, amp] : amps_) acc += std::norm(amp);
  return std::sqrt(acc);
}

StateVector& StateVector::normalize() {
  double n = norm();
  if (!(n > 0)) throw ConfigError("cannot normalize the zero state");
  for (auto& [label, amp] : amps_) amp /= n;
  return *this;
}

Coord StateVector::support_radius() const {
  Coord r = 0;
  for (const auto& [label, amp] : amps_) r = std::max(r, sup_norm(label.site));
  return r;
}

Eigen::VectorXcd StateVector::embed(const LabelBasis& basis) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& [label, amp] : amps_) {
    v(static_cast<Eigen::Index>(basis.index_of(label))) = amp;
  }
  return v;
}

Eigen::VectorXcd evolve(const WalkOperator& u, const Eigen::VectorXcd& psi, long n) {
  if (!u.square()) throw ConfigError("evolution needs a square operator");
  Eigen::VectorXcd v = psi;
  for (long k = 0; k < (n >= 0 ? n : -n); ++k) {
    v = n >= 0 ? u.apply(v) : u.apply_adjoint(v);
  }
  return v;
}

double position_moment(const LabelBasis& basis, const Eigen::VectorXcd& psi, int p) {
  if (p < 0) throw ConfigError("moment order must be >= 0");
  if (static_cast<std::size_t>(psi.size()) != basis.size()) {
    throw ConfigError("vector length does not match basis");
  }
  double acc = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    double a2 = std::norm(psi(static_cast<Eigen::Index>(i)));
    if (a2 == 0.0) continue;
    double r = static_cast<double>(sup_norm(basis.at(i).site));
    acc += std::pow(r, 2 * p) * a2;
  }
  return std::sqrt(acc);
}

TransportSeries transport_series(const WalkOperator& u, const StateVector& psi0, int N, int p) {
  if (N < 4) throw ConfigError("transport horizon must be >= 4");
  TransportSeries out;
  out.p = p;
  out.times.reserve(static_cast<std::size_t>(N) + 1);
  out.moments.reserve(static_cast<std::size_t>(N) + 1);

  const LabelBasis& basis = u.cols();
  Eigen::VectorXd weights(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    weights(static_cast<Eigen::Index>(i)) =
        std::pow(static_cast<double>(sup_norm(basis.at(i).site)), 2 * p);
  }
  auto moment_of = [&](const Eigen::VectorXcd& v) {
    return std::sqrt(weights.dot(v.cwiseAbs2()));
  };

  Eigen::VectorXcd v = psi0.embed(basis);
  out.times.push_back(0);
  out.moments.push_back(moment_of(v));
  for (int n = 1; n <= N; ++n) {
    v = u.apply(v);
    out.times.push_back(static_cast<double>(n));
    out.moments.push_back(moment_of(v));
  }

  std::vector<double> lx, ly;
  for (int n = N / 2; n <= N; ++n) {
    double m = out.moments[static_cast<std::size_t>(n)];
    if (m > 0) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(m));
    }
  }
  out.fit_points = static_cast<int>(lx.size());
  if (lx.size() >= 2) {
    out.fit = fit_line(lx, ly);
    out.growth_exponent = out.fit.slope;
  } else {
    // A tail with at most one nonzero moment is flat for our purposes.
    out.fit = LineFit{};
    out.growth_exponent = 0.0;
  }
  return out;
}

Coord transport_window_radius(int N, Coord support_radius) {
  return static_cast<Coord>(N) + support_radius + 3;
}

}  // namespace rqwalk
