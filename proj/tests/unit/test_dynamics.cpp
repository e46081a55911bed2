#include <doctest/doctest.h>

#include <cmath>

#include "rqwalk/dynamics.hpp"
#include "rqwalk/errors.hpp"
#include "rqwalk/localized.hpp"
#include "rqwalk/walk.hpp"

using namespace rqwalk;

namespace {
const CoinPermutation kSwap(1, {1, 0});
}

TEST_CASE("state vector basics") {
  StateVector s = StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})});
  CHECK(s.dim() == 1);
  CHECK(s.norm() == 1.0);
  CHECK(s.support_radius() == 0);

  StateVector two = StateVector::from_amplitudes({
      {BasisLabel{CoinIndex(1, 1), Site({1})}, cd(1, 0)},
      {BasisLabel{CoinIndex(-1, 1), Site({-2})}, cd(0, 1)},
  });
  CHECK(two.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(two.support_radius() == 2);
  two.normalize();
  CHECK(two.norm() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(StateVector::from_amplitudes({
                      {BasisLabel{CoinIndex(1, 1), Site({0})}, 1.0},
                      {BasisLabel{CoinIndex(1, 1), Site({0})}, 1.0},
                  }),
                  ConfigError);
  CHECK_THROWS_AS(StateVector::from_amplitudes({}), ConfigError);
  CHECK_THROWS_AS(StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})}, 0.0).normalize(),
                  ConfigError);

  WalkOperator u = build_collared(hadamard_coin(), kSwap, 4);
  StateVector outside = StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({40})});
  CHECK_THROWS_AS(outside.embed(u.cols()), ConfigError);
}

TEST_CASE("zero steps is the identity") {
  WalkOperator u = build_collared(hadamard_coin(), kSwap, 5);
  Eigen::VectorXcd psi =
      StateVector::basis_state(BasisLabel{CoinIndex(-1, 1), Site({2})}).embed(u.cols());
  CHECK((evolve(u, psi, 0) - psi).norm() == 0.0);
}

TEST_CASE("negative steps undo positive ones") {
  DisorderModel model{1, 5, hadamard_coin(), kSwap, PhaseDistribution::uniform()};
  WalkOperator u = model.collared(3);
  Eigen::VectorXcd psi =
      StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({1})}).embed(u.cols());
  CHECK((evolve(u, evolve(u, psi, 7), -7) - psi).norm() < 1e-12);
}

TEST_CASE("swap walk has period two with the orbit phase") {
  DisorderModel model{1, 6, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  std::uint64_t seed = 12;
  WalkOperator u = model.collared(seed);
  BasisLabel start{CoinIndex(1, 1), Site({0})};
  Eigen::VectorXcd psi0 = StateVector::basis_state(start).embed(u.cols());

  Eigen::VectorXcd psi1 = evolve(u, psi0, 1);
  std::size_t flipped = u.cols().index_of(BasisLabel{CoinIndex(-1, 1), Site({-1})});
  CHECK(std::abs(std::abs(psi1(static_cast<Eigen::Index>(flipped))) - 1.0) < 1e-14);

  Eigen::VectorXcd psi2 = evolve(u, psi0, 2);
  cd overlap = psi0.dot(psi2);
  CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-14);

  double alpha = alpha_phase(orbit(kSwap, start), model.phases(seed));
  CHECK(std::abs(overlap - std::polar(1.0, alpha)) < 1e-13);
}

TEST_CASE("support grows by at most one site per step") {
  WalkOperator u = build_collared(hadamard_coin(), kSwap, 16);
  Eigen::VectorXcd psi =
      StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})}).embed(u.cols());
  for (int n = 1; n <= 10; ++n) {
    psi = u.apply(psi);
    for (std::size_t i = 0; i < u.num_cols(); ++i) {
      if (sup_norm(u.cols().at(i).site) > n) {
        CHECK(psi(static_cast<Eigen::Index>(i)) == cd(0, 0));
      }
    }
  }
}

TEST_CASE("position moment agrees with hand values") {
  LabelBasis basis = LabelBasis::from_region(Region::cube(1, 6));

  Eigen::VectorXcd origin =
      StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})}).embed(basis);
  CHECK(position_moment(basis, origin, 1) == 0.0);
  CHECK(position_moment(basis, origin, 0) == 1.0);

  Eigen::VectorXcd off =
      StateVector::basis_state(BasisLabel{CoinIndex(-1, 1), Site({-4})}).embed(basis);
  CHECK(position_moment(basis, off, 1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(position_moment(basis, off, 2) == doctest::Approx(16.0).epsilon(1e-15));

  Eigen::VectorXcd pair = StateVector::from_amplitudes({
                              {BasisLabel{CoinIndex(1, 1), Site({1})}, 1.0},
                              {BasisLabel{CoinIndex(1, 1), Site({2})}, 1.0},
                          }).embed(basis);
  CHECK(position_moment(basis, pair, 1) ==
        doctest::Approx(2.2360679774997896).epsilon(1e-15));

  CHECK_THROWS_AS(position_moment(basis, origin, -1), ConfigError);
  Eigen::VectorXcd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(position_moment(basis, wrong, 1), ConfigError);
}

TEST_CASE("trapped coin keeps moments flat") {
  DisorderModel model{1, 8, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  WalkOperator u = model.collared(9);
  StateVector psi0 = StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})});
  TransportSeries series = transport_series(u, psi0, 1000, 1);
  CHECK(std::abs(series.growth_exponent) < 0.05);
  double peak = 0;
  for (double m : series.moments) peak = std::max(peak, m);
  CHECK(peak <= 1.0 + 1e-12);
}

TEST_CASE("free coin walks ballistically") {
  int N = 200;
  Coord window = transport_window_radius(N, 0);
  WalkOperator u = build_collared(hadamard_coin(), kSwap, window);
  StateVector psi0 = StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})});
  TransportSeries series = transport_series(u, psi0, N, 1);
  CHECK(series.growth_exponent == doctest::Approx(1.0).epsilon(0.1));
  CHECK(series.fit_points >= N / 2);
}

TEST_CASE("norm survives long evolutions") {
  DisorderModel model{1, 8, hadamard_coin(), kSwap, PhaseDistribution::uniform()};
  WalkOperator u = model.collared(4);
  Eigen::VectorXcd psi =
      StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})}).embed(u.cols());
  psi = evolve(u, psi, 10000);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-8);
}

TEST_CASE("moments repeat with the coin period when phases vanish") {
  for (int d : {1, 2}) {
    CoinPermutation pi = CoinPermutation::canonical_cycle(d);
    WalkOperator u = build_collared(permutation_coin(pi), pi, d == 1 ? 8 : 4);
    Eigen::VectorXcd psi =
        StateVector::basis_state(BasisLabel{CoinIndex(1, d), Site::zero(d)}).embed(u.cols());
    std::vector<double> moments;
    for (int n = 0; n <= 4 * d + 8; ++n) {
      moments.push_back(position_moment(u.cols(), psi, 1));
      psi = u.apply(psi);
    }
    for (std::size_t n = 0; n + 2 * static_cast<std::size_t>(d) < moments.size(); ++n) {
      CHECK(moments[n] == doctest::Approx(moments[n + 2 * d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("window radius clears the horizon") {
  CHECK(transport_window_radius(100, 2) == 105);
  CHECK(transport_window_radius(4, 0) == 7);
  WalkOperator u = build_collared(hadamard_coin(), kSwap, 6);
  StateVector psi0 = StateVector::basis_state(BasisLabel{CoinIndex(1, 1), Site({0})});
  CHECK_THROWS_AS(transport_series(u, psi0, 3, 1), ConfigError);
}
