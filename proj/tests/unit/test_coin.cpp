#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rqwalk/coin.hpp"
#include "rqwalk/errors.hpp"
#include "rqwalk/stats.hpp"

using namespace rqwalk;

namespace {

CoinPermutation swap_d1() { return CoinPermutation(1, {1, 0}); }

}  // namespace

TEST_CASE("permutation coin matrices") {
  CoinMatrix swap = permutation_coin(swap_d1());
  CHECK(swap.matrix()(0, 0) == cd(0.0));
  CHECK(swap.matrix()(0, 1) == cd(1.0));
  CHECK(swap.matrix()(1, 0) == cd(1.0));
  CHECK(swap.matrix()(1, 1) == cd(0.0));

  CoinMatrix ident = permutation_coin(CoinPermutation(1, {0, 1}));
  CHECK(ident.matrix().isIdentity(0.0));

  // Full cycle +1 -> -1 -> +2 -> -2 -> +1 in d = 2.
  CoinPermutation cyc = CoinPermutation::canonical_cycle(2);
  CHECK(cyc.is_full_cycle());
  CoinMatrix cm = permutation_coin(cyc);
  CHECK(cm.unitarity_defect() == 0.0);
  for (int from = 0; from < 4; ++from) {
    CoinIndex tau = CoinIndex::from_ord(from, 2);
    for (int to = 0; to < 4; ++to) {
      cd expect = to == cyc.apply(tau).ord() ? cd(1.0) : cd(0.0);
      CHECK(cm.matrix()(to, from) == expect);
    }
  }
}

TEST_CASE("permutation coin has one unit entry per row and column") {
  for (int d : {1, 2, 3}) {
    CoinMatrix cm = permutation_coin(CoinPermutation::canonical_cycle(d));
    int n = 2 * d;
    for (int i = 0; i < n; ++i) {
      int row_ones = 0, col_ones = 0;
      for (int j = 0; j < n; ++j) {
        CHECK((cm.matrix()(i, j) == cd(0.0) || cm.matrix()(i, j) == cd(1.0)));
        if (cm.matrix()(i, j) == cd(1.0)) ++row_ones;
        if (cm.matrix()(j, i) == cd(1.0)) ++col_ones;
      }
      CHECK(row_ones == 1);
      CHECK(col_ones == 1);
    }
  }
}

TEST_CASE("permutation validation") {
  CHECK_THROWS_AS(CoinPermutation(1, {0, 0}), ConfigError);
  CHECK_THROWS_AS(CoinPermutation(1, {0}), ConfigError);
  CHECK_FALSE(CoinPermutation(2, {1, 0, 3, 2}).is_full_cycle());
}

TEST_CASE("coin distance against the swap") {
  CHECK(coin_distance(permutation_coin(swap_d1()), permutation_coin(swap_d1())) == 0.0);

  // [[t, r], [r, -t]] vs swap: singular values of the difference give
  // sqrt(t^2 + (1 - r)^2) at t = 0.6, r = 0.8.
  CoinMatrix tr = one_dim_tr_coin(0.6, 0.8);
  double expect = 0.6324555320336759;  // sqrt(0.40)
  CHECK(coin_distance(tr, permutation_coin(swap_d1())) == doctest::Approx(expect).epsilon(1e-12));

  // A global phase moves the whole spectrum: distance |e^{i phi} - 1|.
  Eigen::MatrixXcd rotated = std::polar(1.0, 0.1) * permutation_coin(swap_d1()).matrix();
  CoinMatrix rc(rotated, 1);
  double phase_dist = 0.09995833854135666;  // 2 sin(0.05)
  CHECK(coin_distance(rc, permutation_coin(swap_d1())) ==
        doctest::Approx(phase_dist).epsilon(1e-12));
}

TEST_CASE("tr family requires a unit circle point") {
  CHECK_THROWS_AS(one_dim_tr_coin(0.6, 0.9), ConfigError);
  CoinMatrix h = hadamard_coin();
  double isq = 1.0 / std::sqrt(2.0);
  CHECK(h.matrix()(0, 0).real() == doctest::Approx(isq));
  CHECK(h.matrix()(1, 1).real() == doctest::Approx(-isq));
}

TEST_CASE("non-unitary matrices are rejected") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2) * 1.1;
  CHECK_THROWS_AS(CoinMatrix(bad, 1), ConfigError);
}

TEST_CASE("zero distribution and reproducibility") {
  PhaseField zero = sample_phases(1, 5, PhaseDistribution::zero(), 3);
  for (Coord x = -5; x <= 5; ++x) {
    CHECK(zero.at(CoinIndex(1, 1), Site({x})) == 0.0);
    CHECK(zero.at(CoinIndex(-1, 1), Site({x})) == 0.0);
  }

  PhaseField a = sample_phases(2, 4, PhaseDistribution::uniform(), 99);
  PhaseField b = sample_phases(2, 4, PhaseDistribution::uniform(), 99);
  PhaseField c = sample_phases(2, 4, PhaseDistribution::uniform(), 100);
  bool all_equal = true, any_differ = false;
  for (const Site& x : cube_sites(2, 4)) {
    for (int o = 0; o < 4; ++o) {
      CoinIndex tau = CoinIndex::from_ord(o, 2);
      all_equal = all_equal && a.at(tau, x) == b.at(tau, x);
      any_differ = any_differ || a.at(tau, x) != c.at(tau, x);
    }
  }
  CHECK(all_equal);
  CHECK(any_differ);
}

TEST_CASE("coverage limit is enforced") {
  PhaseField f = sample_phases(1, 3, PhaseDistribution::uniform(), 1);
  CHECK_THROWS_AS(f.at(CoinIndex(1, 1), Site({4})), CoverageError);
}

TEST_CASE("uniform phases have vanishing circular mean") {
  PhaseField f = sample_phases(1, 25000, PhaseDistribution::uniform(), 7);
  int n = 0;
  cd mean = 0.0;
  for (Coord x = -25000; x < 25000; ++x) {
    mean += std::polar(1.0, f.at(CoinIndex(1, 1), Site({x})));
    ++n;
  }
  mean /= static_cast<double>(n);
  // CLT: each component has variance 1/2, so |mean| stays below 3/sqrt(n).
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform phases pass a KS test") {
  PhaseField f = sample_phases(1, 5000, PhaseDistribution::uniform(), 11);
  std::vector<double> u;
  for (Coord x = -5000; x < 5000; ++x) {
    u.push_back(f.at(CoinIndex(1, 1), Site({x})) / (2.0 * std::numbers::pi));
  }
  double d_stat = ks_uniform_distance(u);
  double crit = 1.628 / std::sqrt(static_cast<double>(u.size()));  // alpha = 0.01
  CHECK(d_stat < crit);
}

TEST_CASE("tabulated distribution with flat weights is uniform") {
  PhaseDistribution tab = PhaseDistribution::tabulated(std::vector<double>(64, 1.0));
  PhaseField f = sample_phases(1, 5000, tab, 13);
  std::vector<double> u;
  for (Coord x = -5000; x < 5000; ++x) {
    u.push_back(f.at(CoinIndex(1, 1), Site({x})) / (2.0 * std::numbers::pi));
  }
  CHECK(ks_uniform_distance(u) < 1.628 / std::sqrt(static_cast<double>(u.size())));
}

TEST_CASE("tabulated distribution respects the weight profile") {
  // All mass on the first half of the circle.
  std::vector<double> w(8, 0.0);
  for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i)] = 1.0;
  PhaseDistribution tab = PhaseDistribution::tabulated(w);
  PhaseField f = sample_phases(1, 2000, tab, 17);
  for (Coord x = -2000; x < 2000; ++x) {
    CHECK(f.at(CoinIndex(1, 1), Site({x})) <= std::numbers::pi + 1e-12);
  }
}

TEST_CASE("bad tabulated weights are rejected") {
  CHECK_THROWS_AS(PhaseDistribution::tabulated({1.0, -1.0}), ConfigError);
  CHECK_THROWS_AS(PhaseDistribution::tabulated({0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(PhaseDistribution::tabulated({}), ConfigError);
}

TEST_CASE("decorate_coin applies row phases") {
  CoinMatrix h = hadamard_coin();
  PhaseField zero = sample_phases(1, 4, PhaseDistribution::zero(), 1);
  Eigen::MatrixXcd same = decorate_coin(h, zero, Site({0}));
  CHECK((same - h.matrix()).cwiseAbs().maxCoeff() == 0.0);

  PhaseField f = sample_phases(1, 4, PhaseDistribution::uniform(), 23);
  Site x({1});
  Eigen::MatrixXcd dec = decorate_coin(h, f, x);
  // Row +1 is scaled by the phase at x+1, row -1 by the phase at x-1.
  cd p1 = std::polar(1.0, f.at(CoinIndex(1, 1), Site({2})));
  cd p2 = std::polar(1.0, f.at(CoinIndex(-1, 1), Site({0})));
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(dec(0, j) - p1 * h.matrix()(0, j)) < 1e-15);
    CHECK(std::abs(dec(1, j) - p2 * h.matrix()(1, j)) < 1e-15);
  }
  // Diagonal phases times a unitary stays unitary.
  CHECK((dec.adjoint() * dec - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("phase field JSON round trip") {
  PhaseField f = sample_phases(2, 6, PhaseDistribution::uniform(), 321);
  PhaseField g = PhaseField::from_json(f.to_json());
  CHECK(g.dim() == f.dim());
  CHECK(g.radius() == f.radius());
  CHECK(g.seed() == f.seed());
  for (const Site& x : cube_sites(2, 6)) {
    for (int o = 0; o < 4; ++o) {
      CoinIndex tau = CoinIndex::from_ord(o, 2);
      CHECK(f.at(tau, x) == g.at(tau, x));
    }
  }

  PhaseDistribution tab = PhaseDistribution::tabulated({1.0, 2.0, 1.0});
  CHECK(PhaseDistribution::from_json(tab.to_json()) == tab);
  CHECK(PhaseDistribution::from_json(PhaseDistribution::zero().to_json()) ==
        PhaseDistribution::zero());
}
