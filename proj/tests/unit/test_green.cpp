#include <doctest/doctest.h>

#include <cmath>
#include <random>

#include "rqwalk/errors.hpp"
#include "rqwalk/green.hpp"
#include "rqwalk/localized.hpp"
#include "rqwalk/rng.hpp"
#include "rqwalk/walk.hpp"

using namespace rqwalk;

namespace {

const CoinPermutation kSwap(1, {1, 0});

DisorderModel tr_model(Coord L, double r) {
  double t = std::sqrt(1.0 - r * r);
  return DisorderModel{1, L, one_dim_tr_coin(t, r), kSwap, PhaseDistribution::uniform()};
}

WalkOperator synthetic_unitary(Coord half, std::uint64_t seed) {
  LabelBasis basis = LabelBasis::from_region(Region::cube(1, half));
  auto n = static_cast<Eigen::Index>(basis.size());
  auto eng = make_engine(seed, 0);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cd(g(eng), g(eng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  WalkMeta meta;
  meta.dim = 1;
  meta.kind = "synthetic";
  return WalkOperator(basis, basis, q.sparseView(), meta);
}

}  // namespace

TEST_CASE("resolvent at the origin is the inverse step") {
  DisorderModel model = tr_model(4, 0.8);
  WalkOperator u = model.restriction(2);
  GreenSolver solver(u, cd(0, 0));
  for (std::size_t i = 0; i < u.num_cols(); i += 5) {
    for (std::size_t j = 0; j < u.num_cols(); j += 7) {
      const BasisLabel& to = u.cols().at(i);
      const BasisLabel& from = u.cols().at(j);
      CHECK(std::abs(solver.element(to, from) - std::conj(u.element(from, to))) < 1e-12);
    }
  }
}

TEST_CASE("green columns match dense inversion") {
  std::vector<WalkOperator> instances;
  instances.push_back(synthetic_unitary(7, 1));
  instances.push_back(synthetic_unitary(12, 2));
  instances.push_back(tr_model(5, 0.96).restriction(3));
  instances.push_back(tr_model(6, 1.0).restriction(4));

  for (const WalkOperator& u : instances) {
    REQUIRE(u.num_cols() <= 64);
    for (cd z : {cd(1.05, 0.0), cd(0.4, 0.8), std::polar(0.99, 1.0)}) {
      GreenSolver solver(u, z);
      Eigen::MatrixXcd a = u.dense();
      a.diagonal().array() -= z;
      Eigen::MatrixXcd ginv = a.inverse();
      double worst = 0.0;
      for (std::size_t j = 0; j < u.num_cols(); ++j) {
        Eigen::VectorXcd col = solver.column(j);
        worst = std::max(worst, (col - ginv.col(static_cast<Eigen::Index>(j))).norm());
      }
      CHECK(worst < 1e-9);
      CHECK(solver.last_residual() < kGreenResidualTol);
    }
  }
}

TEST_CASE("decoupled coin gives exactly zero off the orbit") {
  DisorderModel model{1, 6, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  WalkOperator u = model.restriction(11);
  GreenSolver solver(u, std::polar(1.01, 0.3));
  Orbit o = orbit(kSwap, BasisLabel{CoinIndex(1, 1), Site({0})});
  Eigen::VectorXcd col = solver.column(o.members[0]);
  for (std::size_t i = 0; i < u.num_cols(); ++i) {
    const BasisLabel& l = u.cols().at(i);
    bool member = false;
    for (const BasisLabel& m : o.members) {
      if (l == m) member = true;
    }
    if (member) {
      CHECK(std::abs(col(static_cast<Eigen::Index>(i))) > 0.0);
    } else {
      CHECK(col(static_cast<Eigen::Index>(i)) == cd(0, 0));
    }
  }
}

TEST_CASE("decay fit recovers planted parameters") {
  std::vector<Coord> dists = {2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> clean;
  for (Coord k : dists) clean.push_back(2.0 * std::exp(-0.5 * static_cast<double>(k)));
  DecayFit f = decay_fit(dists, clean);
  CHECK(f.gamma == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(f.prefactor == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.r2 > 1.0 - 1e-10);
  CHECK(f.points == 9);

  auto eng = make_engine(5, 0);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> noisy;
  for (double m : clean) noisy.push_back(m * std::exp(g(eng)));
  DecayFit fn = decay_fit(dists, noisy);
  CHECK(fn.gamma == doctest::Approx(0.5).epsilon(0.1));

  std::vector<double> flat(dists.size(), 0.37);
  DecayFit fc = decay_fit(dists, flat);
  CHECK(fc.gamma == 0.0);

  CHECK_THROWS_AS(decay_fit({2, 3, 4}, {1.0, 0.5, 0.25}), ConfigError);
  std::vector<double> bad(dists.size(), -1.0);
  CHECK_THROWS_AS(decay_fit(dists, bad), ConfigError);
}

TEST_CASE("fractional moment sweep is deterministic and bookkept") {
  DisorderModel model = tr_model(8, 0.95);
  FractionalMomentConfig cfg;
  cfg.s = 0.5;
  cfg.samples = 6;
  cfg.z_grid = default_z_grid(2, 1e-2);
  cfg.dist_min = 2;
  cfg.dist_max = 4;
  cfg.seed = 77;

  FractionalMomentSweep a = fractional_moment_sweep(model, cfg);
  FractionalMomentSweep b = fractional_moment_sweep(model, cfg);
  REQUIRE(a.per_distance.size() == 3);
  CHECK(a.solves == 6u * 4);
  CHECK(a.failures == 0);
  CHECK(a.realization_profiles.size() == 6);
  for (std::size_t i = 0; i < a.per_distance.size(); ++i) {
    const DistanceStats& st = a.per_distance[i];
    CHECK(st.distance == static_cast<Coord>(2 + i));
    CHECK(st.mean > 0.0);
    CHECK(st.n == 6u * 4 * 2);
    CHECK(st.mean == b.per_distance[i].mean);
    CHECK(st.std_error > 0.0);
  }

  cfg.seed = 78;
  FractionalMomentSweep c = fractional_moment_sweep(model, cfg);
  CHECK(c.per_distance[0].mean != a.per_distance[0].mean);
}

TEST_CASE("sweep estimate is stable under sample doubling") {
  DisorderModel model = tr_model(12, 0.95);
  FractionalMomentConfig cfg;
  cfg.samples = 20;
  cfg.z_grid = default_z_grid(2, 1e-2);
  cfg.dist_min = 2;
  cfg.dist_max = 6;
  cfg.seed = 31;
  DecayFit small = decay_fit(fractional_moment_sweep(model, cfg), 300, 1);

  cfg.samples = 40;
  cfg.seed = 32;
  DecayFit big = decay_fit(fractional_moment_sweep(model, cfg), 300, 1);

  REQUIRE(small.has_ci);
  REQUIRE(big.has_ci);
  double slack = (small.gamma_ci.hi - small.gamma_ci.lo) + (big.gamma_ci.hi - big.gamma_ci.lo);
  CHECK(std::abs(small.gamma - big.gamma) < slack);
}

TEST_CASE("gap probe agrees with the closed form") {
  DisorderModel model{1, 3, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  cd z = std::polar(1.0, 0.4);
  auto points = spectral_gap_probe(model, z, {0.0, 0.05, 0.3, 2.0}, 500, 9);
  REQUIRE(points.size() == 4);

  CHECK(points[0].p_hat == 0.0);
  CHECK(points[0].oracle_p == 0.0);
  CHECK(points[3].p_hat == 1.0);
  CHECK(points[3].oracle_p == 1.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].hits >= points[i - 1].hits);
  }
  for (const GapProbePoint& p : points) {
    if (p.eta == 0.0 || p.eta == 2.0) continue;
    CHECK(p.oracle_p >= p.wilson.lo);
    CHECK(p.oracle_p <= p.wilson.hi);
  }
}

TEST_CASE("gap probe off the circle sees the standoff distance") {
  DisorderModel model{1, 3, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  auto points = spectral_gap_probe(model, cd(0.5, 0.0), {0.4, 0.6}, 200, 4);
  CHECK(points[0].p_hat == 0.0);  // circle sits 0.5 away from z
  CHECK(points[0].oracle_p == 0.0);
  CHECK(points[1].p_hat > 0.0);
  CHECK(points[1].oracle_p > 0.0);
}

TEST_CASE("gap oracle endpoints") {
  CHECK(gap_probability_oracle(kSwap, 16, 0.0) == 0.0);
  CHECK(gap_probability_oracle(kSwap, 16, 2.0) == 1.0);
  CHECK(gap_probability_oracle(kSwap, 16, 0.4, 0.5) == 0.0);
  CHECK_THROWS_AS(gap_probability_oracle(kSwap, 16, -0.1), ConfigError);
  CHECK_THROWS_AS(gap_probability_oracle(kSwap, 16, 2.1), ConfigError);
}

TEST_CASE("unitary eigensystem resolves clusters and correlators") {
  Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(6, 6);
  UnitaryEigensystem es_eye(eye);
  CHECK(es_eye.clusters().size() == 1);
  CHECK(es_eye.correlator(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es_eye.correlator(0, 3) == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::VectorXcd phases(4);
  phases << std::polar(1.0, 0.1), std::polar(1.0, 0.1 + 1e-15), std::polar(1.0, 2.0),
      std::polar(1.0, -2.0);
  UnitaryEigensystem es_diag(Eigen::MatrixXcd(phases.asDiagonal()));
  CHECK(es_diag.clusters().size() == 3);
  CHECK(es_diag.correlator(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es_diag.correlator(2, 3) == doctest::Approx(0.0).epsilon(1e-12));

  WalkOperator u = tr_model(4, 0.7).restriction(6);
  UnitaryEigensystem es(u);
  CHECK(es.max_offdiagonal() < 1e-10);
  for (std::size_t i = 0; i < es.size(); i += 3) {
    CHECK(es.correlator(i, i) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t j = 0; j < es.size(); j += 5) {
      CHECK(eigenfunction_correlator(es, i, j) <= 1.0 + 1e-10);
      CHECK(eigenfunction_correlator(es, i, j) >= 0.0);
    }
  }
}

TEST_CASE("correlator has compact support for the decoupled coin") {
  DisorderModel model{1, 8, permutation_coin(kSwap), kSwap, PhaseDistribution::uniform()};
  CorrelatorDecay decay = correlator_decay_experiment(model, 4, 2, 4, 21);
  CHECK(decay.compact_support);
  CHECK(decay.fit.points == 0);
  for (double m : decay.means) CHECK(m == 0.0);
}

TEST_CASE("correlator decay runs on a disordered model") {
  CorrelatorDecay decay = correlator_decay_experiment(tr_model(8, 0.95), 6, 2, 6, 3);
  CHECK(!decay.compact_support);
  REQUIRE(decay.distances.size() == 5);
  REQUIRE(decay.realization_rows.size() == 6);
  for (double m : decay.means) {
    CHECK(m > 0.0);
    CHECK(m <= 1.0 + 1e-10);
  }
  CHECK(decay.noise_floor < 1e-10);
  CHECK(decay.fit.points == 5);
}

TEST_CASE("green elements obey the conjugation symmetry") {
  DisorderModel model = tr_model(4, 0.8);
  WalkOperator u = model.restriction(8);
  Eigen::SparseMatrix<cd> adj = u.sparse().adjoint();
  WalkOperator udag(u.cols(), u.rows(), adj, u.meta());

  cd z = std::polar(1.02, 0.7);
  GreenSolver g(u, z);
  GreenSolver gdag(udag, std::conj(z));
  for (std::size_t i = 0; i < u.num_cols(); i += 6) {
    for (std::size_t j = 0; j < u.num_cols(); j += 4) {
      const BasisLabel& x = u.cols().at(i);
      const BasisLabel& y = u.cols().at(j);
      CHECK(std::abs(std::conj(g.element(x, y)) - gdag.element(y, x)) < 1e-9);
    }
  }
}

TEST_CASE("first resolvent identity holds between grid points") {
  WalkOperator u = tr_model(5, 0.9).restriction(10);
  cd z1 = std::polar(0.99, 0.3), z2 = std::polar(1.01, 1.1);
  GreenSolver g1(u, z1), g2(u, z2);
  BasisLabel from{CoinIndex(1, 1), Site({0})};
  Eigen::VectorXcd c1 = g1.column(from), c2 = g2.column(from);
  // (U - z1)(c1 - c2) collapses to (z1 - z2) c2.
  Eigen::VectorXcd lhs = u.apply(c1 - c2) - z1 * (c1 - c2);
  CHECK((lhs - (z1 - z2) * c2).norm() < 1e-8);
}

TEST_CASE("spectral parameter guard") {
  auto grid = default_z_grid();
  CHECK(grid.size() == 16);
  for (cd z : grid) {
    CHECK(std::abs(std::abs(z) - 1.0) == doctest::Approx(1e-3).epsilon(1e-9));
    check_spectral_parameter(z);
  }
  CHECK_THROWS_AS(check_spectral_parameter(std::polar(1.0, 0.2)), ConfigError);
  CHECK_THROWS_AS(check_spectral_parameter(cd(1.0 + 1e-13, 0)), ConfigError);
  WalkOperator u = synthetic_unitary(4, 3);
  CHECK_THROWS_AS(GreenSolver(u, cd(0, 1)), ConfigError);
  CHECK_THROWS_AS(default_z_grid(0, 1e-3), ConfigError);
  CHECK_THROWS_AS(default_z_grid(4, 1e-14), ConfigError);
}
