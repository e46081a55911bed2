#include "rqwalk/spectral_probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "rqwalk/parallel.hpp"
#include "rqwalk/rng.hpp"

namespace rqwalk {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CircleFunction circle_constant_one() {
  return [](double) { return cd(1.0, 0.0); };
}
CircleFunction circle_identity() {
  return [](double t) { return std::polar(1.0, t); };
}
CircleFunction circle_square() {
  return [](double t) { return std::polar(1.0, 2.0 * t); };
}
CircleFunction circle_real_part() {
  return [](double t) { return cd(std::cos(t), 0.0); };
}

void check_poisson_config(const PoissonConfig& cfg) {
  if (!(cfg.r > 0.0 && cfg.r < 1.0)) throw ConfigError("Poisson radius must be in (0,1)");
  double needed = 64.0 / (1.0 - cfg.r);
  if (static_cast<double>(cfg.grid) < needed) {
    throw ConfigError("Poisson grid " + std::to_string(cfg.grid) +
                      " too coarse for r; need >= " + std::to_string(needed));
  }
}

cd poisson_reconstruct(const UnitaryEigensystem& es, std::size_t to, std::size_t from,
                       const CircleFunction& f, const PoissonConfig& cfg) {
  check_poisson_config(cfg);
  std::size_t n = es.size();
  if (to >= n || from >= n) throw ConfigError("Poisson probe index out of range");

  Eigen::VectorXcd weights(static_cast<Eigen::Index>(n));
  Eigen::VectorXd phases(static_cast<Eigen::Index>(n));
  bool diagonal = to == from;
  for (std::size_t k = 0; k < n; ++k) {
    auto ki = static_cast<Eigen::Index>(k);
    weights(ki) = es.vectors()(static_cast<Eigen::Index>(to), ki) *
                  std::conj(es.vectors()(static_cast<Eigen::Index>(from), ki));
    phases(ki) = std::arg(es.eigenvalues()(ki));
  }

  double r2 = cfg.r * cfg.r;
  cd acc(0.0, 0.0);
  for (int j = 0; j < cfg.grid; ++j) {
    double t = kTwoPi * j / cfg.grid;
    cd node(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      auto ki = static_cast<Eigen::Index>(k);
      double kernel = (1.0 - r2) / (1.0 - 2.0 * cfg.r * std::cos(t - phases(ki)) + r2);
      node += weights(ki) * kernel;
    }
    cd fv = f(t);
    if (cfg.check_positivity && diagonal) {
      // On the diagonal the spectral weights are |Q|^2 >= 0, so the smoothed
      // density must be nonnegative at every node.
      if (node.real() < -1e-12 || std::abs(node.imag()) > 1e-9) {
        throw SolverError("diagonal Poisson integrand went negative");
      }
    }
    acc += node * fv;
  }
  return acc / static_cast<double>(cfg.grid);
}

cd poisson_reconstruct(const WalkOperator& u, const BasisLabel& to, const BasisLabel& from,
                       const CircleFunction& f, const PoissonConfig& cfg) {
  UnitaryEigensystem es(u);
  return poisson_reconstruct(es, u.cols().index_of(to), u.cols().index_of(from), f, cfg);
}

cd poisson_reconstruct_resolvent(const Eigen::MatrixXcd& u, std::size_t to, std::size_t from,
                                 const CircleFunction& f, const PoissonConfig& cfg) {
  if (!(cfg.r > 0.0 && cfg.r < 1.0)) throw ConfigError("Poisson radius must be in (0,1)");
  Eigen::Index n = u.rows();
  if (u.cols() != n) throw ConfigError("resolvent route needs a square matrix");
  if (static_cast<Eigen::Index>(to) >= n || static_cast<Eigen::Index>(from) >= n) {
    throw ConfigError("Poisson probe index out of range");
  }
  Eigen::VectorXcd e_to = Eigen::VectorXcd::Zero(n), e_from = Eigen::VectorXcd::Zero(n);
  e_to(static_cast<Eigen::Index>(to)) = 1.0;
  e_from(static_cast<Eigen::Index>(from)) = 1.0;

  double r2 = cfg.r * cfg.r;
  cd acc(0.0, 0.0);
  for (int j = 0; j < cfg.grid; ++j) {
    double t = kTwoPi * j / cfg.grid;
    Eigen::MatrixXcd b = u;
    b.diagonal().array() -= std::polar(cfg.r, t);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b);
    // (B^{-1} B^{-*})_{to,from} = <B^{-*} e_to, B^{-*} e_from>.
    Eigen::VectorXcd a = lu.adjoint().solve(e_to);
    Eigen::VectorXcd c = lu.adjoint().solve(e_from);
    acc += a.dot(c) * f(t);
  }
  return acc * (1.0 - r2) / static_cast<double>(cfg.grid);
}

std::vector<PoissonProbe> poisson_radius_ladder(const UnitaryEigensystem& es, std::size_t to,
                                                std::size_t from, const CircleFunction& f,
                                                cd reference, const std::vector<double>& radii,
                                                int grid) {
  std::vector<PoissonProbe> out;
  for (double r : radii) {
    PoissonConfig cfg;
    cfg.r = r;
    cfg.grid = grid;
    PoissonProbe p;
    p.r = r;
    p.reconstructed = poisson_reconstruct(es, to, from, f, cfg);
    p.reference = reference;
    p.abs_error = std::abs(p.reconstructed - reference);
    out.push_back(p);
  }
  return out;
}

GrafDiagnostic graf_diagnostic(const DisorderModel& model, const std::vector<cd>& z_grid,
                               double s, const std::vector<Coord>& x_probes, int samples,
                               std::uint64_t seed) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional exponent must be in (0,1)");
  if (z_grid.empty() || x_probes.empty()) throw ConfigError("empty Graf probe grid");
  if (samples < 2) throw ConfigError("Graf diagnostic needs >= 2 realizations");
  for (cd z : z_grid) {
    check_spectral_parameter(z);
    if (!(std::abs(z) < 1.0)) throw ConfigError("Graf diagnostic needs |z| < 1");
  }

  CoinIndex plus1(1, model.dim);
  BasisLabel origin{plus1, Site::zero(model.dim)};

  // Sites whose fractional moments feed some probe's neighbourhood sum.
  std::vector<Coord> sites;
  for (Coord x : x_probes) {
    for (Coord m = x - 4; m <= x + 4; ++m) sites.push_back(m);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  std::size_t nz = z_grid.size(), nx = x_probes.size(), ns = sites.size();
  int two_d = 2 * model.dim;
  // mean_sq[z][x]: E|G|^2 at the probes; mean_frac[z][site*coins+c]: E|G|^s.
  std::vector<std::vector<double>> mean_sq(nz, std::vector<double>(nx, 0.0));
  std::vector<std::vector<double>> mean_frac(
      nz, std::vector<double>(ns * static_cast<std::size_t>(two_d), 0.0));

  struct Slot {
    std::vector<std::vector<double>> sq, frac;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t rlz) {
    Slot& slot = slots[rlz];
    slot.sq.assign(nz, std::vector<double>(nx, 0.0));
    slot.frac.assign(nz, std::vector<double>(ns * static_cast<std::size_t>(two_d), 0.0));
    WalkOperator u = model.restriction(substream_seed(seed, rlz));
    std::size_t from = u.cols().index_of(origin);
    for (std::size_t zi = 0; zi < nz; ++zi) {
      GreenSolver solver(u, z_grid[zi]);
      Eigen::VectorXcd col = solver.column(from);
      for (std::size_t pi = 0; pi < nx; ++pi) {
        Site x = Site::zero(model.dim);
        x[0] = x_probes[pi];
        std::size_t xi = u.cols().index_of(BasisLabel{plus1, x});
        slot.sq[zi][pi] += std::norm(col(static_cast<Eigen::Index>(xi)));
      }
      for (std::size_t si = 0; si < ns; ++si) {
        Site m = Site::zero(model.dim);
        m[0] = sites[si];
        for (int c = 0; c < two_d; ++c) {
          auto idx = u.cols().find(BasisLabel{CoinIndex::from_ord(c, model.dim), m});
          if (!idx) continue;
          slot.frac[zi][si * static_cast<std::size_t>(two_d) + static_cast<std::size_t>(c)] +=
              std::pow(std::abs(col(static_cast<Eigen::Index>(*idx))), s);
        }
      }
    }
  });
  for (const Slot& slot : slots) {
    for (std::size_t zi = 0; zi < nz; ++zi) {
      for (std::size_t pi = 0; pi < nx; ++pi) mean_sq[zi][pi] += slot.sq[zi][pi];
      for (std::size_t fi = 0; fi < mean_frac[zi].size(); ++fi) {
        mean_frac[zi][fi] += slot.frac[zi][fi];
      }
    }
  }
  for (auto& row : mean_sq) {
    for (double& v : row) v /= samples;
  }
  for (auto& row : mean_frac) {
    for (double& v : row) v /= samples;
  }

  auto site_pos = [&](Coord m) {
    return static_cast<std::size_t>(std::lower_bound(sites.begin(), sites.end(), m) -
                                    sites.begin());
  };

  GrafDiagnostic out;
  out.s = s;
  for (std::size_t pi = 0; pi < nx; ++pi) {
    double rhs = 0.0;
    for (Coord m = x_probes[pi] - 4; m <= x_probes[pi] + 4; ++m) {
      std::size_t si = site_pos(m);
      for (int c = 0; c < two_d; ++c) {
        double best = 0.0;
        for (std::size_t zi = 0; zi < nz; ++zi) {
          best = std::max(best,
                          mean_frac[zi][si * static_cast<std::size_t>(two_d) +
                                        static_cast<std::size_t>(c)]);
        }
        rhs += best;
      }
    }
    for (std::size_t zi = 0; zi < nz; ++zi) {
      GrafSample smp;
      smp.z = z_grid[zi];
      smp.x = x_probes[pi];
      smp.lhs = (1.0 - std::norm(z_grid[zi])) * mean_sq[zi][pi];
      smp.rhs = rhs;
      // Both sides vanish together for fully decoupled models (permutation
      // coin, off-orbit probes); only an unmatched left side is an error.
      if (!(rhs > 0) && smp.lhs > 0) throw SolverError("Graf neighbourhood sum vanished");
      smp.ratio = rhs > 0 ? smp.lhs / rhs : 0.0;
      out.fitted_k = std::max(out.fitted_k, smp.ratio);
      out.samples.push_back(smp);
    }
  }
  return out;
}

ConditionalMomentResult conditional_moment_check(const DisorderModel& model, cd z, double s,
                                                const BasisLabel& row_a, const BasisLabel& row_b,
                                                const BasisLabel& to, const BasisLabel& from,
                                                std::uint64_t background_seed, int n) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional exponent must be in (0,1)");
  if (n < 4) throw ConfigError("quadrature needs n >= 4 nodes per axis");
  if (row_a == row_b) throw ConfigError("the two distinguished phases must differ");
  check_spectral_parameter(z);

  PhaseField omega = model.phases(background_seed);
  WalkOperator u = invariant_restriction(
                       build_collared(model.coin, model.pi, omega, model.L), model.L)
                       .inside;
  const LabelBasis& basis = u.cols();
  Eigen::Index ia = static_cast<Eigen::Index>(basis.index_of(row_a));
  Eigen::Index ib = static_cast<Eigen::Index>(basis.index_of(row_b));
  Eigen::Index ito = static_cast<Eigen::Index>(basis.index_of(to));
  Eigen::Index ifrom = static_cast<Eigen::Index>(basis.index_of(from));

  // Strip the sampled draws of the two distinguished phases, leaving the
  // background conditioned and those two rows phase-free.
  Eigen::MatrixXcd base = u.dense();
  base.row(ia) *= std::polar(1.0, -omega.at(row_a.coin, row_a.site));
  base.row(ib) *= std::polar(1.0, -omega.at(row_b.coin, row_b.site));

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(base.rows());
  rhs(ifrom) = 1.0;

  auto quadrature = [&](double offset) {
    double acc = 0.0;
    double mx = 0.0, mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double t1 = kTwoPi * (i + offset) / n;
      for (int j = 0; j < n; ++j) {
        double t2 = kTwoPi * (j + offset) / n;
        Eigen::MatrixXcd b = base;
        b.row(ia) *= std::polar(1.0, t1);
        b.row(ib) *= std::polar(1.0, t2);
        b.diagonal().array() -= z;
        Eigen::VectorXcd w = Eigen::PartialPivLU<Eigen::MatrixXcd>(b).solve(rhs);
        double v = std::pow(std::abs(w(ito)), s);
        acc += v;
        mx = std::max(mx, v);
        mn = std::min(mn, v);
      }
    }
    return std::tuple<double, double, double>(acc / (static_cast<double>(n) * n), mx, mn);
  };

  ConditionalMomentResult out;
  out.s = s;
  out.nodes_per_axis = n;
  auto [mean_mid, mx, mn] = quadrature(0.5);
  out.quad_mean = mean_mid;
  out.max_node = mx;
  out.min_node = mn;
  auto [mean_shift, mx2, mn2] = quadrature(0.0);
  out.quad_shifted = mean_shift;
  out.max_node = std::max(out.max_node, mx2);
  out.min_node = std::min(out.min_node, mn2);
  return out;
}

}  // namespace rqwalk
