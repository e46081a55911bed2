#include "rqwalk/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rqwalk/localized.hpp"
#include "rqwalk/parallel.hpp"
#include "rqwalk/rng.hpp"

namespace rqwalk {

void check_spectral_parameter(cd z) {
  double gap = std::abs(std::abs(z) - 1.0);
  if (gap < kMinCircleGap) {
    throw ConfigError("spectral parameter too close to the unit circle: |z| = " +
                      std::to_string(std::abs(z)));
  }
}

GreenSolver::GreenSolver(const WalkOperator& u, cd z) : z_(z) {
  if (!u.square()) throw ConfigError("Green function needs a square operator");
  check_spectral_parameter(z);
  basis_ = std::make_shared<LabelBasis>(u.cols());
  a_ = u.sparse();
  for (Eigen::Index i = 0; i < a_.rows(); ++i) a_.coeffRef(i, i) -= z;
  a_.makeCompressed();

  dense_route_ = basis_->size() <= kDenseCutoff;
  if (dense_route_) {
    dense_lu_.compute(Eigen::MatrixXcd(a_));
  } else {
    sparse_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cd>>>();
    sparse_lu_->compute(a_);
    if (sparse_lu_->info() != Eigen::Success) {
      throw SolverError("sparse factorization of (U - z) failed");
    }
  }
}

Eigen::VectorXcd GreenSolver::solve_refined(const Eigen::VectorXcd& rhs) const {
  auto solve = [&](const Eigen::VectorXcd& b) -> Eigen::VectorXcd {
    if (dense_route_) return dense_lu_.solve(b);
    return sparse_lu_->solve(b);
  };
  Eigen::VectorXcd w = solve(rhs);
  double target = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    Eigen::VectorXcd r = rhs - a_ * w;
    last_residual_ = r.norm();
    target = kGreenResidualTol * std::max(rhs.norm(), w.norm());
    if (last_residual_ <= target) return w;
    w += solve(r);
  }
  Eigen::VectorXcd r = rhs - a_ * w;
  last_residual_ = r.norm();
  if (last_residual_ <= target) return w;
  throw SolverError("Green solve residual " + std::to_string(last_residual_) +
                    " above tolerance " + std::to_string(target));
}

Eigen::VectorXcd GreenSolver::column(std::size_t from_index) const {
  if (from_index >= basis_->size()) throw ConfigError("column index out of range");
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_->size()));
  e(static_cast<Eigen::Index>(from_index)) = 1.0;
  return solve_refined(e);
}

Eigen::VectorXcd GreenSolver::column(const BasisLabel& from) const {
  return column(basis_->index_of(from));
}

cd GreenSolver::element(const BasisLabel& to, const BasisLabel& from) const {
  Eigen::VectorXcd col = column(from);
  return col(static_cast<Eigen::Index>(basis_->index_of(to)));
}

cd green(const WalkOperator& u, cd z, const BasisLabel& to, const BasisLabel& from) {
  return GreenSolver(u, z).element(to, from);
}

std::vector<cd> default_z_grid(int angles, double offset) {
  if (angles < 1) throw ConfigError("z grid needs at least one angle");
  if (!(offset >= kMinCircleGap)) throw ConfigError("z grid offset too small");
  std::vector<cd> grid;
  grid.reserve(static_cast<std::size_t>(2 * angles));
  for (double radius : {1.0 - offset, 1.0 + offset}) {
    for (int j = 0; j < angles; ++j) {
      double theta = 2.0 * std::numbers::pi * j / angles;
      grid.push_back(std::polar(radius, theta));
    }
  }
  return grid;
}

FractionalMomentSweep fractional_moment_sweep(const DisorderModel& model,
                                              const FractionalMomentConfig& cfg) {
  if (!(cfg.s > 0.0 && cfg.s < 1.0)) throw ConfigError("fractional exponent must be in (0,1)");
  if (cfg.samples < 2) throw ConfigError("sweep needs at least 2 realizations");
  Coord dmax = cfg.dist_max > 0 ? cfg.dist_max : model.L / 2;
  if (cfg.dist_min < 2) throw ConfigError("pair distance must be >= 2");
  if (dmax < cfg.dist_min) throw ConfigError("empty distance range");
  if (dmax > model.L) throw ConfigError("distance range exceeds the window");
  std::vector<cd> zs = cfg.z_grid.empty() ? default_z_grid() : cfg.z_grid;
  for (cd z : zs) check_spectral_parameter(z);

  std::size_t ndist = static_cast<std::size_t>(dmax - cfg.dist_min + 1);
  FractionalMomentSweep out;
  out.s = cfg.s;
  out.realization_profiles.reserve(static_cast<std::size_t>(cfg.samples));

  CoinIndex plus1(1, model.dim);
  BasisLabel origin{plus1, Site::zero(model.dim)};

  struct RealizationOut {
    std::vector<double> profile;
    std::vector<std::vector<double>> values;  // per distance
    std::size_t solves = 0, failures = 0;
  };
  std::vector<RealizationOut> slots(static_cast<std::size_t>(cfg.samples));

  parallel_for(static_cast<std::size_t>(cfg.samples), [&](std::size_t rlz) {
    RealizationOut& slot = slots[rlz];
    slot.values.assign(ndist, {});
    WalkOperator u = model.restriction(substream_seed(cfg.seed, rlz));
    std::size_t from = u.cols().index_of(origin);
    std::vector<double> acc(ndist, 0.0);
    std::vector<int> cnt_z(ndist, 0);
    for (cd z : zs) {
      ++slot.solves;
      Eigen::VectorXcd col;
      try {
        GreenSolver solver(u, z);
        col = solver.column(from);
      } catch (const SolverError&) {
        ++slot.failures;
        continue;
      }
      for (std::size_t k = 0; k < ndist; ++k) {
        Coord dist = cfg.dist_min + static_cast<Coord>(k);
        for (int sign : {+1, -1}) {
          Site x = Site::zero(model.dim);
          x[0] = sign * dist;
          auto idx = u.cols().find(BasisLabel{plus1, x});
          if (!idx) continue;
          double v = std::pow(std::abs(col(static_cast<Eigen::Index>(*idx))), cfg.s);
          acc[k] += v;
          ++cnt_z[k];
          slot.values[k].push_back(v);
        }
      }
    }
    slot.profile.assign(ndist, 0.0);
    for (std::size_t k = 0; k < ndist; ++k) {
      if (cnt_z[k] == 0) throw SolverError("no usable Green samples for a distance");
      slot.profile[k] = acc[k] / cnt_z[k];
    }
  });

  std::vector<std::vector<double>> samples_by_dist(ndist);
  for (auto& slot : slots) {
    out.solves += slot.solves;
    out.failures += slot.failures;
    out.realization_profiles.push_back(std::move(slot.profile));
    for (std::size_t k = 0; k < ndist; ++k) {
      samples_by_dist[k].insert(samples_by_dist[k].end(), slot.values[k].begin(),
                                slot.values[k].end());
    }
  }

  if (out.failures > cfg.max_failure_rate * static_cast<double>(out.solves)) {
    throw SolverError("Green solve failure rate " + std::to_string(out.failures) + "/" +
                      std::to_string(out.solves) + " exceeds tolerance");
  }

  for (std::size_t k = 0; k < ndist; ++k) {
    DistanceStats st;
    st.distance = cfg.dist_min + static_cast<Coord>(k);
    auto& v = samples_by_dist[k];
    st.n = v.size();
    double acc = 0;
    for (double x : v) acc += x;
    st.mean = acc / static_cast<double>(v.size());
    st.median_v = median(v);
    st.trimmed = trimmed_mean(v, 0.10);
    // Realizations are the independent units; z points within one share phases.
    double var = 0;
    for (const auto& row : out.realization_profiles) {
      double dx = row[k] - st.mean;
      var += dx * dx;
    }
    var /= static_cast<double>(out.realization_profiles.size() - 1);
    st.std_error = std::sqrt(var / static_cast<double>(out.realization_profiles.size()));
    out.per_distance.push_back(st);
  }
  return out;
}

DecayFit decay_fit(const std::vector<Coord>& distances, const std::vector<double>& means) {
  if (distances.size() != means.size()) throw ConfigError("decay fit input mismatch");
  if (distances.size() < 4) throw ConfigError("decay fit needs at least 4 distances");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(means[i] > 0)) throw ConfigError("decay fit needs positive means");
    x.push_back(static_cast<double>(distances[i]));
    y.push_back(std::log(means[i]));
  }
  LineFit f = fit_line(x, y);
  DecayFit out;
  out.gamma = -f.slope;
  out.prefactor = std::exp(f.intercept);
  out.r2 = f.r2;
  out.points = f.n;
  return out;
}

DecayFit decay_fit_with_bootstrap(const std::vector<Coord>& distances,
                                  const std::vector<std::vector<double>>& rows,
                                  int resamples, std::uint64_t seed) {
  if (rows.empty()) throw ConfigError("bootstrap decay fit needs realization rows");
  std::vector<double> means(distances.size(), 0.0);
  for (const auto& r : rows) {
    if (r.size() != distances.size()) throw ConfigError("bootstrap row length mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) means[i] += r[i];
  }
  for (double& m : means) m /= static_cast<double>(rows.size());
  DecayFit out = decay_fit(distances, means);
  std::vector<double> x;
  for (Coord d : distances) x.push_back(static_cast<double>(d));
  Interval slope_ci = bootstrap_slope_ci(x, rows, resamples, seed);
  out.gamma_ci = {-slope_ci.hi, -slope_ci.lo};
  out.has_ci = true;
  return out;
}

DecayFit decay_fit(const FractionalMomentSweep& sweep, int resamples, std::uint64_t seed) {
  std::vector<Coord> distances;
  for (const auto& st : sweep.per_distance) distances.push_back(st.distance);
  return decay_fit_with_bootstrap(distances, sweep.realization_profiles, resamples, seed);
}

double gap_probability_oracle(const CoinPermutation& pi, Coord L, double eta, double rho) {
  if (eta < 0 || eta > 2.0) throw ConfigError("eta must be in [0, 2]");
  if (!(rho > 0)) throw ConfigError("|z| must be > 0");
  int d = pi.dim();
  // |lambda - z| <= eta for |lambda| = 1, |z| = rho cuts an arc of angular
  // half-width acos((1 + rho^2 - eta^2) / (2 rho)); each orbit's eigenphase
  // comb (spacing pi/d, uniform offset) hits it independently.
  double c = (1.0 + rho * rho - eta * eta) / (2.0 * rho);
  if (c > 1.0) return 0.0;  // z too far off the circle for this eta
  double arc = 2.0 * std::acos(std::max(-1.0, c));
  double q = std::min(1.0, arc * d / std::numbers::pi);
  double orbits = static_cast<double>(restriction_orbits(pi, L).size());
  return 1.0 - std::pow(1.0 - q, orbits);
}

std::vector<GapProbePoint> spectral_gap_probe(const DisorderModel& model, cd z,
                                              const std::vector<double>& etas, int samples,
                                              std::uint64_t seed) {
  if (etas.empty()) throw ConfigError("gap probe needs at least one eta");
  if (samples < 1) throw ConfigError("gap probe needs samples >= 1");
  for (double eta : etas) {
    if (eta < 0) throw ConfigError("eta must be >= 0");
  }

  bool exact = coin_distance(model.coin, permutation_coin(model.pi)) == 0.0;
  bool uniform = model.phase_dist.kind() == PhaseDistribution::Kind::Uniform;

  std::vector<Orbit> orbits;
  if (exact) orbits = restriction_orbits(model.pi, model.L);

  std::vector<double> dists(static_cast<std::size_t>(samples), 0.0);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t rlz) {
    std::uint64_t rseed = substream_seed(seed, rlz);
    double dist;
    if (exact) {
      PhaseField omega = model.phases(rseed);
      dist = std::numeric_limits<double>::infinity();
      for (const Orbit& o : orbits) {
        double alpha = alpha_phase(o, omega);
        for (cd lambda : orbit_spectrum(alpha, model.dim)) {
          dist = std::min(dist, std::abs(lambda - z));
        }
      }
    } else {
      WalkOperator u = model.restriction(rseed);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u.dense(), false);
      dist = (es.eigenvalues().array() - z).abs().minCoeff();
    }
    dists[rlz] = dist;
  });

  std::vector<std::uint64_t> hits(etas.size(), 0);
  for (double dist : dists) {
    for (std::size_t i = 0; i < etas.size(); ++i) {
      if (dist <= etas[i]) ++hits[i];
    }
  }

  std::vector<GapProbePoint> out;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    GapProbePoint p;
    p.eta = etas[i];
    p.hits = hits[i];
    p.trials = static_cast<std::uint64_t>(samples);
    p.p_hat = static_cast<double>(hits[i]) / static_cast<double>(samples);
    p.wilson = wilson_interval(hits[i], p.trials);
    if (exact && uniform) {
      p.oracle_p = gap_probability_oracle(model.pi, model.L, etas[i], std::abs(z));
    }
    out.push_back(p);
  }
  return out;
}

UnitaryEigensystem::UnitaryEigensystem(const WalkOperator& u, double cluster_tol)
    : UnitaryEigensystem(u.dense(), cluster_tol) {}

UnitaryEigensystem::UnitaryEigensystem(const Eigen::MatrixXcd& m, double cluster_tol) {
  if (m.rows() != m.cols()) throw ConfigError("eigensystem needs a square matrix");
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m, true);
  if (schur.info() != Eigen::Success) throw SolverError("Schur decomposition failed");
  const Eigen::MatrixXcd& t = schur.matrixT();
  q_ = schur.matrixU();
  Eigen::Index n = t.rows();
  eigvals_ = t.diagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      max_offdiag_ = std::max(max_offdiag_, std::abs(t(i, j)));
    }
  }
  // A unitary matrix is normal: the strict upper triangle must be noise.
  if (max_offdiag_ > 1e-8) {
    throw SolverError("Schur form far from diagonal; operator is not normal");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::arg(eigvals_(a)) < std::arg(eigvals_(b));
  });
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (std::size_t start = 0; start < order.size(); ++start) {
    if (used[start]) continue;
    std::vector<int> cluster{order[start]};
    used[start] = 1;
    std::size_t at = start;
    // Walk forward (cyclically) while consecutive eigenvalues nearly touch.
    for (std::size_t step = 1; step < order.size(); ++step) {
      std::size_t nxt = (at + 1) % order.size();
      if (used[nxt]) break;
      if (std::abs(eigvals_(order[at]) - eigvals_(order[nxt])) > cluster_tol) break;
      cluster.push_back(order[nxt]);
      used[nxt] = 1;
      at = nxt;
    }
    clusters_.push_back(std::move(cluster));
  }
}

double UnitaryEigensystem::correlator(std::size_t xi, std::size_t yi) const {
  if (xi >= size() || yi >= size()) throw ConfigError("correlator index out of range");
  double total = 0.0;
  for (const auto& cluster : clusters_) {
    cd overlap = 0.0;
    for (int k : cluster) {
      overlap += q_(static_cast<Eigen::Index>(xi), k) * std::conj(q_(static_cast<Eigen::Index>(yi), k));
    }
    total += std::abs(overlap);
  }
  return total;
}

double eigenfunction_correlator(const UnitaryEigensystem& es, std::size_t xi, std::size_t yi) {
  return es.correlator(xi, yi);
}

CorrelatorDecay correlator_decay_experiment(const DisorderModel& model, int samples,
                                            Coord dist_min, Coord dist_max, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("correlator experiment needs >= 2 realizations");
  if (dist_min < 1 || dist_max < dist_min) throw ConfigError("bad distance range");
  if (dist_max > model.L) throw ConfigError("distance range exceeds the window");

  CorrelatorDecay out;
  for (Coord k = dist_min; k <= dist_max; ++k) out.distances.push_back(k);
  std::size_t ndist = out.distances.size();
  out.means.assign(ndist, 0.0);

  CoinIndex plus1(1, model.dim);
  BasisLabel origin{plus1, Site::zero(model.dim)};

  std::vector<std::vector<double>> rows(static_cast<std::size_t>(samples));
  std::vector<double> floors(static_cast<std::size_t>(samples), 0.0);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t rlz) {
    WalkOperator u = model.restriction(substream_seed(seed, rlz));
    UnitaryEigensystem es(u);
    floors[rlz] = es.max_offdiagonal();
    std::size_t yi = u.cols().index_of(origin);
    std::vector<double> row(ndist, 0.0);
    for (std::size_t k = 0; k < ndist; ++k) {
      double acc = 0;
      int cnt = 0;
      for (int sign : {+1, -1}) {
        Site x = Site::zero(model.dim);
        x[0] = sign * out.distances[k];
        auto xi = u.cols().find(BasisLabel{plus1, x});
        if (!xi) continue;
        acc += es.correlator(*xi, yi);
        ++cnt;
      }
      if (cnt == 0) throw SolverError("correlator pair outside the window");
      row[k] = acc / cnt;
    }
    rows[rlz] = std::move(row);
  });
  for (std::size_t rlz = 0; rlz < rows.size(); ++rlz) {
    out.noise_floor = std::max(out.noise_floor, floors[rlz]);
    for (std::size_t k = 0; k < ndist; ++k) out.means[k] += rows[rlz][k];
    out.realization_rows.push_back(std::move(rows[rlz]));
  }
  for (double& m : out.means) m /= static_cast<double>(samples);
  bool any_positive = false;
  for (double m : out.means) any_positive = any_positive || m > 0;
  if (!any_positive) {
    out.compact_support = true;  // decoupled walk: zero beyond the orbit diameter
    return out;
  }

  // Fast decay runs the means into the Schur error floor well before L/2;
  // those distances measure the eigensolver, not the walk.
  for (std::size_t k = 0; k < ndist; ++k) {
    if (out.means[k] > kCorrelatorFitFloor) out.fitted_distances.push_back(out.distances[k]);
  }
  if (out.fitted_distances.size() < 4) {
    throw SolverError("correlator means clear the noise floor at fewer than 4 distances");
  }
  std::vector<std::vector<double>> kept_rows(out.realization_rows.size());
  for (std::size_t r = 0; r < out.realization_rows.size(); ++r) {
    for (std::size_t k = 0; k < ndist; ++k) {
      if (out.means[k] > kCorrelatorFitFloor) {
        kept_rows[r].push_back(out.realization_rows[r][k]);
      }
    }
  }
  out.fit = decay_fit_with_bootstrap(out.fitted_distances, kept_rows, 400, seed ^ 0xfadeull);
  return out;
}

}  // namespace rqwalk
