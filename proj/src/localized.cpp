#include "rqwalk/localized.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace rqwalk {

BasisLabel Orbit::canonical() const {
  const BasisLabel* best = &members.front();
  for (const BasisLabel& m : members) {
    if (m.site < best->site ||
        (m.site == best->site && m.coin.ord() < best->coin.ord())) {
      best = &m;
    }
  }
  return *best;
}

Orbit orbit(const CoinPermutation& pi, const BasisLabel& seed) {
  if (!pi.is_full_cycle()) {
    throw ConfigError("orbit structure requires a full-cycle permutation");
  }
  if (pi.dim() != seed.coin.dim()) throw ConfigError("orbit dimension mismatch");
  int n = 2 * pi.dim();
  Orbit o;
  o.members.reserve(static_cast<std::size_t>(n));
  o.members.push_back(seed);
  CoinIndex tau = seed.coin;
  Site x = seed.site;
  for (int k = 1; k < n; ++k) {
    tau = pi.apply(tau);
    x = x + jump(tau);
    o.members.push_back(BasisLabel{tau, x});
  }
  // One more step must close the loop; the full-cycle jump sum vanishes.
  tau = pi.apply(tau);
  x = x + jump(tau);
  if (!(BasisLabel{tau, x} == seed)) {
    throw SolverError("orbit failed to close after 2d steps");
  }
  return o;
}

double alpha_phase(const Orbit& o, const PhaseField& omega) {
  double a = 0.0;
  for (const BasisLabel& m : o.members) a += omega.at(m.coin, m.site);
  return a;
}

std::vector<cd> orbit_spectrum(double alpha, int dim) {
  int n = 2 * checked_dim(dim);
  std::vector<cd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    double theta = (alpha + 2.0 * std::numbers::pi * m) / n;
    out.push_back(std::polar(1.0, theta));
  }
  return out;
}

std::vector<Orbit> restriction_orbits(const CoinPermutation& pi, Coord L) {
  if (L < 0) throw ConfigError("cube radius must be >= 0");
  int d = pi.dim();
  std::unordered_set<std::uint64_t> seen;
  std::vector<Orbit> out;
  // Orbits meeting the cube have canonical members within |x| <= L+1.
  for (const Site& x : cube_sites(d, L + 1)) {
    for (int t = 0; t < 2 * d; ++t) {
      BasisLabel seed{CoinIndex::from_ord(t, d), x};
      std::uint64_t key = (seed.site.key() << 3) | static_cast<std::uint64_t>(t);
      if (seen.count(key)) continue;
      Orbit o = orbit(pi, seed);
      bool meets_cube = false;
      for (const BasisLabel& m : o.members) {
        if (sup_norm(m.site) <= L) meets_cube = true;
      }
      for (const BasisLabel& m : o.members) {
        seen.insert((m.site.key() << 3) | static_cast<std::uint64_t>(m.coin.ord()));
      }
      if (meets_cube) out.push_back(std::move(o));
    }
  }
  return out;
}

std::vector<cd> restriction_spectrum_exact(const CoinPermutation& pi, const PhaseField& omega,
                                           Coord L) {
  std::vector<cd> spec;
  for (const Orbit& o : restriction_orbits(pi, L)) {
    double alpha = alpha_phase(o, omega);
    for (cd lambda : orbit_spectrum(alpha, pi.dim())) spec.push_back(lambda);
  }
  std::sort(spec.begin(), spec.end(),
            [](cd a, cd b) { return std::arg(a) < std::arg(b); });
  return spec;
}

double spectral_distance(const std::vector<cd>& spectrum, cd z) {
  double best = std::numeric_limits<double>::infinity();
  for (cd lambda : spectrum) best = std::min(best, std::abs(lambda - z));
  return best;
}

}  // namespace rqwalk
