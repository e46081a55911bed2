#pragma once

#include <vector>

#include "rqwalk/coin.hpp"
#include "rqwalk/lattice.hpp"

namespace rqwalk {

// Closed trajectory of the permutation-coin walk through coin/site space.
// members[0] is the seed; member k+1 = (pi(tau_k), x_k + jump(pi(tau_k))).
// For a full cycle the trajectory closes after 2d steps and every visited
// site stays within sup-distance 1 of the seed site.
struct Orbit {
  std::vector<BasisLabel> members;

  int dim() const { return members.front().coin.dim(); }
  // Smallest member under (site lex, coin ord); identifies the orbit.
  BasisLabel canonical() const;
};

Orbit orbit(const CoinPermutation& pi, const BasisLabel& seed);

// Total phase picked up around the orbit: sum of omega^{tau_k}_{x_k}.
double alpha_phase(const Orbit& o, const PhaseField& omega);

// The 2d eigenvalues contributed by one orbit with accumulated phase alpha:
// exp(i(alpha + 2 pi m)/2d), m = 0..2d-1.
std::vector<cd> orbit_spectrum(double alpha, int dim);

// All orbits meeting the cube |x| <= L, each listed once.  Their members are
// exactly the labels of the invariant block of the collared walk.
std::vector<Orbit> restriction_orbits(const CoinPermutation& pi, Coord L);

// Exact spectrum of the finite-volume permutation-coin walk: the union of
// orbit spectra over restriction_orbits, sorted by argument.
std::vector<cd> restriction_spectrum_exact(const CoinPermutation& pi, const PhaseField& omega,
                                           Coord L);

// Smallest |lambda - z| over a spectrum.
double spectral_distance(const std::vector<cd>& spectrum, cd z);

}  // namespace rqwalk
