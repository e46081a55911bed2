#include <doctest/doctest.h>

#include <set>

#include "rqwalk/errors.hpp"
#include "rqwalk/lattice.hpp"

using namespace rqwalk;

TEST_CASE("jump displaces one step along the coin axis") {
  CHECK(jump(CoinIndex(1, 2)) == Site({1, 0}));
  CHECK(jump(CoinIndex(-2, 2)) == Site({0, -1}));
  CHECK(jump(CoinIndex(-1, 1)) == Site({-1}));
}

TEST_CASE("jump of opposite coin indices cancels") {
  for (int d = 1; d <= 3; ++d) {
    Site total = Site::zero(d);
    for (int a = 1; a <= d; ++a) {
      for (int sign : {+1, -1}) {
        int tau = sign * a;
        CHECK(jump(CoinIndex(tau, d)) + jump(CoinIndex(-tau, d)) == Site::zero(d));
        total = total + jump(CoinIndex(tau, d));
      }
    }
    CHECK(total == Site::zero(d));
  }
}

TEST_CASE("sup_norm") {
  CHECK(sup_norm(Site({0, 0})) == 0);
  CHECK(sup_norm(Site({3, -5})) == 5);
  CHECK(sup_norm(Site({-2})) == 2);
}

TEST_CASE("coin index ordering and bounds") {
  CHECK(CoinIndex(1, 2).ord() == 0);
  CHECK(CoinIndex(-1, 2).ord() == 1);
  CHECK(CoinIndex(2, 2).ord() == 2);
  CHECK(CoinIndex(-2, 2).ord() == 3);
  for (int o = 0; o < 6; ++o) CHECK(CoinIndex::from_ord(o, 3).ord() == o);
  CHECK_THROWS_AS(CoinIndex(0, 2), ConfigError);
  CHECK_THROWS_AS(CoinIndex(3, 2), ConfigError);
  CHECK_THROWS_AS(checked_dim(4), ConfigError);
  CHECK_THROWS_AS(checked_dim(0), ConfigError);
}

TEST_CASE("cube_sites enumerates the sup-norm ball") {
  auto line = cube_sites(1, 1);
  REQUIRE(line.size() == 3);
  CHECK(line[0] == Site({-1}));
  CHECK(line[1] == Site({0}));
  CHECK(line[2] == Site({1}));

  CHECK(cube_sites(2, 1).size() == 9);
  auto single = cube_sites(1, 0);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Site({0}));

  for (int d = 1; d <= 3; ++d) {
    for (Coord L = 0; L <= 3; ++L) {
      auto sites = cube_sites(d, L);
      std::size_t expect = 1;
      for (int i = 0; i < d; ++i) expect *= static_cast<std::size_t>(2 * L + 1);
      CHECK(sites.size() == expect);
      std::set<std::uint64_t> seen;
      for (const Site& s : sites) {
        CHECK(sup_norm(s) <= L);
        seen.insert(s.key());
      }
      CHECK(seen.size() == sites.size());
      CHECK(std::is_sorted(sites.begin(), sites.end()));
    }
  }
}

TEST_CASE("flat_index is a bijection over the region") {
  Region region(1, cube_sites(1, 2));
  std::set<std::size_t> hit;
  for (const Site& s : region.sites()) {
    for (int o = 0; o < 2; ++o) {
      BasisLabel label{CoinIndex::from_ord(o, 1), s};
      std::size_t idx = region.flat_index(label);
      CHECK(region.label_at(idx) == label);
      hit.insert(idx);
    }
  }
  CHECK(hit.size() == 2 * region.sites().size());
  CHECK(*hit.begin() == 0);
  CHECK(*hit.rbegin() == hit.size() - 1);

  BasisLabel first{CoinIndex(1, 1), region.sites().front()};
  CHECK(region.flat_index(first) == 0);

  BasisLabel outside{CoinIndex(1, 1), Site({7})};
  CHECK_THROWS_AS(region.flat_index(outside), ConfigError);
  CHECK_FALSE(region.try_flat_index(outside).has_value());
}

TEST_CASE("wrap_into_cube folds onto the torus") {
  CHECK(wrap_into_cube(Site({5}), 2) == Site({0}));
  CHECK(wrap_into_cube(Site({3}), 2) == Site({-2}));
  CHECK(wrap_into_cube(Site({-3}), 2) == Site({2}));
  for (Coord x = -9; x <= 9; ++x) {
    Site w = wrap_into_cube(Site({x}), 3);
    CHECK(sup_norm(w) <= 3);
    CHECK((w[0] - x) % 7 == 0);
  }
}

TEST_CASE("region rejects duplicate sites") {
  std::vector<Site> twice{Site({0}), Site({1}), Site({0})};
  CHECK_THROWS_AS(Region(1, twice), ConfigError);
}
