#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rqwalk/errors.hpp"

namespace rqwalk {

using Coord = std::int32_t;

// Spatial dimensions supported at runtime.  Three is the ceiling because the
// finite windows a workstation can hold shrink fast with d.
inline constexpr int kMaxDim = 3;

// Coordinates are kept small enough to pack a site into a 64-bit key.
inline constexpr Coord kMaxCoord = 32000;

int checked_dim(int d);

// Internal coin degree of freedom, labelled +1,-1,+2,-2,...,+d,-d.  The sign
// picks the direction of motion along axis |value|.
class CoinIndex {
 public:
  CoinIndex(int value, int dim);

  int value() const { return value_; }
  int dim() const { return dim_; }
  int axis() const { return value_ > 0 ? value_ : -value_; }  // 1-based
  int sign() const { return value_ > 0 ? +1 : -1; }

  // Position in the fixed matrix ordering (+1,-1,+2,-2,...): 0..2d-1.
  int ord() const { return 2 * (axis() - 1) + (value_ > 0 ? 0 : 1); }
  static CoinIndex from_ord(int ord, int dim);

  friend bool operator==(const CoinIndex& a, const CoinIndex& b) {
    return a.value_ == b.value_ && a.dim_ == b.dim_;
  }
  friend bool operator!=(const CoinIndex& a, const CoinIndex& b) { return !(a == b); }

 private:
  int value_;
  int dim_;
};

// Lattice point in Z^d, d <= kMaxDim.
class Site {
 public:
  explicit Site(const std::vector<Coord>& coords);
  Site(std::initializer_list<Coord> coords);
  static Site zero(int dim);

  int dim() const { return dim_; }
  Coord operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;

  // Packs all coordinates into one word; unique for |coord| <= kMaxCoord.
  std::uint64_t key() const;

  std::string str() const;

  friend bool operator==(const Site& a, const Site& b);
  friend bool operator!=(const Site& a, const Site& b) { return !(a == b); }
  friend bool operator<(const Site& a, const Site& b);  // lexicographic

 private:
  Site() : c_{}, dim_(0) {}
  std::array<Coord, kMaxDim> c_;
  int dim_;
};

struct BasisLabel {
  CoinIndex coin;
  Site site;

  friend bool operator==(const BasisLabel& a, const BasisLabel& b) {
    return a.coin == b.coin && a.site == b.site;
  }
  std::string str() const;
};

// Displacement the walk takes when the coin shows tau: sign(tau) * e_{|tau|}.
Site jump(const CoinIndex& tau);

Coord sup_norm(const Site& x);

// All sites with sup_norm <= L, in lexicographic order.
std::vector<Site> cube_sites(int d, Coord L);

// Wraps each coordinate into [-M, M] (period 2M+1 per axis).
Site wrap_into_cube(const Site& x, Coord M);

// An ordered finite set of sites with O(1) membership lookup.  Flat basis
// indices run site-major: index = site_position * 2d + coin.ord().
class Region {
 public:
  Region(int dim, std::vector<Site> sites);
  static Region cube(int dim, Coord L);

  int dim() const { return dim_; }
  std::size_t num_sites() const { return sites_.size(); }
  std::size_t basis_size() const { return sites_.size() * 2 * static_cast<std::size_t>(dim_); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(std::size_t i) const { return sites_[i]; }

  std::optional<std::size_t> site_index(const Site& x) const;
  bool contains(const Site& x) const { return site_index(x).has_value(); }

  std::size_t flat_index(const BasisLabel& label) const;  // throws ConfigError if absent
  std::optional<std::size_t> try_flat_index(const BasisLabel& label) const;
  BasisLabel label_at(std::size_t flat) const;

  std::vector<BasisLabel> labels() const;

 private:
  int dim_;
  std::vector<Site> sites_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

}  // namespace rqwalk
