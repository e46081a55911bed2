#include "rqwalk/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace rqwalk {

int checked_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw ConfigError("dimension must be in 1.." + std::to_string(kMaxDim) +
                      ", got " + std::to_string(d));
  }
  return d;
}

CoinIndex::CoinIndex(int value, int dim) : value_(value), dim_(checked_dim(dim)) {
  int a = value > 0 ? value : -value;
  if (a < 1 || a > dim) {
    throw ConfigError("coin index " + std::to_string(value) +
                      " outside +-1..+-" + std::to_string(dim));
  }
}

CoinIndex CoinIndex::from_ord(int ord, int dim) {
  checked_dim(dim);
  if (ord < 0 || ord >= 2 * dim) {
    throw ConfigError("coin ord " + std::to_string(ord) + " outside 0.." +
                      std::to_string(2 * dim - 1));
  }
  int axis = ord / 2 + 1;
  return CoinIndex(ord % 2 == 0 ? axis : -axis, dim);
}

namespace {
Coord checked_coord(Coord c) {
  if (c > kMaxCoord || c < -kMaxCoord) {
    throw ConfigError("coordinate " + std::to_string(c) + " exceeds +-" +
                      std::to_string(kMaxCoord));
  }
  return c;
}
}  // namespace

Site::Site(const std::vector<Coord>& coords) : c_{}, dim_(checked_dim(static_cast<int>(coords.size()))) {
  for (int i = 0; i < dim_; ++i) c_[static_cast<std::size_t>(i)] = checked_coord(coords[static_cast<std::size_t>(i)]);
}

Site::Site(std::initializer_list<Coord> coords) : Site(std::vector<Coord>(coords)) {}

Site Site::zero(int dim) {
  Site s;
  s.dim_ = checked_dim(dim);
  return s;
}

Site Site::operator+(const Site& o) const {
  if (dim_ != o.dim_) throw ConfigError("site dimension mismatch");
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[static_cast<std::size_t>(i)] = checked_coord(c_[static_cast<std::size_t>(i)] + o.c_[static_cast<std::size_t>(i)]);
  return r;
}

Site Site::operator-(const Site& o) const {
  if (dim_ != o.dim_) throw ConfigError("site dimension mismatch");
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[static_cast<std::size_t>(i)] = checked_coord(c_[static_cast<std::size_t>(i)] - o.c_[static_cast<std::size_t>(i)]);
  return r;
}

std::uint64_t Site::key() const {
  std::uint64_t k = 0;
  for (int i = 0; i < dim_; ++i) {
    k = (k << 17) | static_cast<std::uint64_t>(static_cast<std::uint32_t>(c_[static_cast<std::size_t>(i)] + kMaxCoord + 1) & 0x1ffffu);
  }
  return k;
}

std::string Site::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) {
    if (i) os << ',';
    os << c_[static_cast<std::size_t>(i)];
  }
  os << ')';
  return os.str();
}

bool operator==(const Site& a, const Site& b) {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i)
    if (a.c_[static_cast<std::size_t>(i)] != b.c_[static_cast<std::size_t>(i)]) return false;
  return true;
}

bool operator<(const Site& a, const Site& b) {
  if (a.dim_ != b.dim_) throw ConfigError("site dimension mismatch");
  for (int i = 0; i < a.dim_; ++i) {
    if (a.c_[static_cast<std::size_t>(i)] != b.c_[static_cast<std::size_t>(i)])
      return a.c_[static_cast<std::size_t>(i)] < b.c_[static_cast<std::size_t>(i)];
  }
  return false;
}

std::string BasisLabel::str() const {
  std::ostringstream os;
  os << (coin.value() > 0 ? "+" : "") << coin.value() << "@" << site.str();
  return os.str();
}

Site jump(const CoinIndex& tau) {
  Site e = Site::zero(tau.dim());
  e[tau.axis() - 1] = static_cast<Coord>(tau.sign());
  return e;
}

Coord sup_norm(const Site& x) {
  Coord m = 0;
  for (int i = 0; i < x.dim(); ++i) m = std::max(m, static_cast<Coord>(std::abs(x[i])));
  return m;
}

std::vector<Site> cube_sites(int d, Coord L) {
  checked_dim(d);
  if (L < 0) throw ConfigError("cube half-width must be >= 0");
  checked_coord(L);
  std::size_t side = static_cast<std::size_t>(2 * L + 1);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  std::vector<Site> out;
  out.reserve(total);
  std::vector<Coord> c(static_cast<std::size_t>(d), -L);
  for (std::size_t n = 0; n < total; ++n) {
    out.emplace_back(c);
    for (int i = d - 1; i >= 0; --i) {
      if (c[static_cast<std::size_t>(i)] < L) {
        ++c[static_cast<std::size_t>(i)];
        break;
      }
      c[static_cast<std::size_t>(i)] = -L;
    }
  }
  return out;
}

Site wrap_into_cube(const Site& x, Coord M) {
  if (M < 0) throw ConfigError("wrap radius must be >= 0");
  Coord period = 2 * M + 1;
  Site r = x;
  for (int i = 0; i < x.dim(); ++i) {
    Coord c = r[i];
    while (c > M) c -= period;
    while (c < -M) c += period;
    r[i] = c;
  }
  return r;
}

Region::Region(int dim, std::vector<Site> sites) : dim_(checked_dim(dim)), sites_(std::move(sites)) {
  lookup_.reserve(sites_.size() * 2);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i].dim() != dim_) throw ConfigError("region site dimension mismatch");
    auto [it, fresh] = lookup_.emplace(sites_[i].key(), i);
    if (!fresh) throw ConfigError("duplicate site in region: " + sites_[i].str());
  }
}

Region Region::cube(int dim, Coord L) { return Region(dim, cube_sites(dim, L)); }

std::optional<std::size_t> Region::site_index(const Site& x) const {
  if (x.dim() != dim_) return std::nullopt;
  auto it = lookup_.find(x.key());
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Region::flat_index(const BasisLabel& label) const {
  auto i = try_flat_index(label);
  if (!i) throw ConfigError("label " + label.str() + " not in region");
  return *i;
}

std::optional<std::size_t> Region::try_flat_index(const BasisLabel& label) const {
  if (label.coin.dim() != dim_) return std::nullopt;
  auto si = site_index(label.site);
  if (!si) return std::nullopt;
  return *si * 2 * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(label.coin.ord());
}

BasisLabel Region::label_at(std::size_t flat) const {
  std::size_t per = 2 * static_cast<std::size_t>(dim_);
  if (flat >= basis_size()) throw ConfigError("flat index out of range");
  return BasisLabel{CoinIndex::from_ord(static_cast<int>(flat % per), dim_), sites_[flat / per]};
}

std::vector<BasisLabel> Region::labels() const {
  std::vector<BasisLabel> out;
  out.reserve(basis_size());
  for (std::size_t i = 0; i < basis_size(); ++i) out.push_back(label_at(i));
  return out;
}

}  // namespace rqwalk
