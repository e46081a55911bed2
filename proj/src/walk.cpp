#include "rqwalk/walk.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <ostream>
#include <set>

namespace rqwalk {

namespace {
std::uint64_t label_key(const BasisLabel& l) {
  return (l.site.key() << 3) | static_cast<std::uint64_t>(l.coin.ord());
}
}  // namespace

LabelBasis::LabelBasis(int dim, std::vector<BasisLabel> labels)
    : dim_(checked_dim(dim)), labels_(std::move(labels)) {
  lookup_.reserve(labels_.size() * 2);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const BasisLabel& l = labels_[i];
    if (l.coin.dim() != dim_ || l.site.dim() != dim_) {
      throw ConfigError("label dimension mismatch in basis");
    }
    auto [it, fresh] = lookup_.emplace(label_key(l), i);
    if (!fresh) throw ConfigError("duplicate label in basis: " + l.str());
  }
}

LabelBasis LabelBasis::from_region(const Region& region) {
  return LabelBasis(region.dim(), region.labels());
}

LabelBasis LabelBasis::from_labels(int dim, std::vector<BasisLabel> labels) {
  return LabelBasis(dim, std::move(labels));
}

std::optional<std::size_t> LabelBasis::find(const BasisLabel& label) const {
  if (label.coin.dim() != dim_ || label.site.dim() != dim_) return std::nullopt;
  auto it = lookup_.find(label_key(label));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelBasis::index_of(const BasisLabel& label) const {
  auto i = find(label);
  if (!i) throw ConfigError("label " + label.str() + " not in basis");
  return *i;
}

bool LabelBasis::same_labels(const LabelBasis& o) const {
  if (dim_ != o.dim_ || labels_.size() != o.labels_.size()) return false;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!(labels_[i] == o.labels_[i])) return false;
  }
  return true;
}

WalkOperator::WalkOperator(LabelBasis rows, LabelBasis cols, Eigen::SparseMatrix<cd> mat,
                           WalkMeta meta)
    : rows_(std::move(rows)), cols_(std::move(cols)), mat_(std::move(mat)), meta_(std::move(meta)) {
  if (static_cast<std::size_t>(mat_.rows()) != rows_.size() ||
      static_cast<std::size_t>(mat_.cols()) != cols_.size()) {
    throw ConfigError("operator shape does not match bases");
  }
  mat_.makeCompressed();
  square_ = rows_.same_labels(cols_);
}

cd WalkOperator::element(const BasisLabel& to, const BasisLabel& from) const {
  return mat_.coeff(static_cast<Eigen::Index>(rows_.index_of(to)),
                    static_cast<Eigen::Index>(cols_.index_of(from)));
}

Eigen::VectorXcd WalkOperator::apply(const Eigen::VectorXcd& x) const {
  if (static_cast<std::size_t>(x.size()) != cols_.size()) {
    throw ConfigError("vector length does not match operator domain");
  }
  return mat_ * x;
}

Eigen::VectorXcd WalkOperator::apply_adjoint(const Eigen::VectorXcd& y) const {
  if (static_cast<std::size_t>(y.size()) != rows_.size()) {
    throw ConfigError("vector length does not match operator range");
  }
  return mat_.adjoint() * y;
}

double WalkOperator::isometry_defect_fro() const {
  Eigen::SparseMatrix<cd> g = (mat_.adjoint() * mat_).pruned();
  double acc = 0.0;
  for (int k = 0; k < g.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cd>::InnerIterator it(g, k); it; ++it) {
      cd v = it.value();
      if (it.row() == it.col()) v -= 1.0;
      acc += std::norm(v);
    }
  }
  return std::sqrt(acc);
}

double WalkOperator::isometry_defect_op() const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd(mat_).adjoint() * Eigen::MatrixXcd(mat_);
  g.diagonal().array() -= 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void WalkOperator::write_coo(std::ostream& os) const {
  os << mat_.rows() << ' ' << mat_.cols() << ' ' << mat_.nonZeros() << '\n';
  os << std::setprecision(17);
  for (int k = 0; k < mat_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cd>::InnerIterator it(mat_, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' '
         << it.value().imag() << '\n';
    }
  }
}

namespace {

PhaseField zero_field(int dim) {
  return PhaseField(dim, kMaxCoord, PhaseDistribution::zero(), 0);
}

// Shared assembly.  coin_at returns the coin used at a column's site; wrap_M
// < 0 means no wrapping (rows grow a halo), otherwise targets wrap into the
// cube |x| <= wrap_M and rows == cols.
template <typename CoinAt>
WalkOperator assemble(int dim, const Region& col_region, CoinAt&& coin_at,
                      const PhaseField& omega, Coord wrap_M, WalkMeta meta) {
  int two_d = 2 * dim;
  LabelBasis cols = LabelBasis::from_region(col_region);

  std::vector<CoinIndex> coins;
  std::vector<Site> jumps;
  for (int t = 0; t < two_d; ++t) {
    coins.push_back(CoinIndex::from_ord(t, dim));
    jumps.push_back(jump(coins.back()));
  }

  std::optional<Region> row_region;
  if (wrap_M >= 0) {
    row_region = col_region;
  } else {
    std::set<Site> sites(col_region.sites().begin(), col_region.sites().end());
    for (const Site& y : col_region.sites()) {
      for (int t = 0; t < two_d; ++t) sites.insert(y + jumps[static_cast<std::size_t>(t)]);
    }
    row_region = Region(dim, std::vector<Site>(sites.begin(), sites.end()));
  }
  LabelBasis rows = LabelBasis::from_region(*row_region);

  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(cols.size() * static_cast<std::size_t>(two_d));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const BasisLabel& from = cols.at(j);
    const Eigen::MatrixXcd& c = coin_at(from.site);
    int s = from.coin.ord();
    for (int t = 0; t < two_d; ++t) {
      cd amp = c(t, s);
      if (amp == cd(0.0, 0.0)) continue;
      Site target = from.site + jumps[static_cast<std::size_t>(t)];
      if (wrap_M >= 0) target = wrap_into_cube(target, wrap_M);
      amp *= std::exp(cd(0.0, omega.at(coins[static_cast<std::size_t>(t)], target)));
      std::size_t i = rows.index_of(BasisLabel{coins[static_cast<std::size_t>(t)], target});
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), amp);
    }
  }

  Eigen::SparseMatrix<cd> mat(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(cols.size()));
  mat.setFromTriplets(trips.begin(), trips.end());
  return WalkOperator(std::move(rows), std::move(cols), std::move(mat), std::move(meta));
}

WalkMeta make_meta(int dim, std::string kind, Coord L, const PhaseField& omega) {
  WalkMeta m;
  m.dim = dim;
  m.kind = std::move(kind);
  m.L = L;
  m.has_phases = omega.distribution().kind() != PhaseDistribution::Kind::Zero;
  m.phase_seed = omega.seed();
  return m;
}

}  // namespace

WalkOperator build_bulk(const CoinMatrix& c, const PhaseField& omega, const Region& region) {
  if (c.dim() != region.dim() || omega.dim() != region.dim()) {
    throw ConfigError("bulk build dimension mismatch");
  }
  const Eigen::MatrixXcd& m = c.matrix();
  return assemble(region.dim(), region, [&](const Site&) -> const Eigen::MatrixXcd& { return m; },
                  omega, -1, make_meta(region.dim(), "bulk", -1, omega));
}

WalkOperator build_bulk(const CoinMatrix& c, const Region& region) {
  return build_bulk(c, zero_field(region.dim()), region);
}

WalkOperator build_torus(const CoinMatrix& c, const PhaseField& omega, Coord M) {
  if (c.dim() != omega.dim()) throw ConfigError("torus build dimension mismatch");
  if (M < 1) throw ConfigError("torus half-extent must be >= 1");
  if (omega.radius() < M) throw ConfigError("phase coverage smaller than torus");
  const Eigen::MatrixXcd& m = c.matrix();
  Region region = Region::cube(c.dim(), M);
  return assemble(c.dim(), region, [&](const Site&) -> const Eigen::MatrixXcd& { return m; },
                  omega, M, make_meta(c.dim(), "torus", -1, omega));
}

WalkOperator build_collared(const CoinMatrix& c, const CoinPermutation& pi,
                            const PhaseField& omega, Coord L) {
  int dim = c.dim();
  if (pi.dim() != dim || omega.dim() != dim) throw ConfigError("collared build dimension mismatch");
  if (L < 3) throw ConfigError("collar radius must be >= 3");
  if (!pi.is_full_cycle()) {
    throw ConfigError("collar permutation must be a full cycle over the 2d coin labels");
  }
  Coord M = L + 2;
  if (omega.radius() < M) throw ConfigError("phase coverage smaller than collared window");

  const Eigen::MatrixXcd& bulk = c.matrix();
  const Eigen::MatrixXcd trap = permutation_coin(pi).matrix();
  Region region = Region::cube(dim, M);
  auto coin_at = [&, L](const Site& x) -> const Eigen::MatrixXcd& {
    Coord n = sup_norm(x);
    return (n >= L - 1 && n <= L + 1) ? trap : bulk;
  };
  return assemble(dim, region, coin_at, omega, M, make_meta(dim, "collared", L, omega));
}

WalkOperator build_collared(const CoinMatrix& c, const CoinPermutation& pi, Coord L) {
  return build_collared(c, pi, zero_field(c.dim()), L);
}

InvariantSplit invariant_restriction(const WalkOperator& u, Coord L) {
  if (!u.square()) throw ConfigError("invariant restriction needs a square operator");
  const Eigen::SparseMatrix<cd>& a = u.sparse();
  std::size_t n = u.num_cols();

  // Row-wise pattern, so the closure can walk the graph in both directions.
  std::vector<std::vector<std::uint32_t>> cols_of_row(n);
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cd>::InnerIterator it(a, k); it; ++it) {
      cols_of_row[static_cast<std::size_t>(it.row())].push_back(static_cast<std::uint32_t>(it.col()));
    }
  }

  std::vector<char> in(n, 0);
  std::deque<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    if (sup_norm(u.cols().at(i).site) <= L) {
      in[i] = 1;
      work.push_back(i);
    }
  }
  if (work.empty()) throw ConfigError("no labels inside |x| <= L");

  while (!work.empty()) {
    std::size_t j = work.front();
    work.pop_front();
    for (Eigen::SparseMatrix<cd>::InnerIterator it(a, static_cast<int>(j)); it; ++it) {
      std::size_t i = static_cast<std::size_t>(it.row());
      if (!in[i]) {
        in[i] = 1;
        work.push_back(i);
      }
    }
    for (std::uint32_t c : cols_of_row[j]) {
      if (!in[c]) {
        in[c] = 1;
        work.push_back(c);
      }
    }
  }

  std::vector<std::size_t> inside_idx, comp_idx;
  std::vector<int> new_pos(n, -1);
  std::vector<BasisLabel> inside_labels, comp_labels;
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i]) {
      new_pos[i] = static_cast<int>(inside_idx.size());
      inside_idx.push_back(i);
      inside_labels.push_back(u.cols().at(i));
    } else {
      new_pos[i] = static_cast<int>(comp_idx.size());
      comp_idx.push_back(i);
      comp_labels.push_back(u.cols().at(i));
    }
  }

  std::vector<Eigen::Triplet<cd>> t_in, t_comp;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cd>::InnerIterator it(a, k); it; ++it) {
      std::size_t r = static_cast<std::size_t>(it.row());
      std::size_t c = static_cast<std::size_t>(it.col());
      if (in[r] != in[c]) {
        throw SolverError("closure left a coupling between block and complement");
      }
      auto& sink = in[r] ? t_in : t_comp;
      sink.emplace_back(new_pos[r], new_pos[c], it.value());
    }
  }

  auto build_block = [&](std::vector<BasisLabel>& labels, std::vector<Eigen::Triplet<cd>>& trips,
                         const char* kind) {
    Eigen::SparseMatrix<cd> m(static_cast<Eigen::Index>(labels.size()),
                              static_cast<Eigen::Index>(labels.size()));
    m.setFromTriplets(trips.begin(), trips.end());
    WalkMeta meta = u.meta();
    meta.kind = kind;
    meta.L = L;
    LabelBasis basis = LabelBasis::from_labels(u.cols().dim(), labels);
    return WalkOperator(basis, basis, std::move(m), std::move(meta));
  };

  InvariantSplit split{build_block(inside_labels, t_in, "restriction"),
                       build_block(comp_labels, t_comp, "complement"),
                       std::move(inside_idx), std::move(comp_idx)};
  return split;
}

PhaseField DisorderModel::phases(std::uint64_t realization_seed) const {
  return PhaseField(dim, L + 3, phase_dist, realization_seed);
}

WalkOperator DisorderModel::collared(std::uint64_t realization_seed) const {
  return build_collared(coin, pi, phases(realization_seed), L);
}

WalkOperator DisorderModel::restriction(std::uint64_t realization_seed) const {
  return invariant_restriction(collared(realization_seed), L).inside;
}

}  // namespace rqwalk
