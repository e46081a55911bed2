#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rqwalk/coin.hpp"
#include "rqwalk/lattice.hpp"

namespace rqwalk {

// Ordered basis of (coin, site) labels with O(1) lookup.  Full regions list
// labels site-major (site position * 2d + coin ord); restricted operators may
// carry an arbitrary label subset.
class LabelBasis {
 public:
  static LabelBasis from_region(const Region& region);
  static LabelBasis from_labels(int dim, std::vector<BasisLabel> labels);

  int dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  const BasisLabel& at(std::size_t i) const { return labels_[i]; }
  const std::vector<BasisLabel>& labels() const { return labels_; }
  std::optional<std::size_t> find(const BasisLabel& label) const;
  std::size_t index_of(const BasisLabel& label) const;  // throws ConfigError

  bool same_labels(const LabelBasis& o) const;

 private:
  LabelBasis(int dim, std::vector<BasisLabel> labels);
  int dim_;
  std::vector<BasisLabel> labels_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

struct WalkMeta {
  int dim = 0;
  std::string kind;       // "bulk", "collared", "restriction", "complement"
  Coord L = -1;           // collar radius when applicable
  bool has_phases = false;
  std::uint64_t phase_seed = 0;
};

// Sparse one-step operator in a fixed label basis.  Columns span the domain
// basis, rows the range basis; the two coincide for the square constructions.
class WalkOperator {
 public:
  WalkOperator(LabelBasis rows, LabelBasis cols, Eigen::SparseMatrix<cd> mat, WalkMeta meta);

  const LabelBasis& rows() const { return rows_; }
  const LabelBasis& cols() const { return cols_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return cols_.size(); }
  bool square() const { return square_; }
  const WalkMeta& meta() const { return meta_; }

  const Eigen::SparseMatrix<cd>& sparse() const { return mat_; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat_); }
  cd element(const BasisLabel& to, const BasisLabel& from) const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const;

  // ||U^* U - I||: _fro is a cheap certified upper bound on the operator norm,
  // _op the exact operator norm (dense, for modest dimensions).
  double isometry_defect_fro() const;
  double isometry_defect_op() const;

  // Text COO dump: "rows cols nnz" header line, then "row col re im".
  void write_coo(std::ostream& os) const;

 private:
  LabelBasis rows_, cols_;
  Eigen::SparseMatrix<cd> mat_;  // rows x cols, compressed
  WalkMeta meta_;
  bool square_;
};

// One step of the walk on a finite window: columns over `region`, rows over
// region plus the one-step halo (sorted lexicographically).  Entries follow
// U|sigma,y> = sum_tau exp(i w^tau_{y+jump(tau)}) C_{tau,sigma} |tau, y+jump(tau)>.
WalkOperator build_bulk(const CoinMatrix& c, const PhaseField& omega, const Region& region);
WalkOperator build_bulk(const CoinMatrix& c, const Region& region);  // phases identically 0

// Square walk on the discrete torus of half-extent M per axis (period 2M+1),
// with the coin C everywhere and optional phases.  Exactly unitary.
WalkOperator build_torus(const CoinMatrix& c, const PhaseField& omega, Coord M);

// Collared operator: coin C on |x| <= L-2, the trapping permutation coin on
// the shells L-1 <= |x| <= L+1, realized on the torus of half-extent L+2.
// Orbits of the collar coin have spatial diameter 1, so states launched from
// |x| <= L never reach the wrap ring: the cube block equals its infinite-
// volume counterpart while the whole matrix stays exactly unitary.
WalkOperator build_collared(const CoinMatrix& c, const CoinPermutation& pi,
                            const PhaseField& omega, Coord L);
WalkOperator build_collared(const CoinMatrix& c, const CoinPermutation& pi, Coord L);

struct InvariantSplit {
  WalkOperator inside;      // block generated by the cube |x| <= L
  WalkOperator complement;  // everything else
  std::vector<std::size_t> inside_indices;      // into the parent basis
  std::vector<std::size_t> complement_indices;
};

// Splits a square operator into the invariant block generated by all labels
// with sup_norm(site) <= L and its complement.  The block is found by closing
// the label set under the sparsity graph in both directions; any coupling
// between the two parts is an error.  For collared operators the block stays
// within |x| <= L+1.
InvariantSplit invariant_restriction(const WalkOperator& u, Coord L);

// Ensemble descriptor: coin + collar permutation + phase law at a given size.
struct DisorderModel {
  int dim;
  Coord L;
  CoinMatrix coin;
  CoinPermutation pi;
  PhaseDistribution phase_dist;

  PhaseField phases(std::uint64_t realization_seed) const;
  WalkOperator collared(std::uint64_t realization_seed) const;
  // The physical finite-volume operator: invariant block of the collared walk.
  WalkOperator restriction(std::uint64_t realization_seed) const;
};

}  // namespace rqwalk
