#pragma once

#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <vector>

#include "uhm/hmatrix.hpp"

namespace uhm {

enum class Side { row, col };

/// Truncation tolerance per cluster. Either one spec for every cluster or a
/// base spec whose threshold is overridden cluster by cluster.
class ClusterTolerances {
public:
  explicit ClusterTolerances(ToleranceSpec flat) : base_(flat) {}
  ClusterTolerances(ToleranceSpec base, std::vector<double> row_eps, std::vector<double> col_eps)
      : base_(base), row_eps_(std::move(row_eps)), col_eps_(std::move(col_eps)) {}

  ToleranceSpec at(Side side, std::size_t cluster) const;
  const ToleranceSpec& base() const noexcept { return base_; }

private:
  ToleranceSpec base_;
  std::vector<double> row_eps_;
  std::vector<double> col_eps_;
};

/// How the cluster basis is extracted from the agglomeration proxy.
enum class RankRevealing {
  svd,        ///< truncated SVD, optimal ranks
  pivoted_qr, ///< column-pivoted QR stopping at the tolerance
};

/// Orthonormal basis matrices indexed by cluster id. Clusters outside L
/// have a 0 x 0 entry.
struct ClusterBasis {
  std::vector<Matrix> bases;
  std::vector<std::size_t> clusters;

  std::size_t rank(std::size_t cluster) const { return static_cast<std::size_t>(bases.at(cluster).cols()); }
  std::size_t max_rank() const;
};

/// Coefficients of one admissible block, S_b = S_X S_Y^*. When `merged`,
/// S_X holds S_b itself and S_Y is empty.
struct CoefficientPair {
  Matrix S_X;
  Matrix S_Y;
  bool merged = false;

  Matrix coupling() const { return merged ? S_X : Matrix(S_X * S_Y.adjoint()); }
};

class UniformHMatrix {
public:
  UniformHMatrix(std::shared_ptr<const BlockClusterTree> bct, ClusterBasis row_basis, ClusterBasis col_basis,
                 std::vector<CoefficientPair> coeffs, std::shared_ptr<const DenseLeaves> dense);

  const BlockClusterTree& bct() const noexcept { return *bct_; }
  std::shared_ptr<const BlockClusterTree> bct_ptr() const noexcept { return bct_; }
  std::size_t rows() const noexcept { return bct_->row_tree().size(); }
  std::size_t cols() const noexcept { return bct_->col_tree().size(); }

  const ClusterBasis& row_basis() const noexcept { return row_basis_; }
  const ClusterBasis& col_basis() const noexcept { return col_basis_; }
  const CoefficientPair& coefficients(std::size_t block) const { return coeffs_.at(block); }
  const Matrix& dense(std::size_t block) const { return dense_->at(block); }
  std::shared_ptr<const DenseLeaves> dense_leaves() const noexcept { return dense_; }

  /// U_tau S_b V_sigma^* for an admissible block.
  Matrix block_dense(std::size_t block) const;

  /// Replaces every factor pair by the product S_X S_Y^*.
  void multiply_out_coefficients();

  const std::vector<std::size_t>& row_order() const noexcept { return row_order_; }
  const std::vector<std::size_t>& col_order() const noexcept { return col_order_; }
  const std::vector<std::size_t>& dense_order() const noexcept { return dense_order_; }

private:
  std::shared_ptr<const BlockClusterTree> bct_;
  ClusterBasis row_basis_;
  ClusterBasis col_basis_;
  std::vector<CoefficientPair> coeffs_;
  std::shared_ptr<const DenseLeaves> dense_;
  std::vector<std::size_t> row_order_, col_order_, dense_order_;
};

/// Horizontal concatenation of the admissible blocks of `cluster` taken from
/// a dense matrix: A_tau for Side::row, A_sigma^* for Side::col.
Matrix agglomeration(const Matrix& a, const BlockClusterTree& bct, Side side, std::size_t cluster);

/// Reference construction from the dense agglomerations. Quadratic cost,
/// for testing on small instances.
ClusterBasis optimal_cluster_basis_reference(const Matrix& a, const BlockClusterTree& bct, Side side,
                                             const ClusterTolerances& eps, std::size_t cap = kDenseElementCap);

/// Log-linear compression of an assembled H-matrix using the QR-reduced
/// agglomeration proxies X_tau = [X_b R_{Y,b}^*]_b.
UniformHMatrix compress_h_to_uh(const HMatrix& h, const ClusterTolerances& eps,
                                RankRevealing method = RankRevealing::svd, std::size_t workers = 1);

/// Block approximation settings used while building a cluster.
struct BlockBuildSettings {
  ToleranceSpec aca{1e-4 / 3.0};
  ToleranceSpec recompress{1e-5};
  Pivoting pivoting = Pivoting::partial;
};

/// Factors of admissible blocks shared between the row and the column
/// cluster that own them. Each block is approximated at most once; U_b is
/// dropped once its row cluster consumed it, V_b once its column cluster
/// did, and sigma_b once both did.
class FactorStore {
public:
  FactorStore(const EntryOracle& oracle, const BlockClusterTree& bct, BlockBuildSettings settings);

  /// Provides precomputed factors for a block; no ACA runs for it later.
  void supply(std::size_t block, SVDForm factors);

  /// Returns the scaled proxy columns (U_b Sigma_b for Side::row,
  /// V_b Sigma_b for Side::col) and sigma_b, approximating the block first if
  /// nobody did yet.
  struct Consumed {
    Matrix scaled;
    RealVector sigma;
  };
  Consumed consume(std::size_t block, Side side);

  std::size_t aca_calls() const noexcept { return aca_calls_.load(); }
  std::size_t aca_calls(std::size_t block) const { return slots_.at(block).aca_calls; }
  std::size_t entries(std::size_t block) const { return slots_.at(block).entries; }
  std::size_t retained() const noexcept { return static_cast<std::size_t>(live_.load()); }
  std::size_t peak_retained() const noexcept { return static_cast<std::size_t>(peak_.load()); }

private:
  struct Slot {
    std::mutex mutex;
    bool computed = false;
    bool row_done = false;
    bool col_done = false;
    SVDForm f;
    std::size_t aca_calls = 0;
    std::size_t entries = 0;
  };
  void retain_one();

  const EntryOracle& oracle_;
  const BlockClusterTree& bct_;
  BlockBuildSettings settings_;
  std::vector<Slot> slots_;
  std::atomic<std::size_t> aca_calls_{0};
  std::atomic<long> live_{0};
  std::atomic<long> peak_{0};
};

struct ClusterBuildResult {
  Matrix basis;
  /// (block id, S_X or S_Y) in the order of row(tau) / col(sigma).
  std::vector<std::pair<std::size_t, Matrix>> coefficients;
};

/// Builds the basis of one row (or column) cluster and the coefficient
/// factors of its blocks, drawing block factors from `shared`.
ClusterBuildResult build_cluster(const BlockClusterTree& bct, Side side, std::size_t cluster,
                                 const ToleranceSpec& eps_cluster, FactorStore& shared,
                                 RankRevealing method = RankRevealing::svd);

struct DirectBuildOptions {
  BlockBuildSettings blocks;
  ClusterTolerances basis{ToleranceSpec{1e-4 / 3.0}};
  RankRevealing method = RankRevealing::svd;
};

/// Tolerance split for the uniform format: eps/3 for ACA and for the basis
/// truncation, eps/10 for block recompression.
DirectBuildOptions uniform_split(double eps, Pivoting pivoting = Pivoting::partial);

struct DirectBuildStats {
  std::size_t aca_calls = 0;
  std::size_t peak_retained = 0;
};

/// Direct construction from matrix entries. Row and column clusters are
/// processed jointly by decreasing size (ties: cluster id, then row side
/// first); block factors are created exactly once under a per-block lock.
UniformHMatrix direct_build_uh(const EntryOracle& oracle, std::shared_ptr<const BlockClusterTree> bct,
                               const DirectBuildOptions& options, std::size_t workers,
                               DirectBuildStats* stats = nullptr);

Vector matvec_uh(const UniformHMatrix& u, const Vector& v, std::size_t workers, MatvecStats* stats = nullptr);
Vector adjoint_matvec_uh(const UniformHMatrix& u, const Vector& v, std::size_t workers);

StorageReport storage_report_uh(const UniformHMatrix& u);
Matrix to_dense(const UniformHMatrix& u, std::size_t cap = kDenseElementCap);

/// `cluster_id,side,size,rank` rows for both bases.
void write_basis_csv(const UniformHMatrix& u, std::ostream& os);
/// `block_id,k_b,l_tau,l_sigma` rows.
void write_coefficient_csv(const UniformHMatrix& u, std::ostream& os);

} // namespace uhm
