#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "uhm/clustering.hpp"
#include "uhm/kernels.hpp"
#include "uhm/lowrank.hpp"
#include "uhm/types.hpp"

namespace uhm {

/// Element counts of a compressed representation.
struct StorageReport {
  std::size_t adm_elements = 0;        ///< elements stored for admissible blocks, as held in memory
  std::size_t adm_factor_elements = 0; ///< the same blocks counted as factor pairs (X, Y) or as U, V, S_b
  std::size_t dense_elements = 0;
  std::size_t total_elements = 0; ///< adm_elements + dense_elements
  double bytes_estimate = 0.0;    ///< total_elements * 16
  std::size_t c_sp = 0;
  std::size_t k_max = 0;
  std::size_t l_max = 0;
  std::size_t depth_row = 0;
  std::size_t depth_col = 0;
};

using DenseLeaves = std::vector<Matrix>;

/// Orders the given block ids by block area, largest first (ties by id).
std::vector<std::size_t> largest_first(const BlockClusterTree& bct, std::vector<std::size_t> blocks);

/// Regular H-matrix: SVD-form factors for P+ leaves, dense arrays for P-.
/// Per-block storage is indexed by block id; entries for blocks of the other
/// kind are empty.
class HMatrix {
public:
  HMatrix(std::shared_ptr<const BlockClusterTree> bct, std::vector<SVDForm> lowrank,
          std::shared_ptr<const DenseLeaves> dense, ToleranceSpec eps_block, ToleranceSpec eps_recompress);

  const BlockClusterTree& bct() const noexcept { return *bct_; }
  std::shared_ptr<const BlockClusterTree> bct_ptr() const noexcept { return bct_; }
  std::size_t rows() const noexcept { return bct_->row_tree().size(); }
  std::size_t cols() const noexcept { return bct_->col_tree().size(); }

  const SVDForm& lowrank(std::size_t block) const { return lowrank_.at(block); }
  const Matrix& dense(std::size_t block) const { return dense_->at(block); }
  std::shared_ptr<const DenseLeaves> dense_leaves() const noexcept { return dense_; }

  const ToleranceSpec& eps_block() const noexcept { return eps_block_; }
  const ToleranceSpec& eps_recompress() const noexcept { return eps_recompress_; }

  /// Matvec work list: P+ then P-, each largest first.
  const std::vector<std::size_t>& schedule() const noexcept { return schedule_; }

private:
  std::shared_ptr<const BlockClusterTree> bct_;
  std::vector<SVDForm> lowrank_;
  std::shared_ptr<const DenseLeaves> dense_;
  ToleranceSpec eps_block_;
  ToleranceSpec eps_recompress_;
  std::vector<std::size_t> schedule_;
};

struct AssemblyStats {
  std::size_t aca_calls = 0;
  std::size_t entries = 0; ///< kernel entries evaluated by ACA
};

/// Builds every P- leaf densely and every P+ leaf by ACA followed by
/// recompression. Blocks are processed largest first by `workers` threads.
HMatrix assemble_h(const EntryOracle& oracle, std::shared_ptr<const BlockClusterTree> bct,
                   const ToleranceSpec& eps_block, const ToleranceSpec& eps_recompress, std::size_t workers,
                   Pivoting pivoting = Pivoting::partial, AssemblyStats* stats = nullptr);

/// Dense leaves of `bct` evaluated from the oracle in parallel.
std::shared_ptr<const DenseLeaves> assemble_dense_leaves(const EntryOracle& oracle, const BlockClusterTree& bct,
                                                         std::size_t workers);

struct MatvecStats {
  std::size_t leaves_visited = 0;
};

/// w = A v in tree order, accumulated in per-worker vectors and reduced.
Vector matvec_h(const HMatrix& h, const Vector& v, std::size_t workers, MatvecStats* stats = nullptr);
Vector adjoint_matvec_h(const HMatrix& h, const Vector& v, std::size_t workers);

StorageReport storage_report(const HMatrix& h);
Matrix to_dense(const HMatrix& h, std::size_t cap = kDenseElementCap);

/// CSV rows `block_id,row_lo,row_hi,col_lo,col_hi,kind,rank`.
void write_structure_csv(const HMatrix& h, std::ostream& os);

namespace detail {
void add_dense_leaves(const BlockClusterTree& bct, const DenseLeaves& dense, Matrix& out);
Vector reduce(std::vector<Vector>& partial);
} // namespace detail

} // namespace uhm
