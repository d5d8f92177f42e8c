#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "uhm/geometry.hpp"

namespace uhm {

inline constexpr std::size_t kNoCluster = static_cast<std::size_t>(-1);

/// Node of a cluster tree. Its indices are the contiguous tree-order range
/// [begin, end).
struct Cluster {
  std::size_t begin = 0;
  std::size_t end = 0;
  AABB box;
  std::size_t level = 0;
  std::array<std::size_t, 2> children{kNoCluster, kNoCluster};

  std::size_t size() const noexcept { return end - begin; }
  bool is_leaf() const noexcept { return children[0] == kNoCluster; }
};

/// Binary cluster tree over the indices of a geometry.
///
/// `permutation()[pos]` is the original index stored at tree-order position
/// `pos`. Node 0 is the root; children always partition their parent's range.
class ClusterTree {
public:
  ClusterTree(std::vector<std::size_t> permutation, std::vector<Cluster> nodes, std::size_t n_min);

  const std::vector<std::size_t>& permutation() const noexcept { return permutation_; }
  const std::vector<std::size_t>& inverse_permutation() const noexcept { return inverse_; }
  const std::vector<Cluster>& nodes() const noexcept { return nodes_; }
  const Cluster& node(std::size_t id) const { return nodes_.at(id); }
  const Cluster& root() const { return nodes_.front(); }
  std::size_t root_id() const noexcept { return 0; }
  std::size_t size() const noexcept { return permutation_.size(); }
  std::size_t n_min() const noexcept { return n_min_; }

  /// Number of levels, L(T) = max level + 1.
  std::size_t depth() const noexcept { return depth_; }
  std::vector<std::size_t> leaves() const;

  void dump(std::ostream& os) const;

private:
  std::vector<std::size_t> permutation_;
  std::vector<std::size_t> inverse_;
  std::vector<Cluster> nodes_;
  std::size_t n_min_;
  std::size_t depth_ = 0;
};

/// Recursive PCA bisection at the median projection. A cluster is split
/// while it holds at least 2*n_min indices, so leaves hold between n_min and
/// 2*n_min - 1 indices (or fewer when the whole set is smaller than n_min).
ClusterTree build_cluster_tree(const Geometry& geometry, std::size_t n_min);

enum class Criterion { strong, weak };

struct AdmissibilityParams {
  double eta = 10.0;
  Criterion criterion = Criterion::weak;
};

bool is_admissible(const AABB& a, const AABB& b, const AdmissibilityParams& p);

struct Block {
  std::size_t id = 0;
  std::size_t row = 0; ///< row cluster id
  std::size_t col = 0; ///< column cluster id
  bool admissible = false;
};

/// Leaf partition of I x J split into admissible (P+) and inadmissible (P-)
/// blocks, with the row(tau) / col(sigma) association maps.
class BlockClusterTree {
public:
  BlockClusterTree(std::shared_ptr<const ClusterTree> row_tree, std::shared_ptr<const ClusterTree> col_tree,
                   AdmissibilityParams params);

  const ClusterTree& row_tree() const noexcept { return *row_tree_; }
  const ClusterTree& col_tree() const noexcept { return *col_tree_; }
  std::shared_ptr<const ClusterTree> row_tree_ptr() const noexcept { return row_tree_; }
  std::shared_ptr<const ClusterTree> col_tree_ptr() const noexcept { return col_tree_; }
  const AdmissibilityParams& params() const noexcept { return params_; }

  const std::vector<Block>& leaves() const noexcept { return leaves_; }
  const Block& leaf(std::size_t id) const { return leaves_.at(id); }
  std::size_t rows(const Block& b) const { return row_tree_->node(b.row).size(); }
  std::size_t cols(const Block& b) const { return col_tree_->node(b.col).size(); }

  /// Block ids of P+ and P-, in discovery order.
  const std::vector<std::size_t>& admissible() const noexcept { return admissible_; }
  const std::vector<std::size_t>& inadmissible() const noexcept { return inadmissible_; }

  /// Admissible block ids with the given row (column) cluster; empty for
  /// clusters outside Lrc (Lcc).
  const std::vector<std::size_t>& row_blocks(std::size_t tau) const { return row_map_.at(tau); }
  const std::vector<std::size_t>& col_blocks(std::size_t sigma) const { return col_map_.at(sigma); }

  /// Clusters occurring in admissible leaves, ascending cluster id.
  const std::vector<std::size_t>& row_clusters() const noexcept { return lrc_; }
  const std::vector<std::size_t>& col_clusters() const noexcept { return lcc_; }

  /// |F(tau)|: total column count of the admissible blocks in row(tau).
  std::size_t far_field_size_row(std::size_t tau) const;
  std::size_t far_field_size_col(std::size_t sigma) const;

  void dump(std::ostream& os) const;

private:
  void subdivide(std::size_t tau, std::size_t sigma);

  std::shared_ptr<const ClusterTree> row_tree_;
  std::shared_ptr<const ClusterTree> col_tree_;
  AdmissibilityParams params_;
  std::vector<Block> leaves_;
  std::vector<std::size_t> admissible_;
  std::vector<std::size_t> inadmissible_;
  std::vector<std::vector<std::size_t>> row_map_;
  std::vector<std::vector<std::size_t>> col_map_;
  std::vector<std::size_t> lrc_;
  std::vector<std::size_t> lcc_;
};

std::shared_ptr<const BlockClusterTree> build_block_tree(std::shared_ptr<const ClusterTree> row,
                                                         std::shared_ptr<const ClusterTree> col,
                                                         const AdmissibilityParams& p);

/// c_sp: the largest number of admissible leaves any single cluster occurs in.
/// Zero when P+ is empty.
std::size_t sparsity_constant(const BlockClusterTree& bct);

struct StorageBounds {
  double h_bound = 0.0;  ///< c_sp k_max (L(T_I)|I| + L(T_J)|J|)
  double uh_bound = 0.0; ///< l_max (L(T_I)|I| + L(T_J)|J|) + 2 l_max^2 c_sp min(|I|,|J|) / n_min
};

StorageBounds storage_bounds(const BlockClusterTree& bct, std::size_t k_max, std::size_t l_max);

} // namespace uhm
