#include "uhm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "uhm/errors.hpp"

namespace uhm {

ClusterTree::ClusterTree(std::vector<std::size_t> permutation, std::vector<Cluster> nodes, std::size_t n_min)
    : permutation_(std::move(permutation)), nodes_(std::move(nodes)), n_min_(n_min) {
  inverse_.resize(permutation_.size());
  for (std::size_t pos = 0; pos < permutation_.size(); ++pos) inverse_.at(permutation_[pos]) = pos;
  for (const auto& c : nodes_) depth_ = std::max(depth_, c.level + 1);
}

std::vector<std::size_t> ClusterTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].is_leaf()) out.push_back(id);
  return out;
}

void ClusterTree::dump(std::ostream& os) const {
  os << "# id begin end level lo.x lo.y lo.z hi.x hi.y hi.z\n";
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const auto& c = nodes_[id];
    os << id << ' ' << c.begin << ' ' << c.end << ' ' << c.level << ' ' << c.box.lo.x << ' ' << c.box.lo.y << ' '
       << c.box.lo.z << ' ' << c.box.hi.x << ' ' << c.box.hi.y << ' ' << c.box.hi.z << '\n';
  }
}

namespace {

// Orders range [begin, end) of `perm` along the principal axis of its points.
void sort_along_principal_axis(const Geometry& g, std::vector<std::size_t>& perm, std::size_t begin,
                               std::size_t end, const AABB& box) {
  const auto first = perm.begin() + static_cast<std::ptrdiff_t>(begin);
  const auto last = perm.begin() + static_cast<std::ptrdiff_t>(end);
  if (aabb_diam(box) == 0.0) {
    // All points coincide: fall back to original index order.
    std::sort(first, last);
    return;
  }

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (auto it = first; it != last; ++it) {
    const auto& p = g.points[*it];
    mean += Eigen::Vector3d(p.x, p.y, p.z);
  }
  mean /= static_cast<double>(end - begin);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto it = first; it != last; ++it) {
    const auto& p = g.points[*it];
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d axis = eig.eigenvectors().col(2);
  // Fix the sign so that the dominant component is positive.
  Eigen::Index imax = 0;
  axis.cwiseAbs().maxCoeff(&imax);
  if (axis(imax) < 0.0) axis = -axis;

  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(end - begin);
  for (auto it = first; it != last; ++it) {
    const auto& p = g.points[*it];
    keyed.emplace_back(axis.dot(Eigen::Vector3d(p.x, p.y, p.z) - mean), *it);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t k = 0; k < keyed.size(); ++k) perm[begin + k] = keyed[k].second;
}

AABB range_box(const Geometry& g, const std::vector<std::size_t>& perm, std::size_t begin, std::size_t end) {
  return bbox(g, std::span<const std::size_t>(perm).subspan(begin, end - begin));
}

} // namespace

ClusterTree build_cluster_tree(const Geometry& geometry, std::size_t n_min) {
  if (n_min == 0) throw invalid_argument("build_cluster_tree: n_min must be >= 1");
  if (geometry.size() == 0) throw invalid_argument("build_cluster_tree: empty geometry");

  std::vector<std::size_t> perm(geometry.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  std::vector<Cluster> nodes;
  nodes.push_back(Cluster{0, geometry.size(), range_box(geometry, perm, 0, geometry.size()), 0});

  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const Cluster c = nodes[id];
    if (c.size() < 2 * n_min || c.size() < 2) continue;

    sort_along_principal_axis(geometry, perm, c.begin, c.end, c.box);
    const std::size_t mid = c.begin + c.size() / 2;
    const std::size_t left = nodes.size();
    nodes.push_back(Cluster{c.begin, mid, range_box(geometry, perm, c.begin, mid), c.level + 1});
    nodes.push_back(Cluster{mid, c.end, range_box(geometry, perm, mid, c.end), c.level + 1});
    nodes[id].children = {left, left + 1};
    stack.push_back(left + 1);
    stack.push_back(left);
  }
  return ClusterTree(std::move(perm), std::move(nodes), n_min);
}

bool is_admissible(const AABB& a, const AABB& b, const AdmissibilityParams& p) {
  const double da = aabb_diam(a);
  const double db = aabb_diam(b);
  const double rhs = p.criterion == Criterion::strong ? std::max(da, db) : std::min(da, db);
  return p.eta * aabb_dist(a, b) > rhs;
}

BlockClusterTree::BlockClusterTree(std::shared_ptr<const ClusterTree> row_tree,
                                   std::shared_ptr<const ClusterTree> col_tree, AdmissibilityParams params)
    : row_tree_(std::move(row_tree)), col_tree_(std::move(col_tree)), params_(params) {
  if (!row_tree_ || !col_tree_) throw invalid_argument("BlockClusterTree: null cluster tree");
  if (!(params_.eta > 0.0)) throw invalid_argument("BlockClusterTree: eta must be > 0");
  row_map_.resize(row_tree_->nodes().size());
  col_map_.resize(col_tree_->nodes().size());

  subdivide(row_tree_->root_id(), col_tree_->root_id());

  for (std::size_t tau = 0; tau < row_map_.size(); ++tau)
    if (!row_map_[tau].empty()) lrc_.push_back(tau);
  for (std::size_t sigma = 0; sigma < col_map_.size(); ++sigma)
    if (!col_map_[sigma].empty()) lcc_.push_back(sigma);
}

void BlockClusterTree::subdivide(std::size_t tau, std::size_t sigma) {
  struct Pair {
    std::size_t tau, sigma;
  };
  std::vector<Pair> stack{{tau, sigma}};
  while (!stack.empty()) {
    const auto [t, s] = stack.back();
    stack.pop_back();
    const Cluster& ct = row_tree_->node(t);
    const Cluster& cs = col_tree_->node(s);

    if (is_admissible(ct.box, cs.box, params_)) {
      const std::size_t id = leaves_.size();
      leaves_.push_back(Block{id, t, s, true});
      admissible_.push_back(id);
      row_map_[t].push_back(id);
      col_map_[s].push_back(id);
      continue;
    }
    if (ct.is_leaf() && cs.is_leaf()) {
      const std::size_t id = leaves_.size();
      leaves_.push_back(Block{id, t, s, false});
      inadmissible_.push_back(id);
      continue;
    }
    // Pushed in reverse so that children are visited in natural order.
    if (!ct.is_leaf() && !cs.is_leaf()) {
      for (int i = 1; i >= 0; --i)
        for (int j = 1; j >= 0; --j) stack.push_back({ct.children[i], cs.children[j]});
    } else if (!ct.is_leaf()) {
      stack.push_back({ct.children[1], s});
      stack.push_back({ct.children[0], s});
    } else {
      stack.push_back({t, cs.children[1]});
      stack.push_back({t, cs.children[0]});
    }
  }
}

std::size_t BlockClusterTree::far_field_size_row(std::size_t tau) const {
  std::size_t total = 0;
  for (std::size_t b : row_map_.at(tau)) total += cols(leaves_[b]);
  return total;
}

std::size_t BlockClusterTree::far_field_size_col(std::size_t sigma) const {
  std::size_t total = 0;
  for (std::size_t b : col_map_.at(sigma)) total += rows(leaves_[b]);
  return total;
}

void BlockClusterTree::dump(std::ostream& os) const {
  os << "# block row col row_lo row_hi col_lo col_hi admissible\n";
  for (const auto& b : leaves_) {
    const auto& ct = row_tree_->node(b.row);
    const auto& cs = col_tree_->node(b.col);
    os << b.id << ' ' << b.row << ' ' << b.col << ' ' << ct.begin << ' ' << ct.end << ' ' << cs.begin << ' '
       << cs.end << ' ' << (b.admissible ? 1 : 0) << '\n';
  }
}

std::shared_ptr<const BlockClusterTree> build_block_tree(std::shared_ptr<const ClusterTree> row,
                                                         std::shared_ptr<const ClusterTree> col,
                                                         const AdmissibilityParams& p) {
  return std::make_shared<const BlockClusterTree>(std::move(row), std::move(col), p);
}

std::size_t sparsity_constant(const BlockClusterTree& bct) {
  std::size_t csp = 0;
  for (std::size_t tau : bct.row_clusters()) csp = std::max(csp, bct.row_blocks(tau).size());
  for (std::size_t sigma : bct.col_clusters()) csp = std::max(csp, bct.col_blocks(sigma).size());
  return csp;
}

StorageBounds storage_bounds(const BlockClusterTree& bct, std::size_t k_max, std::size_t l_max) {
  const double ni = static_cast<double>(bct.row_tree().size());
  const double nj = static_cast<double>(bct.col_tree().size());
  const double levels = static_cast<double>(bct.row_tree().depth()) * ni +
                        static_cast<double>(bct.col_tree().depth()) * nj;
  const double csp = static_cast<double>(sparsity_constant(bct));
  const double n_min = static_cast<double>(std::min(bct.row_tree().n_min(), bct.col_tree().n_min()));
  const double k = static_cast<double>(k_max);
  const double l = static_cast<double>(l_max);
  return {csp * k * levels, l * levels + l * l * 2.0 * csp * std::min(ni, nj) / n_min};
}

} // namespace uhm
