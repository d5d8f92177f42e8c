#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "uhm/geometry.hpp"
#include "uhm/types.hpp"

namespace uhm {

class ClusterTree;

enum class KernelKind { laplace, helmholtz };

/// Single-layer kernel exp(i kappa r) / (4 pi r) with r clamped below at
/// `reg_dist`. Laplace ignores kappa.
struct KernelSpec {
  KernelKind kind = KernelKind::laplace;
  double kappa = 0.0;
  double reg_dist = 1e-8;

  double wavenumber() const noexcept { return kind == KernelKind::laplace ? 0.0 : kappa; }
};

cplx eval_kernel(const Point3& x, const Point3& y, const KernelSpec& spec);

/// Default regularization distance: 1e-8 times the bbox diameter.
double default_reg_dist(const Geometry& geometry);

/// Nystrom surrogate a_ij = w_i w_j g(x_i, y_j) in tree order.
///
/// Points are copied in permuted order at construction, so (i, j) address
/// tree-order positions and every cluster is a contiguous index range.
class EntryOracle {
public:
  EntryOracle(const Geometry& rows, const Geometry& cols, KernelSpec spec,
              const std::vector<std::size_t>& row_permutation, const std::vector<std::size_t>& col_permutation);
  EntryOracle(const Geometry& rows, const Geometry& cols, KernelSpec spec, const ClusterTree& row_tree,
              const ClusterTree& col_tree);

  std::size_t rows() const noexcept { return row_points_.size(); }
  std::size_t cols() const noexcept { return col_points_.size(); }
  const KernelSpec& spec() const noexcept { return spec_; }

  /// Bounds-checked entry.
  cplx entry(std::size_t i, std::size_t j) const;
  cplx operator()(std::size_t i, std::size_t j) const noexcept {
    return row_weights_[i] * col_weights_[j] * eval_kernel(row_points_[i], col_points_[j], spec_);
  }

  /// Entries of [row_begin, row_end) x [col_begin, col_end).
  Matrix dense_block(std::size_t row_begin, std::size_t row_end, std::size_t col_begin, std::size_t col_end,
                     std::size_t cap = kDenseElementCap) const;
  Matrix dense(std::size_t cap = kDenseElementCap) const { return dense_block(0, rows(), 0, cols(), cap); }

  /// Dense-free product A v in tree order, O(rows * cols) kernel evaluations.
  Vector apply(const Vector& v) const;
  /// A^* v, same cost.
  Vector apply_adjoint(const Vector& v) const;

private:
  std::vector<Point3> row_points_;
  std::vector<double> row_weights_;
  std::vector<Point3> col_points_;
  std::vector<double> col_weights_;
  KernelSpec spec_;
};

} // namespace uhm
