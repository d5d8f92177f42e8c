#include "uhm/kernels.hpp"

#include <cmath>
#include <numbers>

#include "uhm/clustering.hpp"
#include "uhm/errors.hpp"

namespace uhm {

cplx eval_kernel(const Point3& x, const Point3& y, const KernelSpec& spec) {
  const double r = std::max(distance(x, y), spec.reg_dist);
  const double scale = 1.0 / (4.0 * std::numbers::pi * r);
  const double kappa = spec.wavenumber();
  if (kappa == 0.0) return {scale, 0.0};
  return {scale * std::cos(kappa * r), scale * std::sin(kappa * r)};
}

double default_reg_dist(const Geometry& geometry) {
  const double d = aabb_diam(bbox(geometry));
  return d > 0.0 ? 1e-8 * d : 1e-8;
}

EntryOracle::EntryOracle(const Geometry& rows, const Geometry& cols, KernelSpec spec,
                         const std::vector<std::size_t>& row_permutation,
                         const std::vector<std::size_t>& col_permutation)
    : spec_(spec) {
  if (!(spec_.reg_dist > 0.0)) throw invalid_argument("EntryOracle: reg_dist must be > 0");
  if (spec_.kind == KernelKind::helmholtz && !(spec_.kappa >= 0.0))
    throw invalid_argument("EntryOracle: kappa must be >= 0");
  if (row_permutation.size() != rows.size() || col_permutation.size() != cols.size())
    throw invalid_argument("EntryOracle: permutation size mismatch");
  row_points_.reserve(rows.size());
  row_weights_.reserve(rows.size());
  for (std::size_t orig : row_permutation) {
    row_points_.push_back(rows.points.at(orig));
    row_weights_.push_back(rows.weights.at(orig));
  }
  col_points_.reserve(cols.size());
  col_weights_.reserve(cols.size());
  for (std::size_t orig : col_permutation) {
    col_points_.push_back(cols.points.at(orig));
    col_weights_.push_back(cols.weights.at(orig));
  }
}

EntryOracle::EntryOracle(const Geometry& rows, const Geometry& cols, KernelSpec spec, const ClusterTree& row_tree,
                         const ClusterTree& col_tree)
    : EntryOracle(rows, cols, spec, row_tree.permutation(), col_tree.permutation()) {}

cplx EntryOracle::entry(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols()) throw index_error("EntryOracle::entry: index out of range");
  return (*this)(i, j);
}

Matrix EntryOracle::dense_block(std::size_t row_begin, std::size_t row_end, std::size_t col_begin,
                                std::size_t col_end, std::size_t cap) const {
  if (row_begin > row_end || row_end > rows() || col_begin > col_end || col_end > cols())
    throw index_error("EntryOracle::dense_block: range out of bounds");
  const std::size_t m = row_end - row_begin;
  const std::size_t n = col_end - col_begin;
  if (n != 0 && m > cap / n) throw capacity_error("EntryOracle::dense_block: block exceeds element cap");
  Matrix out(static_cast<idx_t>(m), static_cast<idx_t>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      out(static_cast<idx_t>(i), static_cast<idx_t>(j)) = (*this)(row_begin + i, col_begin + j);
  return out;
}

Vector EntryOracle::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != cols()) throw invalid_argument("EntryOracle::apply: size mismatch");
  Vector w = Vector::Zero(static_cast<idx_t>(rows()));
  for (std::size_t i = 0; i < rows(); ++i) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < cols(); ++j) acc += (*this)(i, j) * v(static_cast<idx_t>(j));
    w(static_cast<idx_t>(i)) = acc;
  }
  return w;
}

Vector EntryOracle::apply_adjoint(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != rows())
    throw invalid_argument("EntryOracle::apply_adjoint: size mismatch");
  Vector w = Vector::Zero(static_cast<idx_t>(cols()));
  for (std::size_t i = 0; i < rows(); ++i) {
    const cplx vi = v(static_cast<idx_t>(i));
    for (std::size_t j = 0; j < cols(); ++j) w(static_cast<idx_t>(j)) += std::conj((*this)(i, j)) * vi;
  }
  return w;
}

} // namespace uhm
