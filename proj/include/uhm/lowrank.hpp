#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include "uhm/types.hpp"

namespace uhm {

/// Block approximation X Y^* with equal column counts.
struct LowRankFactors {
  Matrix X;
  Matrix Y;

  idx_t rank() const noexcept { return X.cols(); }
  Matrix to_dense() const { return X * Y.adjoint(); }
};

/// U diag(sigma) V^* with orthonormal U, V and sigma positive, descending.
struct SVDForm {
  Matrix U;
  RealVector sigma;
  Matrix V;

  idx_t rank() const noexcept { return sigma.size(); }
  idx_t rows() const noexcept { return U.rows(); }
  idx_t cols() const noexcept { return V.rows(); }
  Matrix to_dense() const { return U * sigma.asDiagonal() * V.adjoint(); }
  bool empty() const noexcept { return U.size() == 0 && V.size() == 0; }
};

enum class TruncationMode {
  relative, ///< drop sigma_i <= rel_eps * sigma_0
  absolute, ///< drop sigma_i <= rel_eps
};

struct ToleranceSpec {
  double rel_eps = 1e-4;
  std::size_t max_rank = std::numeric_limits<std::size_t>::max();
  double abs_floor = 1e-300;
  TruncationMode mode = TruncationMode::relative;

  ToleranceSpec scaled(double factor) const {
    ToleranceSpec t = *this;
    t.rel_eps *= factor;
    return t;
  }
};

/// Smallest l such that l == sigma.size() or sigma[l] is at or below the cut.
/// Values at or below `abs_floor` are always dropped and the result is capped
/// at `max_rank`.
std::size_t truncation_rank(const RealVector& sigma, const ToleranceSpec& tol);

enum class Pivoting { partial, rook };

using EntryFn = std::function<cplx(idx_t, idx_t)>;

struct AcaStats {
  std::size_t entries = 0; ///< entry evaluations
  std::size_t zero_rows = 0;
};

/// Adaptive cross approximation of an nrows x ncols block given entry-wise.
///
/// Stops at the first cross with ||x_k|| ||y_k|| <= rel_eps * F, F being the
/// running Frobenius norm of the accumulated approximation (that cross is
/// discarded), or when the rank reaches min(nrows, ncols, max_rank).
LowRankFactors aca(const EntryFn& entry, idx_t nrows, idx_t ncols, const ToleranceSpec& tol,
                   Pivoting pivoting = Pivoting::partial, AcaStats* stats = nullptr);

/// QR of both factors, SVD of the small core, truncation.
SVDForm recompress(const LowRankFactors& f, const ToleranceSpec& tol);

/// Thin SVD A = U diag(s) V^*.
struct ThinSVD {
  Matrix U;
  RealVector sigma;
  Matrix V;
};
ThinSVD thin_svd(const Matrix& a, bool want_v = true);
RealVector singular_values(const Matrix& a);
double spectral_norm(const Matrix& a);

/// Thin QR with Q of size m x min(m, n) and R of size min(m, n) x n.
void thin_qr(const Matrix& a, Matrix& q, Matrix& r);

/// ||Q^* Q - I||_F
double orthonormality_error(const Matrix& q);

} // namespace uhm
