#include "uhm/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace uhm {

std::size_t truncation_rank(const RealVector& sigma, const ToleranceSpec& tol) {
  if (sigma.size() == 0) return 0;
  const double cut = tol.mode == TruncationMode::relative ? tol.rel_eps * sigma(0) : tol.rel_eps;
  std::size_t l = 0;
  const auto n = static_cast<std::size_t>(sigma.size());
  while (l < n && sigma(static_cast<idx_t>(l)) > cut && sigma(static_cast<idx_t>(l)) > tol.abs_floor) ++l;
  return std::min(l, tol.max_rank);
}

namespace {

idx_t argmax_abs(const Vector& v, const std::vector<char>& used, double& best) {
  idx_t arg = -1;
  best = -1.0;
  for (idx_t i = 0; i < v.size(); ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  return arg;
}

class CrossBuilder {
public:
  CrossBuilder(const EntryFn& entry, idx_t nrows, idx_t ncols, AcaStats& stats)
      : entry_(entry), nrows_(nrows), ncols_(ncols), stats_(stats) {}

  Vector residual_row(idx_t i) const {
    Vector r(ncols_);
    for (idx_t j = 0; j < ncols_; ++j) r(j) = entry_(i, j);
    stats_.entries += static_cast<std::size_t>(ncols_);
    for (std::size_t l = 0; l < us_.size(); ++l) r -= us_[l](i) * vs_[l];
    return r;
  }

  Vector residual_col(idx_t j) const {
    Vector c(nrows_);
    for (idx_t i = 0; i < nrows_; ++i) c(i) = entry_(i, j);
    stats_.entries += static_cast<std::size_t>(nrows_);
    for (std::size_t l = 0; l < vs_.size(); ++l) c -= vs_[l](j) * us_[l];
    return c;
  }

  // Appends u v^T and updates the squared Frobenius norm.
  void append(Vector u, Vector v) {
    double cross = 0.0;
    for (std::size_t l = 0; l < us_.size(); ++l) cross += (us_[l].dot(u) * vs_[l].dot(v)).real();
    frob2_ += u.squaredNorm() * v.squaredNorm() + 2.0 * cross;
    frob2_ = std::max(frob2_, 0.0);
    us_.push_back(std::move(u));
    vs_.push_back(std::move(v));
  }

  LowRankFactors factors() const {
    const auto k = static_cast<idx_t>(us_.size());
    LowRankFactors f{Matrix(nrows_, k), Matrix(ncols_, k)};
    for (idx_t l = 0; l < k; ++l) {
      f.X.col(l) = us_[static_cast<std::size_t>(l)];
      f.Y.col(l) = vs_[static_cast<std::size_t>(l)].conjugate();
    }
    return f;
  }

  idx_t rank() const noexcept { return static_cast<idx_t>(us_.size()); }
  double frob2() const noexcept { return frob2_; }
  const Vector& last_u() const { return us_.back(); }

private:
  const EntryFn& entry_;
  idx_t nrows_, ncols_;
  AcaStats& stats_;
  std::vector<Vector> us_, vs_;
  double frob2_ = 0.0;
};

idx_t first_unused(const std::vector<char>& used) {
  const auto it = std::find(used.begin(), used.end(), 0);
  return it == used.end() ? -1 : static_cast<idx_t>(it - used.begin());
}

} // namespace

LowRankFactors aca(const EntryFn& entry, idx_t nrows, idx_t ncols, const ToleranceSpec& tol, Pivoting pivoting,
                   AcaStats* stats) {
  AcaStats local;
  AcaStats& st = stats ? *stats : local;
  CrossBuilder cross(entry, nrows, ncols, st);
  if (nrows <= 0 || ncols <= 0) return cross.factors();

  const auto full = static_cast<std::size_t>(std::min(nrows, ncols));
  const auto max_rank = static_cast<idx_t>(std::min(full, tol.max_rank));
  std::vector<char> row_used(static_cast<std::size_t>(nrows), 0);
  std::vector<char> col_used(static_cast<std::size_t>(ncols), 0);
  constexpr int kMaxRookSweeps = 8;

  idx_t pivot_row = 0;
  std::size_t attempts = 0;
  while (cross.rank() < max_rank) {
    if (pivot_row < 0 || row_used[static_cast<std::size_t>(pivot_row)]) pivot_row = first_unused(row_used);
    if (pivot_row < 0) break;

    Vector row = cross.residual_row(pivot_row);
    double best = 0.0;
    idx_t pivot_col = argmax_abs(row, col_used, best);
    if (pivot_col < 0) break;
    if (best == 0.0) {
      // Zero residual row: retry with the next unused row.
      row_used[static_cast<std::size_t>(pivot_row)] = 1;
      ++st.zero_rows;
      if (++attempts >= static_cast<std::size_t>(nrows)) break;
      pivot_row = first_unused(row_used);
      continue;
    }

    Vector col = cross.residual_col(pivot_col);
    if (pivoting == Pivoting::rook) {
      for (int sweep = 0; sweep < kMaxRookSweeps; ++sweep) {
        double best_r = 0.0;
        const idx_t i2 = argmax_abs(col, row_used, best_r);
        if (i2 == pivot_row || i2 < 0 || best_r <= std::abs(row(pivot_col))) break;
        Vector row2 = cross.residual_row(i2);
        double best_c = 0.0;
        const idx_t j2 = argmax_abs(row2, col_used, best_c);
        pivot_row = i2;
        row = std::move(row2);
        if (j2 == pivot_col || j2 < 0) break;
        pivot_col = j2;
        col = cross.residual_col(pivot_col);
      }
    }
    row_used[static_cast<std::size_t>(pivot_row)] = 1;
    col_used[static_cast<std::size_t>(pivot_col)] = 1;

    const cplx pivot = row(pivot_col);
    Vector v = row / pivot;
    // A cross that passes the stopping test is not appended.
    const double step = col.norm() * v.norm();
    if (cross.rank() > 0 && step <= tol.rel_eps * std::sqrt(cross.frob2())) break;
    cross.append(std::move(col), std::move(v));

    double unused = 0.0;
    pivot_row = argmax_abs(cross.last_u(), row_used, unused);
  }
  return cross.factors();
}

void thin_qr(const Matrix& a, Matrix& q, Matrix& r) {
  const idx_t m = a.rows();
  const idx_t n = a.cols();
  const idx_t p = std::min(m, n);
  if (p == 0) {
    q = Matrix(m, 0);
    r = Matrix(0, n);
    return;
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  q = qr.householderQ() * Matrix::Identity(m, p);
  r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
}

namespace {

constexpr idx_t kJacobiLimit = 16;

const bool kSingleThreadedBlas = [] {
  openblas_set_num_threads(1);
  return true;
}();

ThinSVD jacobi_svd(const Matrix& a, bool want_v) {
  const unsigned opts = Eigen::ComputeThinU | (want_v ? static_cast<unsigned>(Eigen::ComputeThinV) : 0u);
  Eigen::JacobiSVD<Matrix> svd(a, opts);
  ThinSVD out;
  out.U = svd.matrixU();
  out.sigma = svd.singularValues();
  if (want_v) out.V = svd.matrixV();
  return out;
}

// Divide and conquer from LAPACK; the QR-iteration driver is the fallback
// when it does not converge.
ThinSVD lapack_svd(const Matrix& a, bool want_v) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  const lapack_int p = std::min(m, n);
  Matrix work = a;
  ThinSVD out;
  out.U.resize(m, p);
  out.sigma.resize(p);
  Matrix vt(p, n);
  auto* data = reinterpret_cast<lapack_complex_double*>(work.data());
  auto* u = reinterpret_cast<lapack_complex_double*>(out.U.data());
  auto* v = reinterpret_cast<lapack_complex_double*>(vt.data());
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, data, m, out.sigma.data(), u, m, v, p);
  if (info != 0) {
    work = a;
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(p, 1)));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, data, m, out.sigma.data(), u, m, v, p, superb.data());
  }
  if (info != 0) return jacobi_svd(a, want_v);
  if (want_v) out.V = vt.adjoint();
  return out;
}

ThinSVD square_ish_svd(const Matrix& a, bool want_v) {
  if (std::min(a.rows(), a.cols()) <= kJacobiLimit) return jacobi_svd(a, want_v);
  return lapack_svd(a, want_v);
}

} // namespace

ThinSVD thin_svd(const Matrix& a, bool want_v) {
  const idx_t m = a.rows();
  const idx_t n = a.cols();
  if (m == 0 || n == 0) return {Matrix(m, 0), RealVector(0), Matrix(n, 0)};
  if (m < n) {
    ThinSVD t = thin_svd(a.adjoint(), true);
    return {std::move(t.V), std::move(t.sigma), std::move(t.U)};
  }
  if (m > 2 * n && n <= kJacobiLimit) {
    Matrix q, r;
    thin_qr(a, q, r);
    ThinSVD inner = square_ish_svd(r, want_v);
    inner.U = q * inner.U;
    return inner;
  }
  return square_ish_svd(a, want_v);
}

RealVector singular_values(const Matrix& a) {
  if (a.size() == 0) return RealVector(0);
  if (std::min(a.rows(), a.cols()) <= kJacobiLimit) return Eigen::JacobiSVD<Matrix>(a).singularValues();
  return Eigen::BDCSVD<Matrix>(a).singularValues();
}

double spectral_norm(const Matrix& a) {
  const RealVector s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

double orthonormality_error(const Matrix& q) {
  return (q.adjoint() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

SVDForm recompress(const LowRankFactors& f, const ToleranceSpec& tol) {
  const idx_t m = f.X.rows();
  const idx_t n = f.Y.rows();
  if (f.rank() == 0) return {Matrix(m, 0), RealVector(0), Matrix(n, 0)};

  Matrix qx, rx, qy, ry;
  thin_qr(f.X, qx, rx);
  thin_qr(f.Y, qy, ry);
  const Matrix core = rx * ry.adjoint();
  const ThinSVD svd = thin_svd(core);
  const auto l = static_cast<idx_t>(truncation_rank(svd.sigma, tol));
  return {qx * svd.U.leftCols(l), svd.sigma.head(l), qy * svd.V.leftCols(l)};
}

} // namespace uhm
