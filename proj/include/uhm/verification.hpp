#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "uhm/uniform.hpp"

namespace uhm {

using ApplyFn = std::function<Vector(const Vector&)>;

/// A matrix known only through its action and the action of its adjoint.
struct LinearOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  ApplyFn apply;
  ApplyFn apply_adjoint;
};

LinearOperator as_operator(const Matrix& a);
LinearOperator as_operator(const EntryOracle& oracle);
LinearOperator as_operator(const HMatrix& h, std::size_t workers = 1);
LinearOperator as_operator(const UniformHMatrix& u, std::size_t workers = 1);
/// a - b
LinearOperator difference(LinearOperator a, LinearOperator b);

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;        ///< ||A^*A x - lambda x|| / lambda at the last step
  std::vector<double> history;  ///< sqrt of every Rayleigh quotient
};

/// Power iteration on A^*A from a seeded random unit vector. Stops after
/// `iters` steps or once the Rayleigh quotient moves by at most
/// `stagnation` relative.
NormEstimate spectral_norm_estimate(const ApplyFn& apply, const ApplyFn& apply_adjoint, std::size_t n,
                                    std::size_t iters = 50, std::uint64_t seed = 1, double stagnation = 1e-6);

struct ErrorReport {
  double rel_spectral_estimate = 0.0; ///< ||A - A~||_2 / ||A||_2
  std::size_t iterations = 0;         ///< power iterations on the difference
  double residual = 0.0;
  double diff_norm = 0.0;
  double ref_norm = 0.0;
};

ErrorReport compression_error(const LinearOperator& reference, const LinearOperator& compressed,
                              std::size_t iters = 50, std::uint64_t seed = 1);

/// `instance,format,rel_spec_err,iters`
void write_error_csv_header(std::ostream& os);
void write_error_csv_row(std::ostream& os, const std::string& instance, const std::string& format,
                         const ErrorReport& report);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Exact check of ||A - A_uh||_2 <= sqrt(2) (sum of squared spectral
/// projection errors of all row and column agglomerations)^(1/2), with every
/// norm taken from a dense SVD.
BoundCheck error_bound_check(const Matrix& a, const UniformHMatrix& uh, std::size_t cap = 800 * 800);

/// Absolute local tolerances (eps/2) sqrt(|tau| |F(tau)| / (|I| |J|)) indexed
/// by cluster id. Entries of clusters without admissible blocks are 0.
struct ToleranceBudget {
  std::vector<double> row_eps;
  std::vector<double> col_eps;
};

ToleranceBudget tolerance_budget(double eps, const BlockClusterTree& bct);

/// Sum of |tau| |F(tau)| over row clusters and of |sigma| |F(sigma)| over
/// column clusters.
std::pair<double, double> budget_areas(const BlockClusterTree& bct);

/// Absolute-mode tolerances from a budget, every entry multiplied by `scale`
/// (e.g. ||A||_2 for a relative target).
ClusterTolerances to_cluster_tolerances(const ToleranceBudget& budget, double scale = 1.0,
                                        std::size_t max_rank = ToleranceSpec{}.max_rank);

} // namespace uhm
