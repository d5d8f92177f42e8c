#include "uhm/verification.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "uhm/errors.hpp"

namespace uhm {

LinearOperator as_operator(const Matrix& a) {
  return {static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
          [&a](const Vector& v) { return Vector(a * v); }, [&a](const Vector& v) { return Vector(a.adjoint() * v); }};
}

LinearOperator as_operator(const EntryOracle& oracle) {
  return {oracle.rows(), oracle.cols(), [&oracle](const Vector& v) { return oracle.apply(v); },
          [&oracle](const Vector& v) { return oracle.apply_adjoint(v); }};
}

LinearOperator as_operator(const HMatrix& h, std::size_t workers) {
  return {h.rows(), h.cols(), [&h, workers](const Vector& v) { return matvec_h(h, v, workers); },
          [&h, workers](const Vector& v) { return adjoint_matvec_h(h, v, workers); }};
}

LinearOperator as_operator(const UniformHMatrix& u, std::size_t workers) {
  return {u.rows(), u.cols(), [&u, workers](const Vector& v) { return matvec_uh(u, v, workers); },
          [&u, workers](const Vector& v) { return adjoint_matvec_uh(u, v, workers); }};
}

LinearOperator difference(LinearOperator a, LinearOperator b) {
  if (a.rows != b.rows || a.cols != b.cols) throw invalid_argument("difference: operator shapes differ");
  LinearOperator d{a.rows, a.cols, {}, {}};
  d.apply = [fa = a.apply, fb = b.apply](const Vector& v) { return Vector(fa(v) - fb(v)); };
  d.apply_adjoint = [fa = a.apply_adjoint, fb = b.apply_adjoint](const Vector& v) { return Vector(fa(v) - fb(v)); };
  return d;
}

NormEstimate spectral_norm_estimate(const ApplyFn& apply, const ApplyFn& apply_adjoint, std::size_t n,
                                    std::size_t iters, std::uint64_t seed, double stagnation) {
  if (iters == 0) throw invalid_argument("spectral_norm_estimate: iters must be positive");
  NormEstimate out;
  if (n == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(static_cast<idx_t>(n));
  for (auto& c : x) c = cplx(normal(rng), normal(rng));
  x.normalize();

  double previous = -1.0;
  for (std::size_t it = 1; it <= iters; ++it) {
    const Vector y = apply(x);
    const Vector z = apply_adjoint(y);
    const double lambda = y.squaredNorm();
    out.iterations = it;
    out.value = std::sqrt(lambda);
    out.history.push_back(out.value);
    const double zn = z.norm();
    if (lambda == 0.0 || zn == 0.0) {
      out.residual = 0.0;
      break;
    }
    out.residual = (z - lambda * x).norm() / lambda;
    if (previous >= 0.0 && std::abs(lambda - previous) <= stagnation * lambda) break;
    previous = lambda;
    x = z / zn;
  }
  return out;
}

ErrorReport compression_error(const LinearOperator& reference, const LinearOperator& compressed, std::size_t iters,
                              std::uint64_t seed) {
  const LinearOperator diff = difference(reference, compressed);
  const auto d = spectral_norm_estimate(diff.apply, diff.apply_adjoint, diff.cols, iters, seed);
  const auto a = spectral_norm_estimate(reference.apply, reference.apply_adjoint, reference.cols, iters, seed);
  ErrorReport r;
  r.diff_norm = d.value;
  r.ref_norm = a.value;
  r.iterations = d.iterations;
  r.residual = d.residual;
  r.rel_spectral_estimate = a.value > 0.0 ? d.value / a.value : d.value;
  return r;
}

void write_error_csv_header(std::ostream& os) { os << "instance,format,rel_spec_err,iters\n"; }

void write_error_csv_row(std::ostream& os, const std::string& instance, const std::string& format,
                         const ErrorReport& report) {
  os << instance << ',' << format << ',' << report.rel_spectral_estimate << ',' << report.iterations << '\n';
}

BoundCheck error_bound_check(const Matrix& a, const UniformHMatrix& uh, std::size_t cap) {
  if (static_cast<std::size_t>(a.size()) > cap) throw capacity_error("error_bound_check: instance too large");
  if (static_cast<std::size_t>(a.rows()) != uh.rows() || static_cast<std::size_t>(a.cols()) != uh.cols())
    throw invalid_argument("error_bound_check: dimension mismatch");
  const auto& bct = uh.bct();
  BoundCheck out;
  out.lhs = spectral_norm(a - to_dense(uh, cap));

  double sum = 0.0;
  for (std::size_t t : bct.row_clusters()) {
    const Matrix at = agglomeration(a, bct, Side::row, t);
    const Matrix& u = uh.row_basis().bases[t];
    const double e = spectral_norm(at - u * (u.adjoint() * at));
    sum += e * e;
  }
  for (std::size_t s : bct.col_clusters()) {
    const Matrix as = agglomeration(a, bct, Side::col, s);
    const Matrix& v = uh.col_basis().bases[s];
    const double e = spectral_norm(as - v * (v.adjoint() * as));
    sum += e * e;
  }
  out.rhs = std::sqrt(2.0) * std::sqrt(sum);
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-10);
  return out;
}

ToleranceBudget tolerance_budget(double eps, const BlockClusterTree& bct) {
  if (!(eps > 0.0)) throw invalid_argument("tolerance_budget: eps must be positive");
  const double area = static_cast<double>(bct.row_tree().size()) * static_cast<double>(bct.col_tree().size());
  ToleranceBudget b;
  b.row_eps.assign(bct.row_tree().nodes().size(), 0.0);
  b.col_eps.assign(bct.col_tree().nodes().size(), 0.0);
  for (std::size_t t : bct.row_clusters()) {
    const double local = static_cast<double>(bct.row_tree().node(t).size()) *
                         static_cast<double>(bct.far_field_size_row(t));
    b.row_eps[t] = 0.5 * eps * std::sqrt(local / area);
  }
  for (std::size_t s : bct.col_clusters()) {
    const double local = static_cast<double>(bct.col_tree().node(s).size()) *
                         static_cast<double>(bct.far_field_size_col(s));
    b.col_eps[s] = 0.5 * eps * std::sqrt(local / area);
  }
  return b;
}

std::pair<double, double> budget_areas(const BlockClusterTree& bct) {
  double rows = 0.0, cols = 0.0;
  for (std::size_t t : bct.row_clusters())
    rows += static_cast<double>(bct.row_tree().node(t).size()) * static_cast<double>(bct.far_field_size_row(t));
  for (std::size_t s : bct.col_clusters())
    cols += static_cast<double>(bct.col_tree().node(s).size()) * static_cast<double>(bct.far_field_size_col(s));
  return {rows, cols};
}

ClusterTolerances to_cluster_tolerances(const ToleranceBudget& budget, double scale, std::size_t max_rank) {
  ToleranceSpec base;
  base.mode = TruncationMode::absolute;
  base.max_rank = max_rank;
  base.rel_eps = 0.0;
  auto row = budget.row_eps;
  auto col = budget.col_eps;
  for (auto& e : row) e *= scale;
  for (auto& e : col) e *= scale;
  return ClusterTolerances(base, std::move(row), std::move(col));
}

} // namespace uhm
