#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "uhm/errors.hpp"
#include "uhm/verification.hpp"

using namespace uhm;
using namespace uhm::testing;

namespace {

NormEstimate estimate(const Matrix& a, std::size_t iters = 50, std::uint64_t seed = 1, double stagnation = 1e-6) {
  const auto op = as_operator(a);
  return spectral_norm_estimate(op.apply, op.apply_adjoint, op.cols, iters, seed, stagnation);
}

} // namespace

TEST_CASE("power iteration on simple matrices") {
  CHECK(estimate(Matrix::Identity(100, 100)).value == doctest::Approx(1.0).epsilon(1e-12));
  Matrix d = Matrix::Zero(50, 50);
  for (idx_t i = 0; i < 50; ++i) d(i, i) = 1.0;
  d(0, 0) = 3.0;
  CHECK(estimate(d).value == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(estimate(Matrix::Zero(20, 20)).value == 0.0);
}

TEST_CASE("power iteration on random matrices") {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix a = random_matrix(100, 100, rng);
    const double exact = spectral_norm(a);
    const auto est = estimate(a, 3000, seed, 1e-13);
    CHECK(est.value <= exact * (1 + 1e-12));
    CHECK(std::abs(est.value - exact) <= 1e-4 * exact);
    REQUIRE(est.history.size() == est.iterations);
    for (std::size_t i = 1; i < est.history.size(); ++i)
      CHECK(est.history[i] >= est.history[i - 1] * (1 - 1e-12));
  }
  const Matrix rect = random_matrix(70, 30, rng);
  CHECK(std::abs(estimate(rect, 3000, 1, 1e-13).value - spectral_norm(rect)) <= 1e-6 * spectral_norm(rect));
}

TEST_CASE("estimates are reproducible") {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(60, 60, rng);
  const auto e1 = estimate(a, 30, 7), e2 = estimate(a, 30, 7);
  CHECK(e1.value == e2.value);
  CHECK(e1.history == e2.history);
}

TEST_CASE("compression error of an exact copy") {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(80, 80, rng);
  const Matrix b = a;
  const auto r = compression_error(as_operator(a), as_operator(b));
  CHECK(r.rel_spectral_estimate <= 1e-12);
  CHECK(r.ref_norm > 0.0);
  const Matrix c = a + 1e-3 * Matrix::Identity(80, 80);
  const auto r2 = compression_error(as_operator(a), as_operator(c));
  CHECK(r2.diff_norm == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("operator views agree") {
  auto p = sphere_problem(800, 4);
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  const auto u = compress_h_to_uh(h, ClusterTolerances(ToleranceSpec{1e-4}));
  const Matrix d = p.oracle->dense();
  const Vector v = random_vector(800, 5);
  const auto od = as_operator(d), oo = as_operator(*p.oracle), oh = as_operator(h, 2), ou = as_operator(u, 2);
  CHECK(rel_diff(oo.apply(v), d * v) <= 1e-13);
  CHECK(rel_diff(oo.apply_adjoint(v), d.adjoint() * v) <= 1e-13);
  CHECK(rel_diff(oh.apply_adjoint(v), to_dense(h).adjoint() * v) <= 1e-12);
  CHECK(rel_diff(ou.apply(v), to_dense(u) * v) <= 1e-12);
  const auto diff = difference(od, oh);
  CHECK((diff.apply(v) - (d - to_dense(h)) * v).norm() <= 1e-13 * (d * v).norm());

  const auto eh = compression_error(oo, oh);
  const auto eu = compression_error(oo, ou);
  CHECK(eh.rel_spectral_estimate <= 1e-3);
  CHECK(eu.rel_spectral_estimate <= 1e-3);
  CHECK(eh.rel_spectral_estimate <= spectral_norm(d - to_dense(h)) / spectral_norm(d) * (1 + 1e-8));
  CHECK(eh.ref_norm == doctest::Approx(spectral_norm(d)).epsilon(1e-4));

  std::ostringstream os;
  write_error_csv_header(os);
  write_error_csv_row(os, "sphere", "h", eh);
  CHECK(os.str().rfind("instance,format,rel_spec_err,iters\nsphere,h,", 0) == 0);
}

TEST_CASE("error bound without truncation") {
  auto p = sphere_problem(500, 6);
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  const auto u = compress_h_to_uh(h, ClusterTolerances(ToleranceSpec{0.0}));
  const Matrix hd = to_dense(h);
  const auto c = error_bound_check(hd, u);
  CHECK(c.lhs <= 1e-12 * spectral_norm(hd));
  CHECK(c.rhs <= 1e-12 * spectral_norm(hd));
  CHECK_THROWS_AS(error_bound_check(hd, u, 1000), capacity_error);
  CHECK_THROWS_AS(error_bound_check(Matrix::Zero(3, 3), u), invalid_argument);
}

TEST_CASE("error bound holds across instances") {
  for (std::size_t n : {400, 600})
    for (double eps : {1e-2, 1e-4})
      for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        auto p = sphere_problem(n, seed, n == 400 ? 2.0 : 10.0, seed == 2 ? 4.0 : 0.0);
        const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{eps / 3}, ToleranceSpec{eps / 10}, 1);
        const auto u = compress_h_to_uh(h, ClusterTolerances(ToleranceSpec{eps / 3}));
        const auto c = error_bound_check(to_dense(h), u);
        CHECK(c.holds);
        CHECK(c.lhs <= c.rhs * (1 + 1e-10));
      }
}

TEST_CASE("tolerance budget") {
  auto p = sphere_problem(1200, 7);
  const auto& bct = *p.bct;
  const double eps = 1e-3;
  const auto b = tolerance_budget(eps, bct);
  REQUIRE(b.row_eps.size() == bct.row_tree().nodes().size());
  const double area = 1200.0 * 1200.0;
  for (std::size_t t = 0; t < b.row_eps.size(); ++t) {
    if (bct.row_blocks(t).empty()) {
      CHECK(b.row_eps[t] == 0.0);
      continue;
    }
    CHECK(b.row_eps[t] > 0.0);
    CHECK(b.row_eps[t] <= eps / 2);
    const double local = static_cast<double>(bct.row_tree().node(t).size() * bct.far_field_size_row(t));
    CHECK(b.row_eps[t] == doctest::Approx(0.5 * eps * std::sqrt(local / area)));
  }
  const auto [rows, cols] = budget_areas(bct);
  CHECK(rows <= area);
  CHECK(cols <= area);
  double sq = 0.0;
  for (double e : b.row_eps) sq += e * e;
  for (double e : b.col_eps) sq += e * e;
  CHECK(sq <= eps * eps / 2 * (1 + 1e-12));
  CHECK_THROWS_AS(tolerance_budget(0.0, bct), invalid_argument);

  // One block covering everything: the budget is eps / 2 on both sides.
  Geometry g = generate_sphere(40, 1.0, 1), far = generate_sphere(30, 1.0, 2);
  for (auto& pt : far.points) pt.x += 40.0;
  auto rt = std::make_shared<const ClusterTree>(build_cluster_tree(g, 100));
  auto ct = std::make_shared<const ClusterTree>(build_cluster_tree(far, 100));
  auto single = build_block_tree(rt, ct, {10.0, Criterion::weak});
  const auto b1 = tolerance_budget(eps, *single);
  CHECK(b1.row_eps[0] == doctest::Approx(eps / 2));
  CHECK(b1.col_eps[0] == doctest::Approx(eps / 2));
}

TEST_CASE("budgeted compression meets the global target") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto p = sphere_problem(600, seed, 2.0);
    const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-6}, ToleranceSpec{1e-7}, 1);
    const Matrix hd = to_dense(h);
    const double norm = spectral_norm(hd);
    for (double eps : {1e-2, 1e-4}) {
      const auto tol = to_cluster_tolerances(tolerance_budget(eps, *p.bct), norm);
      CHECK(tol.at(Side::row, p.bct->row_clusters().front()).mode == TruncationMode::absolute);
      const auto u = compress_h_to_uh(h, tol);
      const auto c = error_bound_check(hd, u);
      CHECK(c.holds);
      CHECK(c.rhs <= eps * norm * (1 + 1e-10));
      CHECK(c.lhs <= eps * norm);
    }
  }
}
