#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "uhm/errors.hpp"

using namespace uhm;
using namespace uhm::testing;

TEST_CASE("block-dense H-matrix is the oracle matrix") {
  auto p = sphere_problem(300, 2, 1e-12, 0.0, 20);
  REQUIRE(p.bct->admissible().empty());
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  CHECK(to_dense(h) == p.oracle->dense());
  const auto rep = storage_report(h);
  CHECK(rep.adm_elements == 0);
  CHECK(rep.dense_elements == 300u * 300u);
  CHECK(rep.total_elements == rep.dense_elements);
  CHECK(rep.bytes_estimate == 16.0 * 300 * 300);
}

TEST_CASE("sphere H-matrix is accurate in Frobenius norm") {
  auto p = sphere_problem(1500, 3);
  AssemblyStats st;
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 2, Pivoting::partial, &st);
  CHECK(st.aca_calls == p.bct->admissible().size());
  const Matrix d = p.oracle->dense();
  CHECK((d - to_dense(h)).norm() / d.norm() <= 1e-3);
  for (auto b : p.bct->admissible()) {
    const auto& f = h.lowrank(b);
    CHECK(f.rows() == static_cast<idx_t>(p.bct->rows(p.bct->leaf(b))));
    CHECK(f.cols() == static_cast<idx_t>(p.bct->cols(p.bct->leaf(b))));
    CHECK(orthonormality_error(f.U) <= 1e-12 * static_cast<double>(f.rank()));
    CHECK(orthonormality_error(f.V) <= 1e-12 * static_cast<double>(f.rank()));
  }
}

TEST_CASE("helmholtz H-matrix with rook pivoting") {
  auto p = sphere_problem(1000, 4, 10.0, 8.0);
  const Matrix d = p.oracle->dense();
  for (auto piv : {Pivoting::partial, Pivoting::rook}) {
    const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1, piv);
    CHECK((d - to_dense(h)).norm() / d.norm() <= 1e-3);
  }
}

TEST_CASE("assembly does not depend on the worker count") {
  auto p = sphere_problem(1200, 5);
  const auto h1 = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  const auto h8 = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 8);
  for (auto b : p.bct->admissible()) {
    CHECK(h1.lowrank(b).U == h8.lowrank(b).U);
    CHECK(h1.lowrank(b).sigma == h8.lowrank(b).sigma);
    CHECK(h1.lowrank(b).V == h8.lowrank(b).V);
  }
  for (auto b : p.bct->inadmissible()) CHECK(h1.dense(b) == h8.dense(b));
}

TEST_CASE("matvec against the dense matrix") {
  auto p = sphere_problem(800, 6);
  const double eps = 1e-4;
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{eps}, ToleranceSpec{eps / 10}, 1);
  const Matrix d = p.oracle->dense();
  const Matrix hd = to_dense(h);

  CHECK(matvec_h(h, Vector::Zero(800), 1).isZero(0.0));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Vector v = random_vector(800, seed);
    MatvecStats st;
    const Vector w1 = matvec_h(h, v, 1, &st);
    CHECK(st.leaves_visited == p.bct->leaves().size());
    const Vector w8 = matvec_h(h, v, 8, &st);
    CHECK(st.leaves_visited == p.bct->leaves().size());
    CHECK(rel_diff(w1, d * v) <= 10 * eps);
    CHECK(rel_diff(w8, w1) <= 1e-12);
    CHECK(rel_diff(w1, hd * v) <= 1e-12);
    CHECK(rel_diff(adjoint_matvec_h(h, v, 3), hd.adjoint() * v) <= 1e-12);
  }

  const Vector u = random_vector(800, 11), v = random_vector(800, 12);
  const cplx alpha(0.3, -1.2), beta(-2.0, 0.5);
  const Vector lhs = matvec_h(h, alpha * u + beta * v, 4);
  const Vector rhs = alpha * matvec_h(h, u, 4) + beta * matvec_h(h, v, 4);
  CHECK(rel_diff(lhs, rhs) <= 1e-12);

  CHECK_THROWS_AS(matvec_h(h, Vector::Zero(799), 1), invalid_argument);
  CHECK_THROWS_AS(adjoint_matvec_h(h, Vector::Zero(7), 1), invalid_argument);
}

TEST_CASE("approximation keeps the matrix nearly symmetric") {
  auto p = sphere_problem(900, 7, 10.0, 5.0);
  const double eps = 1e-4;
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{eps}, ToleranceSpec{eps / 10}, 1);
  const Matrix hd = to_dense(h);
  const double norm_a = spectral_norm(p.oracle->dense());
  CHECK(spectral_norm(hd - hd.transpose()) <= 2 * eps * norm_a);
}

TEST_CASE("single admissible block storage") {
  Geometry g = generate_sphere(40, 1.0, 1);
  Geometry far = generate_sphere(25, 1.0, 2);
  for (auto& pt : far.points) pt.x += 30.0;
  auto rows = std::make_shared<const ClusterTree>(build_cluster_tree(g, 100));
  auto cols = std::make_shared<const ClusterTree>(build_cluster_tree(far, 100));
  auto bct = build_block_tree(rows, cols, {10.0, Criterion::weak});
  REQUIRE(bct->admissible().size() == 1);
  EntryOracle o(g, far, KernelSpec{}, *rows, *cols);
  const auto h = assemble_h(o, bct, ToleranceSpec{1e-6}, ToleranceSpec{1e-7}, 1);
  const auto k = static_cast<std::size_t>(h.lowrank(0).rank());
  REQUIRE(k > 0);
  const auto rep = storage_report(h);
  CHECK(rep.adm_elements == k * (40 + 25 + 1));
  CHECK(rep.adm_factor_elements == k * (40 + 25));
  CHECK(rep.dense_elements == 0);
  CHECK(rep.k_max == k);
  CHECK(rep.c_sp == 1);
  const Matrix hd = to_dense(h);
  CHECK((hd - h.lowrank(0).to_dense()).norm() == 0.0);
  CHECK((hd - o.dense()).norm() <= 1e-5 * o.dense().norm());
}

TEST_CASE("storage stays below the log-linear bound") {
  for (auto [n, eta, kappa] : std::vector<std::tuple<std::size_t, double, double>>{
           {800, 10.0, 0.0}, {1500, 2.0, 0.0}, {1200, 10.0, 6.0}, {1000, 50.0, 0.0}}) {
    auto p = sphere_problem(n, n, eta, kappa);
    const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
    const auto rep = storage_report(h);
    const auto bound = storage_bounds(*p.bct, rep.k_max, rep.l_max);
    CHECK(static_cast<double>(rep.adm_factor_elements) <= bound.h_bound);
    CHECK(static_cast<double>(rep.adm_elements) <= bound.h_bound);
    CHECK(rep.total_elements == rep.adm_elements + rep.dense_elements);
    CHECK(rep.c_sp == sparsity_constant(*p.bct));
    CHECK(rep.depth_row == p.tree->depth());
  }
}

TEST_CASE("dense reconstruction is capped") {
  auto p = sphere_problem(300, 8);
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  CHECK_THROWS_AS(to_dense(h, 1000), capacity_error);
}

TEST_CASE("structure dump") {
  auto p = sphere_problem(600, 9);
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  std::ostringstream os;
  write_structure_csv(h, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "block_id,row_lo,row_hi,col_lo,col_hi,kind,rank");
  std::size_t rows = 0, adm = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (line.find(",adm,") != std::string::npos) ++adm;
  }
  CHECK(rows == p.bct->leaves().size());
  CHECK(adm == p.bct->admissible().size());
}

TEST_CASE("constructor validates per-block storage") {
  auto p = sphere_problem(300, 10);
  const auto h = assemble_h(*p.oracle, p.bct, ToleranceSpec{1e-4}, ToleranceSpec{1e-5}, 1);
  std::vector<SVDForm> lowrank(p.bct->leaves().size());
  CHECK_THROWS_AS(HMatrix(p.bct, lowrank, h.dense_leaves(), ToleranceSpec{}, ToleranceSpec{}), invalid_argument);
}
