#pragma once

#include <memory>
#include <random>

#include "uhm/hmatrix.hpp"

namespace uhm::testing {

struct Problem {
  Geometry geometry;
  std::shared_ptr<const ClusterTree> tree;
  std::shared_ptr<const BlockClusterTree> bct;
  std::unique_ptr<EntryOracle> oracle;
};

inline Problem make_problem(const Geometry& g, double eta = 10.0, double kappa = 0.0, std::size_t n_min = 30,
                            Criterion criterion = Criterion::weak) {
  Problem p;
  p.geometry = g;
  p.tree = std::make_shared<const ClusterTree>(build_cluster_tree(g, n_min));
  p.bct = build_block_tree(p.tree, p.tree, {eta, criterion});
  KernelSpec k{kappa > 0.0 ? KernelKind::helmholtz : KernelKind::laplace, kappa, default_reg_dist(g)};
  p.oracle = std::make_unique<EntryOracle>(g, g, k, *p.tree, *p.tree);
  return p;
}

inline Problem sphere_problem(std::size_t n, std::uint64_t seed = 1, double eta = 10.0, double kappa = 0.0,
                              std::size_t n_min = 30) {
  return make_problem(generate_sphere(n, 1.0, seed), eta, kappa, n_min);
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(static_cast<idx_t>(n));
  for (auto& c : v) c = cplx(d(rng), d(rng));
  return v / v.norm();
}

inline Matrix random_matrix(idx_t m, idx_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Matrix a(m, n);
  for (idx_t j = 0; j < n; ++j)
    for (idx_t i = 0; i < m; ++i) a(i, j) = cplx(d(rng), d(rng));
  return a;
}

inline double rel_diff(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

} // namespace uhm::testing
