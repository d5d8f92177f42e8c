#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "uhm/clustering.hpp"
#include "uhm/errors.hpp"

using namespace uhm;

namespace {

Geometry line(std::initializer_list<double> xs) {
  Geometry g;
  for (double x : xs) {
    g.points.push_back({x, 0, 0});
    g.weights.push_back(1.0);
  }
  return g;
}

std::shared_ptr<const ClusterTree> tree_of(const Geometry& g, std::size_t n_min) {
  return std::make_shared<const ClusterTree>(build_cluster_tree(g, n_min));
}

void check_partition(const ClusterTree& t) {
  for (const auto& c : t.nodes()) {
    CHECK(c.begin < c.end);
    if (c.is_leaf()) continue;
    const auto& a = t.node(c.children[0]);
    const auto& b = t.node(c.children[1]);
    CHECK(a.begin == c.begin);
    CHECK(a.end == b.begin);
    CHECK(b.end == c.end);
    CHECK(a.level == c.level + 1);
    CHECK(b.level == c.level + 1);
    const long diff = static_cast<long>(a.size()) - static_cast<long>(b.size());
    CHECK(std::abs(diff) <= 1);
  }
}

} // namespace

TEST_CASE("collinear points split at the median") {
  const auto t = build_cluster_tree(line({0, 1, 2, 3}), 1);
  CHECK(t.depth() == 3);
  const auto& root = t.root();
  REQUIRE_FALSE(root.is_leaf());
  const auto& left = t.node(root.children[0]);
  const auto& right = t.node(root.children[1]);
  std::set<std::size_t> lset(t.permutation().begin() + left.begin, t.permutation().begin() + left.end);
  std::set<std::size_t> rset(t.permutation().begin() + right.begin, t.permutation().begin() + right.end);
  CHECK(lset == std::set<std::size_t>{0, 1});
  CHECK(rset == std::set<std::size_t>{2, 3});
  CHECK(t.leaves().size() == 4);
  for (auto id : t.leaves()) CHECK(t.node(id).size() == 1);
}

TEST_CASE("large minimal leaf size keeps the root as the only node") {
  const auto g = generate_sphere(101, 1.0, 1);
  const auto t = build_cluster_tree(g, 51);
  CHECK(t.nodes().size() == 1);
  CHECK(t.root().is_leaf());
  CHECK(t.depth() == 1);
  CHECK(build_cluster_tree(g, 500).nodes().size() == 1);
}

TEST_CASE("sphere tree leaves and depth") {
  const auto g = generate_sphere(1000, 1.0, 2);
  const auto t = build_cluster_tree(g, 30);
  for (auto id : t.leaves()) {
    CHECK(t.node(id).size() >= 1);
    CHECK(t.node(id).size() <= 60);
  }
  CHECK(t.depth() <= static_cast<std::size_t>(std::ceil(std::log2(1000.0 / 30.0))) + 2);
  CHECK(t.root().level == 0);
  check_partition(t);
}

TEST_CASE("permutation is a bijection and boxes contain their points") {
  const auto g = generate_torus_knot(777, 2, 3, 1.0, 0.2, 4);
  const auto t = build_cluster_tree(g, 10);
  std::vector<std::size_t> sorted = t.permutation();
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  for (std::size_t pos = 0; pos < t.size(); ++pos) CHECK(t.inverse_permutation()[t.permutation()[pos]] == pos);
  for (const auto& c : t.nodes())
    for (std::size_t pos = c.begin; pos < c.end; ++pos) CHECK(c.box.contains(g.points[t.permutation()[pos]]));
  check_partition(t);
}

TEST_CASE("coincident points fall back to index order") {
  Geometry g;
  for (int i = 0; i < 8; ++i) {
    g.points.push_back({1, 1, 1});
    g.weights.push_back(1.0);
  }
  const auto t = build_cluster_tree(g, 1);
  for (std::size_t i = 0; i < 8; ++i) CHECK(t.permutation()[i] == i);
  CHECK(t.leaves().size() == 8);
}

TEST_CASE("tree construction is deterministic and rejects bad input") {
  const auto g = generate_sphere(500, 1.0, 9);
  CHECK(build_cluster_tree(g, 16).permutation() == build_cluster_tree(g, 16).permutation());
  CHECK_THROWS_AS(build_cluster_tree(g, 0), invalid_argument);
  CHECK_THROWS_AS(build_cluster_tree(Geometry{}, 4), invalid_argument);
}

TEST_CASE("admissibility conditions") {
  const AABB unit{{0, 0, 0}, {1, 1, 1}};
  const AABB far{{3, 3, 3}, {4, 4, 4}};
  const AABB near{{1.05, 1.05, 1.05}, {2.05, 2.05, 2.05}};
  CHECK_FALSE(is_admissible(unit, unit, {10.0, Criterion::weak}));
  CHECK_FALSE(is_admissible(unit, unit, {10.0, Criterion::strong}));
  CHECK(is_admissible(unit, far, {10.0, Criterion::weak}));
  CHECK_FALSE(is_admissible(unit, near, {0.1, Criterion::strong}));

  // Equality is not admissible: dist = 1, diam = sqrt(3), eta = sqrt(3).
  const AABB side{{2, 0, 0}, {3, 1, 1}};
  CHECK_FALSE(is_admissible(unit, side, {std::sqrt(3.0), Criterion::strong}));
  CHECK(is_admissible(unit, side, {std::nextafter(std::sqrt(3.0), 2.0), Criterion::strong}));

  // The weak rule uses the smaller diameter.
  const AABB small{{2, 0, 0}, {2.1, 0.1, 0.1}};
  CHECK(is_admissible(unit, small, {1.0, Criterion::weak}));
  CHECK_FALSE(is_admissible(unit, small, {1.0, Criterion::strong}));
}

TEST_CASE("well separated geometries give one admissible block") {
  Geometry a = generate_sphere(200, 1.0, 1);
  Geometry b = generate_sphere(150, 1.0, 2);
  for (auto& p : b.points) p.x += 100.0;
  const auto bct = build_block_tree(tree_of(a, 16), tree_of(b, 16), {1e6, Criterion::strong});
  REQUIRE(bct->leaves().size() == 1);
  CHECK(bct->admissible().size() == 1);
  CHECK(bct->inadmissible().empty());
  CHECK(bct->leaf(0).row == 0);
  CHECK(bct->leaf(0).col == 0);
  CHECK(sparsity_constant(*bct) == 1);
  CHECK(bct->row_clusters() == std::vector<std::size_t>{0});
  CHECK(bct->far_field_size_row(0) == 150);
  CHECK(bct->far_field_size_col(0) == 200);
}

TEST_CASE("tiny eta makes everything dense") {
  const auto g = generate_sphere(300, 1.0, 3);
  const auto t = tree_of(g, 20);
  const auto bct = build_block_tree(t, t, {1e-12, Criterion::weak});
  CHECK(bct->admissible().empty());
  CHECK(sparsity_constant(*bct) == 0);
  const auto leaves = t->leaves();
  CHECK(bct->inadmissible().size() == leaves.size() * leaves.size());
  for (const auto& b : bct->leaves()) {
    CHECK(t->node(b.row).is_leaf());
    CHECK(t->node(b.col).is_leaf());
  }
  CHECK_THROWS_AS(build_block_tree(t, t, {0.0, Criterion::weak}), invalid_argument);
}

TEST_CASE("block leaves partition the product exactly") {
  const auto g = generate_sphere(400, 1.0, 6);
  const auto t = tree_of(g, 12);
  for (auto crit : {Criterion::weak, Criterion::strong}) {
    const auto bct = build_block_tree(t, t, {2.0, crit});
    std::vector<int> hits(400 * 400, 0);
    for (const auto& b : bct->leaves()) {
      const auto& r = t->node(b.row);
      const auto& c = t->node(b.col);
      for (std::size_t i = r.begin; i < r.end; ++i)
        for (std::size_t j = c.begin; j < c.end; ++j) ++hits[i * 400 + j];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("sphere block tree covers the product and is consistent") {
  const auto g = generate_sphere(2000, 1.0, 7);
  const auto t = tree_of(g, 30);
  const auto bct = build_block_tree(t, t, {10.0, Criterion::weak});
  std::size_t area = 0;
  for (const auto& b : bct->leaves()) area += bct->rows(b) * bct->cols(b);
  CHECK(area == 2000u * 2000u);
  CHECK_FALSE(bct->admissible().empty());

  for (auto id : bct->admissible()) {
    const auto& b = bct->leaf(id);
    CHECK(b.admissible);
    CHECK(is_admissible(t->node(b.row).box, t->node(b.col).box, bct->params()));
    const auto& rb = bct->row_blocks(b.row);
    const auto& cb = bct->col_blocks(b.col);
    CHECK(std::find(rb.begin(), rb.end(), id) != rb.end());
    CHECK(std::find(cb.begin(), cb.end(), id) != cb.end());
  }
  for (auto id : bct->inadmissible()) {
    const auto& b = bct->leaf(id);
    CHECK_FALSE(b.admissible);
    CHECK(t->node(b.row).is_leaf());
    CHECK(t->node(b.col).is_leaf());
  }

  std::map<std::size_t, std::size_t> per_row, per_col;
  for (auto id : bct->admissible()) {
    ++per_row[bct->leaf(id).row];
    ++per_col[bct->leaf(id).col];
  }
  std::size_t brute = 0;
  for (const auto& [c, k] : per_row) brute = std::max(brute, k);
  for (const auto& [c, k] : per_col) brute = std::max(brute, k);
  CHECK(sparsity_constant(*bct) == brute);

  std::vector<std::size_t> lrc;
  for (const auto& [c, k] : per_row) lrc.push_back(c);
  CHECK(bct->row_clusters() == lrc);
  for (std::size_t id = 0; id < t->nodes().size(); ++id) {
    CHECK(bct->row_blocks(id).size() == (per_row.count(id) ? per_row[id] : 0));
    std::size_t far = 0;
    for (auto b : bct->row_blocks(id)) {
      CHECK(bct->leaf(b).row == id);
      far += bct->cols(bct->leaf(b));
    }
    CHECK(bct->far_field_size_row(id) == far);
  }
}

TEST_CASE("one-sided subdivision when only one cluster is a leaf") {
  const auto small = tree_of(line({0, 1}), 2);
  const auto big = tree_of(line({0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5}), 1);
  const auto bct = build_block_tree(small, big, {1e-9, Criterion::weak});
  for (const auto& b : bct->leaves()) {
    CHECK(b.row == 0);
    CHECK(big->node(b.col).is_leaf());
  }
  CHECK(bct->leaves().size() == 8);
}

TEST_CASE("storage bounds") {
  const auto g = generate_sphere(50, 1.0, 1);
  Geometry far = g;
  for (auto& p : far.points) p.z += 50.0;
  const auto bct = build_block_tree(tree_of(g, 100), tree_of(far, 100), {10.0, Criterion::weak});
  REQUIRE(bct->admissible().size() == 1);
  CHECK(storage_bounds(*bct, 0, 3).h_bound == 0.0);
  CHECK(storage_bounds(*bct, 4, 0).h_bound == 2.0 * 4 * 50);
  const auto sb = storage_bounds(*bct, 4, 3);
  CHECK(sb.uh_bound == doctest::Approx(3.0 * 100 + 9.0 * 2 * 1 * 50 / 100.0));
}

TEST_CASE("dumps list every node and leaf") {
  const auto t = tree_of(generate_sphere(100, 1.0, 1), 10);
  std::ostringstream os;
  t->dump(os);
  const auto text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(t->nodes().size()) + 1);
  const auto bct = build_block_tree(t, t, {2.0, Criterion::weak});
  std::ostringstream bs;
  bct->dump(bs);
  const auto btext = bs.str();
  CHECK(std::count(btext.begin(), btext.end(), '\n') == static_cast<long>(bct->leaves().size()) + 1);
}
