#include "uhm/uniform.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <tuple>

#include "uhm/errors.hpp"
#include "uhm/parallel.hpp"

namespace uhm {

ToleranceSpec ClusterTolerances::at(Side side, std::size_t cluster) const {
  const auto& table = side == Side::row ? row_eps_ : col_eps_;
  if (table.empty()) return base_;
  ToleranceSpec t = base_;
  t.rel_eps = table.at(cluster);
  return t;
}

std::size_t ClusterBasis::max_rank() const {
  std::size_t l = 0;
  for (const auto& b : bases) l = std::max(l, static_cast<std::size_t>(b.cols()));
  return l;
}

namespace {

const Cluster& cluster_of(const BlockClusterTree& bct, Side side, std::size_t id) {
  return side == Side::row ? bct.row_tree().node(id) : bct.col_tree().node(id);
}

const std::vector<std::size_t>& blocks_of(const BlockClusterTree& bct, Side side, std::size_t id) {
  return side == Side::row ? bct.row_blocks(id) : bct.col_blocks(id);
}

std::vector<std::size_t> by_size_desc(const BlockClusterTree& bct, Side side, std::vector<std::size_t> ids) {
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return cluster_of(bct, side, a).size() > cluster_of(bct, side, b).size();
  });
  return ids;
}

struct Extracted {
  Matrix basis; ///< |tau| x l, orthonormal
  Matrix coeff; ///< basis^* proxy, l x ncols
};

// Column-pivoted Gram-Schmidt QR that stops once every remaining column norm
// is at or below the cut.
Extracted pivoted_qr_basis(const Matrix& proxy, const ToleranceSpec& tol) {
  const idx_t m = proxy.rows();
  const idx_t n = proxy.cols();
  Matrix residual = proxy;
  Matrix q(m, std::min(m, n));
  idx_t l = 0;
  double cut = tol.mode == TruncationMode::absolute ? tol.rel_eps : 0.0;
  const auto max_rank = static_cast<idx_t>(std::min<std::size_t>(tol.max_rank, static_cast<std::size_t>(q.cols())));
  while (l < max_rank) {
    idx_t j = 0;
    const double best = residual.colwise().norm().maxCoeff(&j);
    if (l == 0 && tol.mode == TruncationMode::relative) cut = tol.rel_eps * best;
    if (best <= cut || best <= tol.abs_floor) break;
    Vector v = residual.col(j) / best;
    for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(l) * (q.leftCols(l).adjoint() * v);
    v.normalize();
    q.col(l) = v;
    residual -= v * (v.adjoint() * residual);
    ++l;
  }
  Matrix basis = q.leftCols(l);
  Matrix coeff = basis.adjoint() * proxy;
  return {std::move(basis), std::move(coeff)};
}

Extracted extract_basis(const Matrix& proxy, const ToleranceSpec& tol, RankRevealing method) {
  if (method == RankRevealing::pivoted_qr) return pivoted_qr_basis(proxy, tol);
  const ThinSVD svd = thin_svd(proxy);
  const auto l = static_cast<idx_t>(truncation_rank(svd.sigma, tol));
  Matrix coeff = svd.sigma.head(l).cast<cplx>().asDiagonal() * svd.V.leftCols(l).adjoint();
  return {svd.U.leftCols(l), std::move(coeff)};
}

// Z with Z R^* = T for upper-triangular R, restricted to the leading minor
// of R whose diagonal is numerically nonzero; remaining columns of Z are 0.
Matrix solve_adjoint_upper_right(const Matrix& t, const Matrix& r) {
  Matrix z = Matrix::Zero(t.rows(), r.cols());
  const idx_t p = std::min(r.rows(), r.cols());
  double dmax = 0.0;
  for (idx_t i = 0; i < p; ++i) dmax = std::max(dmax, std::abs(r(i, i)));
  idx_t rank = 0;
  while (rank < p && std::abs(r(rank, rank)) > 1e-14 * dmax) ++rank;
  if (rank == 0) return z;
  const Matrix lead = r.topLeftCorner(rank, rank);
  const Matrix zt = lead.triangularView<Eigen::Upper>().solve(Matrix(t.leftCols(rank).adjoint()));
  z.leftCols(rank) = zt.adjoint();
  return z;
}

} // namespace

UniformHMatrix::UniformHMatrix(std::shared_ptr<const BlockClusterTree> bct, ClusterBasis row_basis,
                               ClusterBasis col_basis, std::vector<CoefficientPair> coeffs,
                               std::shared_ptr<const DenseLeaves> dense)
    : bct_(std::move(bct)), row_basis_(std::move(row_basis)), col_basis_(std::move(col_basis)),
      coeffs_(std::move(coeffs)), dense_(std::move(dense)) {
  if (coeffs_.size() != bct_->leaves().size() || !dense_ || dense_->size() != bct_->leaves().size())
    throw invalid_argument("UniformHMatrix: per-block storage does not match the block tree");
  if (row_basis_.bases.size() != bct_->row_tree().nodes().size() ||
      col_basis_.bases.size() != bct_->col_tree().nodes().size())
    throw invalid_argument("UniformHMatrix: basis tables do not match the cluster trees");
  for (std::size_t b : bct_->admissible()) {
    const auto& blk = bct_->leaf(b);
    const auto& c = coeffs_[b];
    const auto lt = static_cast<idx_t>(row_basis_.rank(blk.row));
    const auto ls = static_cast<idx_t>(col_basis_.rank(blk.col));
    const bool ok = c.merged ? (c.S_X.rows() == lt && c.S_X.cols() == ls)
                             : (c.S_X.rows() == lt && c.S_Y.rows() == ls && c.S_X.cols() == c.S_Y.cols());
    if (!ok) throw invalid_argument("UniformHMatrix: coefficient shape mismatch in block " + std::to_string(b));
  }
  row_order_ = by_size_desc(*bct_, Side::row, bct_->row_clusters());
  col_order_ = by_size_desc(*bct_, Side::col, bct_->col_clusters());
  dense_order_ = largest_first(*bct_, bct_->inadmissible());
}

Matrix UniformHMatrix::block_dense(std::size_t block) const {
  const auto& blk = bct_->leaf(block);
  return row_basis_.bases[blk.row] * coeffs_.at(block).coupling() * col_basis_.bases[blk.col].adjoint();
}

void UniformHMatrix::multiply_out_coefficients() {
  for (std::size_t b : bct_->admissible()) {
    auto& c = coeffs_[b];
    if (c.merged) continue;
    c.S_X = c.coupling();
    c.S_Y = Matrix();
    c.merged = true;
  }
}

Matrix agglomeration(const Matrix& a, const BlockClusterTree& bct, Side side, std::size_t cluster) {
  const auto& blocks = blocks_of(bct, side, cluster);
  const auto& c = cluster_of(bct, side, cluster);
  std::size_t width = 0;
  for (std::size_t b : blocks) width += side == Side::row ? bct.cols(bct.leaf(b)) : bct.rows(bct.leaf(b));
  Matrix out(static_cast<idx_t>(c.size()), static_cast<idx_t>(width));
  idx_t off = 0;
  for (std::size_t b : blocks) {
    const auto& blk = bct.leaf(b);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    const auto sub = a.block(static_cast<idx_t>(ct.begin), static_cast<idx_t>(cs.begin),
                             static_cast<idx_t>(ct.size()), static_cast<idx_t>(cs.size()));
    if (side == Side::row) {
      out.middleCols(off, sub.cols()) = sub;
      off += sub.cols();
    } else {
      out.middleCols(off, sub.rows()) = sub.adjoint();
      off += sub.rows();
    }
  }
  return out;
}

ClusterBasis optimal_cluster_basis_reference(const Matrix& a, const BlockClusterTree& bct, Side side,
                                             const ClusterTolerances& eps, std::size_t cap) {
  if (static_cast<std::size_t>(a.size()) > cap)
    throw capacity_error("optimal_cluster_basis_reference: dense input exceeds element cap");
  if (static_cast<std::size_t>(a.rows()) != bct.row_tree().size() ||
      static_cast<std::size_t>(a.cols()) != bct.col_tree().size())
    throw invalid_argument("optimal_cluster_basis_reference: matrix does not match the block tree");
  ClusterBasis basis;
  basis.bases.resize(side == Side::row ? bct.row_tree().nodes().size() : bct.col_tree().nodes().size());
  basis.clusters = side == Side::row ? bct.row_clusters() : bct.col_clusters();
  for (std::size_t c : basis.clusters)
    basis.bases[c] = extract_basis(agglomeration(a, bct, side, c), eps.at(side, c), RankRevealing::svd).basis;
  return basis;
}

UniformHMatrix compress_h_to_uh(const HMatrix& h, const ClusterTolerances& eps, RankRevealing method,
                                std::size_t workers) {
  const auto& bct = h.bct();
  ClusterBasis row_basis, col_basis;
  row_basis.bases.resize(bct.row_tree().nodes().size());
  col_basis.bases.resize(bct.col_tree().nodes().size());
  row_basis.clusters = bct.row_clusters();
  col_basis.clusters = bct.col_clusters();
  std::vector<CoefficientPair> coeffs(bct.leaves().size());

  // Row side uses X_b = U_b Sigma_b, Y_b = V_b; column side swaps the roles.
  auto process = [&](Side side, std::size_t cluster) {
    const auto& blocks = blocks_of(bct, side, cluster);
    const auto& c = cluster_of(bct, side, cluster);
    std::size_t ktot = 0;
    for (std::size_t b : blocks) ktot += static_cast<std::size_t>(h.lowrank(b).rank());

    Matrix proxy(static_cast<idx_t>(c.size()), static_cast<idx_t>(ktot));
    std::vector<Matrix> triangles;
    triangles.reserve(blocks.size());
    idx_t off = 0;
    for (std::size_t b : blocks) {
      const auto& f = h.lowrank(b);
      const Matrix scaled_u = f.U * f.sigma.cast<cplx>().asDiagonal();
      const Matrix& mine = side == Side::row ? scaled_u : f.V;
      const Matrix& other = side == Side::row ? f.V : scaled_u;
      Matrix q, r;
      thin_qr(other, q, r);
      proxy.middleCols(off, f.rank()) = mine * r.adjoint();
      triangles.push_back(std::move(r));
      off += f.rank();
    }

    Extracted ex = extract_basis(proxy, eps.at(side, cluster), method);
    off = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const idx_t k = h.lowrank(blocks[i]).rank();
      Matrix s = solve_adjoint_upper_right(ex.coeff.middleCols(off, k), triangles[i]);
      (side == Side::row ? coeffs[blocks[i]].S_X : coeffs[blocks[i]].S_Y) = std::move(s);
      off += k;
    }
    (side == Side::row ? row_basis : col_basis).bases[cluster] = std::move(ex.basis);
  };

  const auto& lrc = bct.row_clusters();
  const auto& lcc = bct.col_clusters();
  parallel_dynamic(lrc.size() + lcc.size(), resolve_workers(workers), [&](std::size_t t, std::size_t) {
    if (t < lrc.size()) process(Side::row, lrc[t]);
    else process(Side::col, lcc[t - lrc.size()]);
  });
  return UniformHMatrix(h.bct_ptr(), std::move(row_basis), std::move(col_basis), std::move(coeffs),
                        h.dense_leaves());
}

FactorStore::FactorStore(const EntryOracle& oracle, const BlockClusterTree& bct, BlockBuildSettings settings)
    : oracle_(oracle), bct_(bct), settings_(settings), slots_(bct.leaves().size()) {}

void FactorStore::retain_one() {
  const long now = ++live_;
  long peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
}

void FactorStore::supply(std::size_t block, SVDForm factors) {
  Slot& s = slots_.at(block);
  std::lock_guard lock(s.mutex);
  if (s.computed) throw invalid_argument("FactorStore::supply: block already has factors");
  s.f = std::move(factors);
  s.computed = true;
  retain_one();
}

FactorStore::Consumed FactorStore::consume(std::size_t block, Side side) {
  Slot& s = slots_.at(block);
  std::lock_guard lock(s.mutex);
  if (!s.computed) {
    const auto& blk = bct_.leaf(block);
    const auto& ct = bct_.row_tree().node(blk.row);
    const auto& cs = bct_.col_tree().node(blk.col);
    const EntryFn fn = [this, r0 = ct.begin, c0 = cs.begin](idx_t i, idx_t j) {
      return oracle_(r0 + static_cast<std::size_t>(i), c0 + static_cast<std::size_t>(j));
    };
    AcaStats st;
    const auto f = aca(fn, static_cast<idx_t>(ct.size()), static_cast<idx_t>(cs.size()), settings_.aca,
                       settings_.pivoting, &st);
    s.f = recompress(f, settings_.recompress);
    s.computed = true;
    s.entries += st.entries;
    ++s.aca_calls;
    ++aca_calls_;
    retain_one();
  }
  bool& done = side == Side::row ? s.row_done : s.col_done;
  if (done) throw invalid_argument("FactorStore::consume: block consumed twice from the same side");
  Matrix& part = side == Side::row ? s.f.U : s.f.V;
  Consumed out{part * s.f.sigma.cast<cplx>().asDiagonal(), s.f.sigma};
  part = Matrix();
  done = true;
  if (s.row_done && s.col_done) {
    s.f.sigma = RealVector();
    --live_;
  }
  return out;
}

ClusterBuildResult build_cluster(const BlockClusterTree& bct, Side side, std::size_t cluster,
                                 const ToleranceSpec& eps_cluster, FactorStore& shared, RankRevealing method) {
  const auto& blocks = blocks_of(bct, side, cluster);
  const auto& c = cluster_of(bct, side, cluster);

  std::vector<FactorStore::Consumed> parts;
  parts.reserve(blocks.size());
  idx_t ktot = 0;
  for (std::size_t b : blocks) {
    parts.push_back(shared.consume(b, side));
    ktot += parts.back().sigma.size();
  }
  Matrix proxy(static_cast<idx_t>(c.size()), ktot);
  idx_t off = 0;
  for (const auto& p : parts) {
    proxy.middleCols(off, p.scaled.cols()) = p.scaled;
    off += p.scaled.cols();
  }

  Extracted ex = extract_basis(proxy, eps_cluster, method);
  ClusterBuildResult out;
  out.coefficients.reserve(blocks.size());
  off = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const RealVector& sigma = parts[i].sigma;
    const idx_t k = sigma.size();
    const RealVector inv_sqrt = sigma.cwiseSqrt().cwiseInverse();
    out.coefficients.emplace_back(blocks[i], ex.coeff.middleCols(off, k) * inv_sqrt.cast<cplx>().asDiagonal());
    off += k;
  }
  out.basis = std::move(ex.basis);
  return out;
}

DirectBuildOptions uniform_split(double eps, Pivoting pivoting) {
  DirectBuildOptions o;
  o.blocks.aca = ToleranceSpec{eps / 3.0};
  o.blocks.recompress = ToleranceSpec{eps / 10.0};
  o.blocks.pivoting = pivoting;
  o.basis = ClusterTolerances(ToleranceSpec{eps / 3.0});
  return o;
}

UniformHMatrix direct_build_uh(const EntryOracle& oracle, std::shared_ptr<const BlockClusterTree> bct,
                               const DirectBuildOptions& options, std::size_t workers, DirectBuildStats* stats) {
  if (oracle.rows() != bct->row_tree().size() || oracle.cols() != bct->col_tree().size())
    throw invalid_argument("direct_build_uh: oracle dimensions do not match the block tree");
  workers = resolve_workers(workers);

  struct Task {
    std::size_t size;
    std::size_t cluster;
    Side side;
  };
  std::vector<Task> tasks;
  for (std::size_t t : bct->row_clusters()) tasks.push_back({bct->row_tree().node(t).size(), t, Side::row});
  for (std::size_t s : bct->col_clusters()) tasks.push_back({bct->col_tree().node(s).size(), s, Side::col});
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::make_tuple(-static_cast<long long>(a.size), a.cluster, a.side == Side::col) <
           std::make_tuple(-static_cast<long long>(b.size), b.cluster, b.side == Side::col);
  });

  FactorStore store(oracle, *bct, options.blocks);
  ClusterBasis row_basis, col_basis;
  row_basis.bases.resize(bct->row_tree().nodes().size());
  col_basis.bases.resize(bct->col_tree().nodes().size());
  row_basis.clusters = bct->row_clusters();
  col_basis.clusters = bct->col_clusters();
  std::vector<CoefficientPair> coeffs(bct->leaves().size());

  parallel_dynamic(tasks.size(), workers, [&](std::size_t i, std::size_t) {
    const Task& task = tasks[i];
    auto res = build_cluster(*bct, task.side, task.cluster, options.basis.at(task.side, task.cluster), store,
                             options.method);
    for (auto& [b, s] : res.coefficients) (task.side == Side::row ? coeffs[b].S_X : coeffs[b].S_Y) = std::move(s);
    (task.side == Side::row ? row_basis : col_basis).bases[task.cluster] = std::move(res.basis);
  });

  if (stats) {
    stats->aca_calls = store.aca_calls();
    stats->peak_retained = store.peak_retained();
  }
  auto dense = assemble_dense_leaves(oracle, *bct, workers);
  return UniformHMatrix(std::move(bct), std::move(row_basis), std::move(col_basis), std::move(coeffs),
                        std::move(dense));
}

namespace {

// Two-phase product shared by the forward and the adjoint matvec. `from`
// clusters project the input, `to` clusters expand into the output.
Vector two_phase_matvec(const UniformHMatrix& u, const Vector& v, std::size_t workers, bool adjoint,
                        MatvecStats* stats) {
  const auto& bct = u.bct();
  const Side from = adjoint ? Side::row : Side::col;
  const Side to = adjoint ? Side::col : Side::row;
  const ClusterBasis& from_basis = adjoint ? u.row_basis() : u.col_basis();
  const ClusterBasis& to_basis = adjoint ? u.col_basis() : u.row_basis();
  const auto& from_order = adjoint ? u.row_order() : u.col_order();
  const auto& to_order = adjoint ? u.col_order() : u.row_order();
  const std::size_t out_size = adjoint ? u.cols() : u.rows();

  std::vector<Vector> staging(bct.leaves().size());
  parallel_dynamic(from_order.size(), workers, [&](std::size_t t, std::size_t) {
    const std::size_t id = from_order[t];
    const auto& c = cluster_of(bct, from, id);
    const Vector proj =
        from_basis.bases[id].adjoint() * v.segment(static_cast<idx_t>(c.begin), static_cast<idx_t>(c.size()));
    for (std::size_t b : blocks_of(bct, from, id)) {
      const auto& cp = u.coefficients(b);
      if (!adjoint) staging[b] = cp.merged ? proj : Vector(cp.S_Y.adjoint() * proj);
      else staging[b] = cp.S_X.adjoint() * proj;
    }
  });

  const auto& dense_order = u.dense_order();
  std::vector<Vector> partial(workers, Vector::Zero(static_cast<idx_t>(out_size)));
  std::vector<std::size_t> visited(workers, 0);
  parallel_dynamic(to_order.size() + dense_order.size(), workers, [&](std::size_t t, std::size_t q) {
    if (t < to_order.size()) {
      const std::size_t id = to_order[t];
      const auto& c = cluster_of(bct, to, id);
      Vector acc = Vector::Zero(static_cast<idx_t>(to_basis.rank(id)));
      for (std::size_t b : blocks_of(bct, to, id)) {
        const auto& cp = u.coefficients(b);
        if (!adjoint) acc.noalias() += cp.S_X * staging[b];
        else if (cp.merged) acc += staging[b];
        else acc.noalias() += cp.S_Y * staging[b];
        ++visited[q];
      }
      partial[q].segment(static_cast<idx_t>(c.begin), static_cast<idx_t>(c.size())).noalias() +=
          to_basis.bases[id] * acc;
      return;
    }
    const auto& blk = bct.leaf(dense_order[t - to_order.size()]);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    if (!adjoint) {
      partial[q].segment(static_cast<idx_t>(ct.begin), static_cast<idx_t>(ct.size())).noalias() +=
          u.dense(blk.id) * v.segment(static_cast<idx_t>(cs.begin), static_cast<idx_t>(cs.size()));
    } else {
      partial[q].segment(static_cast<idx_t>(cs.begin), static_cast<idx_t>(cs.size())).noalias() +=
          u.dense(blk.id).adjoint() * v.segment(static_cast<idx_t>(ct.begin), static_cast<idx_t>(ct.size()));
    }
    ++visited[q];
  });
  if (stats) {
    stats->leaves_visited = 0;
    for (auto c : visited) stats->leaves_visited += c;
  }
  return detail::reduce(partial);
}

} // namespace

Vector matvec_uh(const UniformHMatrix& u, const Vector& v, std::size_t workers, MatvecStats* stats) {
  if (static_cast<std::size_t>(v.size()) != u.cols()) throw invalid_argument("matvec_uh: dimension mismatch");
  return two_phase_matvec(u, v, resolve_workers(workers), false, stats);
}

Vector adjoint_matvec_uh(const UniformHMatrix& u, const Vector& v, std::size_t workers) {
  if (static_cast<std::size_t>(v.size()) != u.rows()) throw invalid_argument("adjoint_matvec_uh: dimension mismatch");
  return two_phase_matvec(u, v, resolve_workers(workers), true, nullptr);
}

StorageReport storage_report_uh(const UniformHMatrix& u) {
  const auto& bct = u.bct();
  StorageReport r;
  std::size_t bases = 0;
  for (std::size_t t : bct.row_clusters()) bases += bct.row_tree().node(t).size() * u.row_basis().rank(t);
  for (std::size_t s : bct.col_clusters()) bases += bct.col_tree().node(s).size() * u.col_basis().rank(s);
  r.adm_elements = bases;
  r.adm_factor_elements = bases;
  for (std::size_t b : bct.admissible()) {
    const auto& blk = bct.leaf(b);
    const auto& c = u.coefficients(b);
    const std::size_t lt = u.row_basis().rank(blk.row);
    const std::size_t ls = u.col_basis().rank(blk.col);
    r.adm_factor_elements += lt * ls;
    if (c.merged) {
      r.adm_elements += lt * ls;
    } else {
      const auto k = static_cast<std::size_t>(c.S_X.cols());
      r.adm_elements += k * (lt + ls);
      r.k_max = std::max(r.k_max, k);
    }
  }
  for (std::size_t b : bct.inadmissible()) {
    const auto& blk = bct.leaf(b);
    r.dense_elements += bct.rows(blk) * bct.cols(blk);
  }
  r.total_elements = r.adm_elements + r.dense_elements;
  r.bytes_estimate = 16.0 * static_cast<double>(r.total_elements);
  r.c_sp = sparsity_constant(bct);
  r.l_max = std::max(u.row_basis().max_rank(), u.col_basis().max_rank());
  r.depth_row = bct.row_tree().depth();
  r.depth_col = bct.col_tree().depth();
  return r;
}

Matrix to_dense(const UniformHMatrix& u, std::size_t cap) {
  if (u.cols() != 0 && u.rows() > cap / u.cols()) throw capacity_error("to_dense: matrix exceeds element cap");
  const auto& bct = u.bct();
  Matrix out = Matrix::Zero(static_cast<idx_t>(u.rows()), static_cast<idx_t>(u.cols()));
  for (std::size_t b : bct.admissible()) {
    const auto& blk = bct.leaf(b);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    out.block(static_cast<idx_t>(ct.begin), static_cast<idx_t>(cs.begin), static_cast<idx_t>(ct.size()),
              static_cast<idx_t>(cs.size())) = u.block_dense(b);
  }
  detail::add_dense_leaves(bct, *u.dense_leaves(), out);
  return out;
}

void write_basis_csv(const UniformHMatrix& u, std::ostream& os) {
  const auto& bct = u.bct();
  os << "cluster_id,side,size,rank\n";
  for (std::size_t t : bct.row_clusters())
    os << t << ",row," << bct.row_tree().node(t).size() << ',' << u.row_basis().rank(t) << '\n';
  for (std::size_t s : bct.col_clusters())
    os << s << ",col," << bct.col_tree().node(s).size() << ',' << u.col_basis().rank(s) << '\n';
}

void write_coefficient_csv(const UniformHMatrix& u, std::ostream& os) {
  const auto& bct = u.bct();
  os << "block_id,k_b,l_tau,l_sigma\n";
  for (std::size_t b : bct.admissible()) {
    const auto& blk = bct.leaf(b);
    const auto& c = u.coefficients(b);
    os << b << ',' << (c.merged ? 0 : c.S_X.cols()) << ',' << u.row_basis().rank(blk.row) << ','
       << u.col_basis().rank(blk.col) << '\n';
  }
}

} // namespace uhm
