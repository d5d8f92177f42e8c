#include "uhm/hmatrix.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>

#include "uhm/errors.hpp"
#include "uhm/parallel.hpp"

namespace uhm {

std::vector<std::size_t> largest_first(const BlockClusterTree& bct, std::vector<std::size_t> blocks) {
  std::stable_sort(blocks.begin(), blocks.end(), [&](std::size_t a, std::size_t b) {
    const auto& ba = bct.leaf(a);
    const auto& bb = bct.leaf(b);
    return bct.rows(ba) * bct.cols(ba) > bct.rows(bb) * bct.cols(bb);
  });
  return blocks;
}

HMatrix::HMatrix(std::shared_ptr<const BlockClusterTree> bct, std::vector<SVDForm> lowrank,
                 std::shared_ptr<const DenseLeaves> dense, ToleranceSpec eps_block, ToleranceSpec eps_recompress)
    : bct_(std::move(bct)), lowrank_(std::move(lowrank)), dense_(std::move(dense)), eps_block_(eps_block),
      eps_recompress_(eps_recompress) {
  const std::size_t n = bct_->leaves().size();
  if (lowrank_.size() != n || !dense_ || dense_->size() != n)
    throw invalid_argument("HMatrix: per-block storage does not match the block tree");
  for (std::size_t b : bct_->admissible()) {
    const auto& blk = bct_->leaf(b);
    const auto& f = lowrank_[b];
    if (static_cast<std::size_t>(f.rows()) != bct_->rows(blk) || static_cast<std::size_t>(f.cols()) != bct_->cols(blk))
      throw invalid_argument("HMatrix: factor dimensions do not match block " + std::to_string(b));
  }
  schedule_ = largest_first(*bct_, bct_->admissible());
  const auto dense_order = largest_first(*bct_, bct_->inadmissible());
  schedule_.insert(schedule_.end(), dense_order.begin(), dense_order.end());
}

std::shared_ptr<const DenseLeaves> assemble_dense_leaves(const EntryOracle& oracle, const BlockClusterTree& bct,
                                                         std::size_t workers) {
  auto dense = std::make_shared<DenseLeaves>(bct.leaves().size());
  const auto order = largest_first(bct, bct.inadmissible());
  parallel_dynamic(order.size(), resolve_workers(workers), [&](std::size_t t, std::size_t) {
    const auto& blk = bct.leaf(order[t]);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    (*dense)[blk.id] = oracle.dense_block(ct.begin, ct.end, cs.begin, cs.end);
  });
  return dense;
}

HMatrix assemble_h(const EntryOracle& oracle, std::shared_ptr<const BlockClusterTree> bct,
                   const ToleranceSpec& eps_block, const ToleranceSpec& eps_recompress, std::size_t workers,
                   Pivoting pivoting, AssemblyStats* stats) {
  if (oracle.rows() != bct->row_tree().size() || oracle.cols() != bct->col_tree().size())
    throw invalid_argument("assemble_h: oracle dimensions do not match the block tree");
  workers = resolve_workers(workers);

  std::vector<SVDForm> lowrank(bct->leaves().size());
  const auto order = largest_first(*bct, bct->admissible());
  std::atomic<std::size_t> entries{0};
  parallel_dynamic(order.size(), workers, [&](std::size_t t, std::size_t) {
    const auto& blk = bct->leaf(order[t]);
    const auto& ct = bct->row_tree().node(blk.row);
    const auto& cs = bct->col_tree().node(blk.col);
    const EntryFn fn = [&, r0 = ct.begin, c0 = cs.begin](idx_t i, idx_t j) {
      return oracle(r0 + static_cast<std::size_t>(i), c0 + static_cast<std::size_t>(j));
    };
    AcaStats st;
    const auto f = aca(fn, static_cast<idx_t>(ct.size()), static_cast<idx_t>(cs.size()), eps_block, pivoting, &st);
    lowrank[blk.id] = recompress(f, eps_recompress);
    entries += st.entries;
  });
  if (stats) {
    stats->aca_calls = order.size();
    stats->entries = entries.load();
  }
  auto dense = assemble_dense_leaves(oracle, *bct, workers);
  return HMatrix(std::move(bct), std::move(lowrank), std::move(dense), eps_block, eps_recompress);
}

namespace detail {

Vector reduce(std::vector<Vector>& partial) {
  Vector w = std::move(partial.front());
  for (std::size_t q = 1; q < partial.size(); ++q) w += partial[q];
  return w;
}

void add_dense_leaves(const BlockClusterTree& bct, const DenseLeaves& dense, Matrix& out) {
  for (std::size_t b : bct.inadmissible()) {
    const auto& blk = bct.leaf(b);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    out.block(static_cast<idx_t>(ct.begin), static_cast<idx_t>(cs.begin), static_cast<idx_t>(ct.size()),
              static_cast<idx_t>(cs.size())) = dense.at(b);
  }
}

} // namespace detail

Vector matvec_h(const HMatrix& h, const Vector& v, std::size_t workers, MatvecStats* stats) {
  if (static_cast<std::size_t>(v.size()) != h.cols()) throw invalid_argument("matvec_h: dimension mismatch");
  workers = resolve_workers(workers);
  const auto& bct = h.bct();
  const auto& order = h.schedule();
  std::vector<Vector> partial(workers, Vector::Zero(static_cast<idx_t>(h.rows())));
  std::vector<std::size_t> visited(workers, 0);

  parallel_dynamic(order.size(), workers, [&](std::size_t t, std::size_t q) {
    const auto& blk = bct.leaf(order[t]);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    const auto vs = v.segment(static_cast<idx_t>(cs.begin), static_cast<idx_t>(cs.size()));
    auto ws = partial[q].segment(static_cast<idx_t>(ct.begin), static_cast<idx_t>(ct.size()));
    if (blk.admissible) {
      const auto& f = h.lowrank(blk.id);
      if (f.rank() > 0) {
        const Vector t1 = f.sigma.cast<cplx>().cwiseProduct(f.V.adjoint() * vs);
        ws.noalias() += f.U * t1;
      }
    } else {
      ws.noalias() += h.dense(blk.id) * vs;
    }
    ++visited[q];
  });
  if (stats) {
    stats->leaves_visited = 0;
    for (auto c : visited) stats->leaves_visited += c;
  }
  return detail::reduce(partial);
}

Vector adjoint_matvec_h(const HMatrix& h, const Vector& v, std::size_t workers) {
  if (static_cast<std::size_t>(v.size()) != h.rows()) throw invalid_argument("adjoint_matvec_h: dimension mismatch");
  workers = resolve_workers(workers);
  const auto& bct = h.bct();
  const auto& order = h.schedule();
  std::vector<Vector> partial(workers, Vector::Zero(static_cast<idx_t>(h.cols())));

  parallel_dynamic(order.size(), workers, [&](std::size_t t, std::size_t q) {
    const auto& blk = bct.leaf(order[t]);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    const auto vt = v.segment(static_cast<idx_t>(ct.begin), static_cast<idx_t>(ct.size()));
    auto ws = partial[q].segment(static_cast<idx_t>(cs.begin), static_cast<idx_t>(cs.size()));
    if (blk.admissible) {
      const auto& f = h.lowrank(blk.id);
      if (f.rank() > 0) {
        const Vector t1 = f.sigma.cast<cplx>().cwiseProduct(f.U.adjoint() * vt);
        ws.noalias() += f.V * t1;
      }
    } else {
      ws.noalias() += h.dense(blk.id).adjoint() * vt;
    }
  });
  return detail::reduce(partial);
}

StorageReport storage_report(const HMatrix& h) {
  const auto& bct = h.bct();
  StorageReport r;
  for (std::size_t b : bct.admissible()) {
    const auto& blk = bct.leaf(b);
    const auto k = static_cast<std::size_t>(h.lowrank(b).rank());
    r.adm_factor_elements += k * (bct.rows(blk) + bct.cols(blk));
    r.adm_elements += k * (bct.rows(blk) + bct.cols(blk) + 1);
    r.k_max = std::max(r.k_max, k);
  }
  for (std::size_t b : bct.inadmissible()) {
    const auto& blk = bct.leaf(b);
    r.dense_elements += bct.rows(blk) * bct.cols(blk);
  }
  r.total_elements = r.adm_elements + r.dense_elements;
  r.bytes_estimate = 16.0 * static_cast<double>(r.total_elements);
  r.c_sp = sparsity_constant(bct);
  r.depth_row = bct.row_tree().depth();
  r.depth_col = bct.col_tree().depth();
  return r;
}

Matrix to_dense(const HMatrix& h, std::size_t cap) {
  if (h.cols() != 0 && h.rows() > cap / h.cols()) throw capacity_error("to_dense: matrix exceeds element cap");
  const auto& bct = h.bct();
  Matrix out = Matrix::Zero(static_cast<idx_t>(h.rows()), static_cast<idx_t>(h.cols()));
  for (std::size_t b : bct.admissible()) {
    const auto& blk = bct.leaf(b);
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    out.block(static_cast<idx_t>(ct.begin), static_cast<idx_t>(cs.begin), static_cast<idx_t>(ct.size()),
              static_cast<idx_t>(cs.size())) = h.lowrank(b).to_dense();
  }
  detail::add_dense_leaves(bct, *h.dense_leaves(), out);
  return out;
}

void write_structure_csv(const HMatrix& h, std::ostream& os) {
  const auto& bct = h.bct();
  os << "block_id,row_lo,row_hi,col_lo,col_hi,kind,rank\n";
  for (const auto& blk : bct.leaves()) {
    const auto& ct = bct.row_tree().node(blk.row);
    const auto& cs = bct.col_tree().node(blk.col);
    os << blk.id << ',' << ct.begin << ',' << ct.end << ',' << cs.begin << ',' << cs.end << ','
       << (blk.admissible ? "adm" : "dense") << ',';
    if (blk.admissible) os << h.lowrank(blk.id).rank();
    else os << std::min(ct.size(), cs.size());
    os << '\n';
  }
}

} // namespace uhm
