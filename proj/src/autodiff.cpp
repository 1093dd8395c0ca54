// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "memgen/sinkhorn.hpp"

namespace memgen::ad {

namespace {

void check_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw std::invalid_argument("ad: operands on different tapes");
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string("ad: shape mismatch in ") + op);
}

Mat softmax_rows_value(const Mat& a) {
  Mat out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const Scalar m = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

}  // namespace

// ---- ParamStore ----

ParamPtr ParamStore::create(const std::string& name, Mat init, bool trainable) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate param '" + name + "'");
  auto p = std::make_shared<Param>(name, std::move(init));
  p->trainable = trainable;
  index_[name] = order_.size();
  order_.push_back(p);
  return p;
}

ParamPtr ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown param '" + name + "'");
  return order_[it->second];
}

void ParamStore::zero_grad() {
  for (auto& p : order_) p->grad.setZero();
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(order_.size());
  for (const auto& p : order_) out.push_back(p->name);
  return out;
}

// ---- Var / Tape ----

const Mat& Var::value() const {
  if (!valid()) throw std::logic_error("ad: use of empty Var");
  return tape_->value(id_);
}

Scalar Var::scalar() const {
  const Mat& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::logic_error("ad: scalar() on non-1x1 value");
  return v(0, 0);
}

Var Tape::constant(Mat value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = false;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(const ParamPtr& param) {
  Node n;
  n.value = param->value;
  n.needs_grad = param->trainable;
  n.param = param;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::make(Mat value, std::vector<int> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (int p : parents)
    if (nodes_[static_cast<std::size_t>(p)].needs_grad) n.needs_grad = true;
  n.parents = std::move(parents);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Mat& Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_grad) throw std::logic_error("ad: grad requested before backward reached node");
  return n.grad;
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  n.grad += g;
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw std::invalid_argument("ad: backward root from another tape");
  const Mat& rv = value(root.id());
  if (rv.rows() != 1 || rv.cols() != 1)
    throw std::invalid_argument("ad: backward requires a 1x1 root");
  Node& rn = nodes_[static_cast<std::size_t>(root.id())];
  rn.grad = Mat::Ones(1, 1);
  rn.has_grad = true;
  for (int i = root.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.has_grad || !n.needs_grad) continue;
    if (n.param) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, i);
    }
  }
}

void Tape::reset() { nodes_.clear(); }

// ---- ops ----

Var operator+(const Var& a, const Var& b) {
  check_same_tape(a, b);
  check_same_shape(a, b, "operator+");
  Tape& t = *a.tape();
  const int pa = a.id(), pb = b.id();
  return t.make(a.value() + b.value(), {pa, pb}, [pa, pb](Tape& t, int self) {
    t.accumulate(pa, t.grad(self));
    t.accumulate(pb, t.grad(self));
  });
}

Var operator-(const Var& a, const Var& b) {
  check_same_tape(a, b);
  check_same_shape(a, b, "operator-");
  Tape& t = *a.tape();
  const int pa = a.id(), pb = b.id();
  return t.make(a.value() - b.value(), {pa, pb}, [pa, pb](Tape& t, int self) {
    t.accumulate(pa, t.grad(self));
    t.accumulate(pb, -t.grad(self));
  });
}

Var cmul(const Var& a, const Var& b) {
  check_same_tape(a, b);
  check_same_shape(a, b, "cmul");
  Tape& t = *a.tape();
  const int pa = a.id(), pb = b.id();
  return t.make(a.value().cwiseProduct(b.value()), {pa, pb}, [pa, pb](Tape& t, int self) {
    if (t.needs_grad(pa)) t.accumulate(pa, t.grad(self).cwiseProduct(t.value(pb)));
    if (t.needs_grad(pb)) t.accumulate(pb, t.grad(self).cwiseProduct(t.value(pa)));
  });
}

Var affine(const Var& a, Scalar mul, Scalar add) {
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make((mul * a.value().array() + add).matrix(), {pa}, [pa, mul](Tape& t, int self) {
    t.accumulate(pa, mul * t.grad(self));
  });
}

Var relu(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value().cwiseMax(0.0), {pa}, [pa](Tape& t, int self) {
    const Mat mask = (t.value(pa).array() > 0).cast<Scalar>();
    t.accumulate(pa, t.grad(self).cwiseProduct(mask));
  });
}

Var vlog(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value().array().log().matrix(), {pa}, [pa](Tape& t, int self) {
    t.accumulate(pa, t.grad(self).cwiseQuotient(t.value(pa)));
  });
}

Var add_const(const Var& a, const Mat& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols())
    throw std::invalid_argument("ad: shape mismatch in add_const");
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value() + c, {pa},
                [pa](Tape& t, int self) { t.accumulate(pa, t.grad(self)); });
}

Var matmul(const Var& a, const Var& b) {
  check_same_tape(a, b);
  if (a.cols() != b.rows()) throw std::invalid_argument("ad: shape mismatch in matmul");
  Tape& t = *a.tape();
  const int pa = a.id(), pb = b.id();
  return t.make(a.value() * b.value(), {pa, pb}, [pa, pb](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(pa)) t.accumulate(pa, g * t.value(pb).transpose());
    if (t.needs_grad(pb)) t.accumulate(pb, t.value(pa).transpose() * g);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  check_same_tape(a, b);
  if (a.cols() != b.cols()) throw std::invalid_argument("ad: shape mismatch in matmul_nt");
  Tape& t = *a.tape();
  const int pa = a.id(), pb = b.id();
  return t.make(a.value() * b.value().transpose(), {pa, pb}, [pa, pb](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(pa)) t.accumulate(pa, g * t.value(pb));
    if (t.needs_grad(pb)) t.accumulate(pb, g.transpose() * t.value(pa));
  });
}

Var transpose(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value().transpose(), {pa}, [pa](Tape& t, int self) {
    t.accumulate(pa, t.grad(self).transpose());
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ad: concat_rows of nothing");
  Tape& t = *parts.front().tape();
  Index rows = 0;
  const Index cols = parts.front().cols();
  std::vector<int> ids;
  std::vector<Index> offsets;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("ad: concat_rows column mismatch");
    offsets.push_back(rows);
    rows += p.rows();
    ids.push_back(p.id());
  }
  Mat v(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k)
    v.middleRows(offsets[k], parts[k].rows()) = parts[k].value();
  return t.make(std::move(v), ids, [ids, offsets](Tape& t, int self) {
    const Mat& g = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const Index n = t.value(ids[k]).rows();
      t.accumulate(ids[k], g.middleRows(offsets[k], n));
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ad: concat_cols of nothing");
  Tape& t = *parts.front().tape();
  Index cols = 0;
  const Index rows = parts.front().rows();
  std::vector<int> ids;
  std::vector<Index> offsets;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("ad: concat_cols row mismatch");
    offsets.push_back(cols);
    cols += p.cols();
    ids.push_back(p.id());
  }
  Mat v(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k)
    v.middleCols(offsets[k], parts[k].cols()) = parts[k].value();
  return t.make(std::move(v), ids, [ids, offsets](Tape& t, int self) {
    const Mat& g = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const Index n = t.value(ids[k]).cols();
      t.accumulate(ids[k], g.middleCols(offsets[k], n));
    }
  });
}

Var slice_rows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw std::invalid_argument("ad: slice_rows out of range");
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value().middleRows(start, count), {pa}, [pa, start, count](Tape& t, int self) {
    Mat g = Mat::Zero(t.value(pa).rows(), t.value(pa).cols());
    g.middleRows(start, count) = t.grad(self);
    t.accumulate(pa, g);
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols())
    throw std::invalid_argument("ad: slice_cols out of range");
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(a.value().middleCols(start, count), {pa}, [pa, start, count](Tape& t, int self) {
    Mat g = Mat::Zero(t.value(pa).rows(), t.value(pa).cols());
    g.middleCols(start, count) = t.grad(self);
    t.accumulate(pa, g);
  });
}

Var broadcast_add_row(const Var& m, const Var& row) {
  check_same_tape(m, row);
  if (row.rows() != 1 || row.cols() != m.cols())
    throw std::invalid_argument("ad: broadcast_add_row expects a 1 x cols row");
  Tape& t = *m.tape();
  const int pm = m.id(), pr = row.id();
  Mat v = m.value();
  v.rowwise() += row.value().row(0);
  return t.make(std::move(v), {pm, pr}, [pm, pr](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.accumulate(pm, g);
    if (t.needs_grad(pr)) t.accumulate(pr, g.colwise().sum());
  });
}

Var sum_all(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  Mat v(1, 1);
  v(0, 0) = a.value().sum();
  return t.make(std::move(v), {pa}, [pa](Tape& t, int self) {
    const Scalar g = t.grad(self)(0, 0);
    t.accumulate(pa, Mat::Constant(t.value(pa).rows(), t.value(pa).cols(), g));
  });
}

Var mean_all(const Var& a) {
  return scale(sum_all(a), 1.0 / static_cast<Scalar>(a.rows() * a.cols()));
}

Var softmax_rows(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  return t.make(softmax_rows_value(a.value()), {pa}, [pa](Tape& t, int self) {
    const Mat& p = t.value(self);
    const Mat& g = t.grad(self);
    Mat out(p.rows(), p.cols());
    for (Index i = 0; i < p.rows(); ++i) {
      const Scalar dot = g.row(i).dot(p.row(i));
      out.row(i) = p.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
    }
    t.accumulate(pa, out);
  });
}

Var log_softmax_rows(const Var& a) {
  Tape& t = *a.tape();
  const int pa = a.id();
  Mat v(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const Scalar m = a.value().row(i).maxCoeff();
    const Scalar lse = m + std::log((a.value().row(i).array() - m).exp().sum());
    v.row(i) = a.value().row(i).array() - lse;
  }
  return t.make(std::move(v), {pa}, [pa](Tape& t, int self) {
    const Mat& ls = t.value(self);
    const Mat& g = t.grad(self);
    Mat out(ls.rows(), ls.cols());
    for (Index i = 0; i < ls.rows(); ++i) {
      const Scalar gsum = g.row(i).sum();
      out.row(i) = g.row(i) - gsum * ls.row(i).array().exp().matrix();
    }
    t.accumulate(pa, out);
  });
}

Var normalize_rows(const Var& a, const char* degenerate_error) {
  Tape& t = *a.tape();
  const int pa = a.id();
  Mat v(a.rows(), a.cols());
  Vec norms(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const Scalar n = a.value().row(i).norm();
    norms(i) = n;
    if (n < 1e-12) {
      if (degenerate_error) throw std::invalid_argument(degenerate_error);
      v.row(i).setZero();
    } else {
      v.row(i) = a.value().row(i) / n;
    }
  }
  return t.make(std::move(v), {pa}, [pa, norms](Tape& t, int self) {
    const Mat& u = t.value(self);
    const Mat& g = t.grad(self);
    Mat out = Mat::Zero(u.rows(), u.cols());
    for (Index i = 0; i < u.rows(); ++i) {
      if (norms(i) < 1e-12) continue;
      const Scalar dot = g.row(i).dot(u.row(i));
      out.row(i) = (g.row(i) - dot * u.row(i)) / norms(i);
    }
    t.accumulate(pa, out);
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, Scalar eps) {
  check_same_tape(x, gain);
  check_same_tape(x, bias);
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 || bias.cols() != x.cols())
    throw std::invalid_argument("ad: layer_norm_rows parameter shape mismatch");
  Tape& t = *x.tape();
  const int px = x.id(), pg = gain.id(), pb = bias.id();
  const Index rows = x.rows(), cols = x.cols();

  Mat xhat(rows, cols);
  Vec inv_std(rows);
  for (Index i = 0; i < rows; ++i) {
    const Scalar mu = x.value().row(i).mean();
    const Scalar var = (x.value().row(i).array() - mu).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.value().row(i).array() - mu) * inv_std(i);
  }
  Mat v = xhat;
  for (Index i = 0; i < rows; ++i)
    v.row(i) = v.row(i).cwiseProduct(gain.value().row(0)) + bias.value().row(0);

  return t.make(std::move(v), {px, pg, pb}, [px, pg, pb, xhat, inv_std](Tape& t, int self) {
    const Mat& g = t.grad(self);
    const Index cols = g.cols();
    if (t.needs_grad(pb)) t.accumulate(pb, g.colwise().sum());
    if (t.needs_grad(pg)) t.accumulate(pg, g.cwiseProduct(xhat).colwise().sum());
    if (t.needs_grad(px)) {
      const Mat& gamma = t.value(pg);
      Mat dx(g.rows(), cols);
      for (Index i = 0; i < g.rows(); ++i) {
        const RowVec dxhat = g.row(i).cwiseProduct(gamma.row(0));
        const Scalar m1 = dxhat.mean();
        const Scalar m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
        dx.row(i) = inv_std(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2);
      }
      t.accumulate(px, dx);
    }
  });
}

Var embedding_rows(const Var& table, const std::vector<int>& ids) {
  Tape& t = *table.tape();
  const int pt = table.id();
  Mat v(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows())
      throw std::invalid_argument("ad: embedding id out of range");
    v.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  return t.make(std::move(v), {pt}, [pt, ids](Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat gt = Mat::Zero(t.value(pt).rows(), t.value(pt).cols());
    for (std::size_t i = 0; i < ids.size(); ++i)
      gt.row(ids[i]) += g.row(static_cast<Index>(i));
    t.accumulate(pt, gt);
  });
}

Var nll_rows(const Var& logits, const std::vector<int>& targets) {
  if (static_cast<Index>(targets.size()) != logits.rows())
    throw std::invalid_argument("ad: nll_rows target count mismatch");
  Tape& t = *logits.tape();
  const int pl = logits.id();
  const Index rows = logits.rows();
  Scalar total = 0.0;
  for (Index i = 0; i < rows; ++i) {
    const int tgt = targets[static_cast<std::size_t>(i)];
    if (tgt < 0 || tgt >= logits.cols())
      throw std::invalid_argument("ad: nll_rows target out of range");
    const Scalar m = logits.value().row(i).maxCoeff();
    const Scalar lse = m + std::log((logits.value().row(i).array() - m).exp().sum());
    total += lse - logits.value()(i, tgt);
  }
  Mat v(1, 1);
  v(0, 0) = total / static_cast<Scalar>(rows);
  return t.make(std::move(v), {pl}, [pl, targets](Tape& t, int self) {
    const Scalar g = t.grad(self)(0, 0);
    const Mat& logits = t.value(pl);
    Mat gl = softmax_rows_value(logits);
    for (Index i = 0; i < gl.rows(); ++i) gl(i, targets[static_cast<std::size_t>(i)]) -= 1.0;
    t.accumulate(pl, (g / static_cast<Scalar>(gl.rows())) * gl);
  });
}

Var dropout(const Var& a, Scalar p, Rng& rng, bool training) {
  if (p < 0 || p >= 1) throw std::invalid_argument("ad: dropout rate must be in [0,1)");
  if (!training || p == 0.0) return a;
  Tape& t = *a.tape();
  const int pa = a.id();
  Mat mask(a.rows(), a.cols());
  const Scalar keep = 1.0 - p;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j)
      mask(i, j) = rng.uniform() < p ? 0.0 : 1.0 / keep;
  return t.make(a.value().cwiseProduct(mask), {pa}, [pa, mask](Tape& t, int self) {
    t.accumulate(pa, t.grad(self).cwiseProduct(mask));
  });
}

Var topk_attend(const Var& scores, const Var& memory, int k, Eigen::MatrixXi* indices_out,
                Mat* weights_out) {
  check_same_tape(scores, memory);
  if (scores.cols() != memory.rows())
    throw std::invalid_argument("ad: topk_attend score/memory mismatch");
  if (k < 1 || k > scores.cols())
    throw std::invalid_argument("ad: topk_attend k out of range");
  Tape& t = *scores.tape();
  const int ps = scores.id(), pm = memory.id();
  const Index rows = scores.rows();
  const Index dim = memory.cols();

  Eigen::MatrixXi indices(rows, k);
  Mat weights(rows, k);
  Mat v = Mat::Zero(rows, dim);
  for (Index i = 0; i < rows; ++i) {
    std::vector<Index> order(static_cast<std::size_t>(scores.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    // Highest score first; equal scores prefer the lower memory index.
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return scores.value()(i, a) > scores.value()(i, b);
    });
    RowVec sel(k);
    for (int j = 0; j < k; ++j) {
      indices(i, j) = static_cast<int>(order[static_cast<std::size_t>(j)]);
      sel(j) = scores.value()(i, indices(i, j));
    }
    const Scalar m = sel.maxCoeff();
    RowVec w = (sel.array() - m).exp();
    w /= w.sum();
    weights.row(i) = w;
    for (int j = 0; j < k; ++j) v.row(i) += w(j) * memory.value().row(indices(i, j));
  }
  if (indices_out) *indices_out = indices;
  if (weights_out) *weights_out = weights;

  return t.make(std::move(v), {ps, pm}, [ps, pm, indices, weights, k](Tape& t, int self) {
    const Mat& g = t.grad(self);
    const Mat& mem = t.value(pm);
    const bool want_scores = t.needs_grad(ps);
    const bool want_mem = t.needs_grad(pm);
    Mat gs = want_scores ? Mat::Zero(t.value(ps).rows(), t.value(ps).cols()) : Mat();
    Mat gm = want_mem ? Mat::Zero(mem.rows(), mem.cols()) : Mat();
    for (Index i = 0; i < g.rows(); ++i) {
      RowVec dw(k);
      for (int j = 0; j < k; ++j) dw(j) = g.row(i).dot(mem.row(indices(i, j)));
      if (want_scores) {
        const Scalar dot = dw.cwiseProduct(weights.row(i)).sum();
        for (int j = 0; j < k; ++j)
          gs(i, indices(i, j)) += weights(i, j) * (dw(j) - dot);
      }
      if (want_mem)
        for (int j = 0; j < k; ++j) gm.row(indices(i, j)) += weights(i, j) * g.row(i);
    }
    if (want_scores) t.accumulate(ps, gs);
    if (want_mem) t.accumulate(pm, gm);
  });
}

Var sinkhorn_loss(const Var& cost, const Var& col_marginal, const Vec& row_marginal,
                  Scalar lambda, Scalar tol, int max_iter) {
  check_same_tape(cost, col_marginal);
  if (col_marginal.rows() != 1 || col_marginal.cols() != cost.cols())
    throw std::invalid_argument("ad: sinkhorn_loss marginal shape mismatch");
  if (row_marginal.size() != cost.rows())
    throw std::invalid_argument("ad: sinkhorn_loss row marginal size mismatch");
  Tape& t = *cost.tape();
  const int pc = cost.id(), pz = col_marginal.id();

  TransportProblem problem;
  problem.row_marginal = row_marginal;
  problem.col_marginal = col_marginal.value().row(0).transpose();
  problem.cost = cost.value();
  const TransportSolution sol = sinkhorn(problem, lambda, tol, max_iter);

  const Mat plan = sol.plan;
  RowVec dual = sol.col_potential.transpose();
  dual.array() -= dual.mean();

  Mat v(1, 1);
  v(0, 0) = sol.regularized_objective;
  return t.make(std::move(v), {pc, pz}, [pc, pz, plan, dual](Tape& t, int self) {
    const Scalar g = t.grad(self)(0, 0);
    if (t.needs_grad(pc)) t.accumulate(pc, g * plan);
    if (t.needs_grad(pz)) t.accumulate(pz, g * dual);
  });
}

// ---- Adam ----

Adam::Adam(std::vector<ParamPtr> params, Scalar default_lr, std::vector<Group> groups,
           Scalar beta1, Scalar beta2, Scalar eps)
    : params_(std::move(params)),
      default_lr_(default_lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      groups_(std::move(groups)) {
  for (auto& p : params_) {
    if (p->adam_m.size() == 0) {
      p->adam_m = Mat::Zero(p->value.rows(), p->value.cols());
      p->adam_v = Mat::Zero(p->value.rows(), p->value.cols());
    }
  }
}

Scalar Adam::lr_for(const Param& p) const {
  std::size_t best_len = 0;
  Scalar lr = default_lr_;
  for (const auto& g : groups_) {
    if (p.name.rfind(g.prefix, 0) == 0 && g.prefix.size() >= best_len) {
      best_len = g.prefix.size();
      lr = g.lr;
    }
  }
  return lr;
}

void Adam::step() {
  ++t_;
  const Scalar bc1 = 1.0 - std::pow(beta1_, t_);
  const Scalar bc2 = 1.0 - std::pow(beta2_, t_);
  for (auto& p : params_) {
    if (!p->trainable) continue;
    const Scalar lr = lr_for(*p);
    p->adam_m = beta1_ * p->adam_m + (1.0 - beta1_) * p->grad;
    p->adam_v = beta2_ * p->adam_v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    const Mat mhat = p->adam_m / bc1;
    const Mat vhat = p->adam_v / bc2;
    p->value -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt() + Mat::Constant(vhat.rows(), vhat.cols(), eps_));
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

}  // namespace memgen::ad
