// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "memgen/rng.hpp"
#include "memgen/types.hpp"

namespace memgen::ad {

// A trainable tensor with persistent gradient and Adam moment buffers.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m, adam_v;
  bool trainable = true;

  Param(std::string name_, Mat value_)
      : name(std::move(name_)), value(std::move(value_)) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
};
using ParamPtr = std::shared_ptr<Param>;

// Registry of named parameters in creation order (iteration order matters
// for deterministic optimizer updates and checkpoint layout).
class ParamStore {
 public:
  ParamPtr create(const std::string& name, Mat init, bool trainable = true);
  ParamPtr get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const std::vector<ParamPtr>& all() const { return order_; }
  void zero_grad();
  std::vector<std::string> names() const;

 private:
  std::vector<ParamPtr> order_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; values live on the tape.
class Var {
 public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }
  const Mat& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

using BackwardFn = std::function<void(Tape&, int)>;

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order; backward() walks them in reverse and accumulates into Param::grad
// at the leaves.
class Tape {
 public:
  Var constant(Mat value);
  Var leaf(const ParamPtr& param);
  Var make(Mat value, std::vector<int> parents, BackwardFn backward);

  void backward(const Var& root);
  void reset();
  std::size_t size() const { return nodes_.size(); }

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  const Mat& grad(int id) const;
  void accumulate(int id, const Mat& g);

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::vector<int> parents;
    BackwardFn backward;
    ParamPtr param;
  };
  std::vector<Node> nodes_;
};

// ---- elementwise and arithmetic ----
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var cmul(const Var& a, const Var& b);
Var affine(const Var& a, Scalar mul, Scalar add);  // mul * a + add, cwise
inline Var scale(const Var& a, Scalar s) { return affine(a, s, 0.0); }
Var relu(const Var& a);
Var vlog(const Var& a);
Var add_const(const Var& a, const Mat& c);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var transpose(const Var& a);

// ---- shape ----
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, Index start, Index count);
Var slice_cols(const Var& a, Index start, Index count);
Var broadcast_add_row(const Var& m, const Var& row);

// ---- reductions ----
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// ---- normalization and softmax ----
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
// L2-normalizes each row. If degenerate_error is non-null, a row with norm
// below 1e-12 throws std::invalid_argument(degenerate_error); otherwise the
// row maps to zero.
Var normalize_rows(const Var& a, const char* degenerate_error = nullptr);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, Scalar eps = 1e-5);

// ---- indexing and losses ----
Var embedding_rows(const Var& table, const std::vector<int>& ids);
// Mean over rows of -log softmax(row)[target]; the workhorse for both the
// generation cross entropy and the InfoNCE diagonals.
Var nll_rows(const Var& logits, const std::vector<int>& targets);
Var dropout(const Var& a, Scalar p, Rng& rng, bool training);

// ---- retrieval ----
// Per-row top-k attention over memory rows: selects the k highest scores
// (ties broken by lower memory index, stored in descending-score order),
// softmaxes the selected scores and returns the weighted sum of the
// corresponding memory rows. Optionally reports indices/weights.
Var topk_attend(const Var& scores, const Var& memory, int k,
                Eigen::MatrixXi* indices_out = nullptr, Mat* weights_out = nullptr);

// ---- optimal transport ----
// Entropy-regularized OT objective <A,B> - (1/lambda) h(A) at the converged
// Sinkhorn plan, differentiable in the cost matrix (gradient: the plan) and
// in the column marginal (gradient: the centered column dual potential).
// Rows with zero mass in row_marginal are masked out of the solve.
Var sinkhorn_loss(const Var& cost, const Var& col_marginal, const Vec& row_marginal,
                  Scalar lambda, Scalar tol, int max_iter);

// Adam with per-prefix learning-rate groups (longest matching prefix wins;
// params that match no prefix use default_lr).
class Adam {
 public:
  struct Group {
    std::string prefix;
    Scalar lr;
  };

  Adam(std::vector<ParamPtr> params, Scalar default_lr, std::vector<Group> groups = {},
       Scalar beta1 = 0.9, Scalar beta2 = 0.999, Scalar eps = 1e-8);

  void step();
  void zero_grad();
  Scalar lr_for(const Param& p) const;
  int steps_taken() const { return t_; }

 private:
  std::vector<ParamPtr> params_;
  Scalar default_lr_, beta1_, beta2_, eps_;
  std::vector<Group> groups_;
  int t_ = 0;
};

}  // namespace memgen::ad
