// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/retrieval.hpp"

#include <cmath>
#include <stdexcept>

namespace memgen {

MemoryProjections::MemoryProjections(ad::ParamStore& store, Rng& rng, const std::string& name,
                                     Index memory_dim, Index dim, int topk_)
    : topk(topk_) {
  w_bank = store.create(name + ".w_bank", nn::glorot(rng, memory_dim, dim));
  w_query = store.create(name + ".w_query", nn::glorot(rng, dim, dim));
  w_key = store.create(name + ".w_key", nn::glorot(rng, dim, dim));
  w_value = store.create(name + ".w_value", nn::glorot(rng, dim, dim));
}

namespace {

Mat raw_scores(const Mat& features, const Mat& bank, const MemoryProjections& proj) {
  if (features.cols() != proj.w_query->value.rows())
    throw std::invalid_argument("retrieval: feature dimension mismatch");
  if (bank.cols() != proj.w_bank->value.rows())
    throw std::invalid_argument("retrieval: bank dimension mismatch");
  const Mat projected = bank * proj.w_bank->value;             // N x D
  const Mat queries = features * proj.w_query->value;          // L x D
  const Mat keys = projected * proj.w_key->value;              // N x D
  const Scalar inv_sqrt = 1.0 / std::sqrt(static_cast<Scalar>(features.cols()));
  return inv_sqrt * (queries * keys.transpose());              // L x N
}

}  // namespace

Mat similarity_map(const Mat& features, const Mat& bank, const MemoryProjections& proj) {
  Mat scores = raw_scores(features, bank, proj);
  for (Index i = 0; i < scores.rows(); ++i) {
    const Scalar m = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - m).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

PriorKnowledge topk_retrieve(const Mat& features, const Mat& bank, const MemoryProjections& proj,
                             Modality modality) {
  if (proj.topk < 1 || proj.topk > bank.rows())
    throw std::invalid_argument("retrieval: k must be in [1, memory rows]");
  ad::Tape t;
  PriorKnowledge pk;
  pk.modality = modality;
  const ad::Var values =
      retrieve_on_tape(t, t.constant(features), t.constant(bank), proj, &pk.indices, &pk.weights);
  pk.values = values.value();
  return pk;
}

Mat consolidate(const Mat& features, const PriorKnowledge& prior) {
  if (features.rows() != prior.values.rows() || features.cols() != prior.values.cols())
    throw std::invalid_argument("consolidate: shape mismatch");
  return features + prior.values;
}

ad::Var retrieve_on_tape(ad::Tape& t, const ad::Var& features, const ad::Var& bank,
                         const MemoryProjections& proj, Eigen::MatrixXi* indices_out,
                         Mat* weights_out) {
  const ad::Var projected = ad::matmul(bank, t.leaf(proj.w_bank));
  const ad::Var queries = ad::matmul(features, t.leaf(proj.w_query));
  const ad::Var keys = ad::matmul(projected, t.leaf(proj.w_key));
  const Scalar inv_sqrt = 1.0 / std::sqrt(static_cast<Scalar>(features.cols()));
  const ad::Var scores = ad::scale(ad::matmul_nt(queries, keys), inv_sqrt);
  const ad::Var gathered = ad::topk_attend(scores, projected, proj.topk, indices_out, weights_out);
  return ad::matmul(gathered, t.leaf(proj.w_value));
}

}  // namespace memgen
