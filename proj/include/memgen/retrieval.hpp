// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "memgen/autodiff.hpp"
#include "memgen/nn.hpp"
#include "memgen/otmem.hpp"
#include "memgen/types.hpp"

namespace memgen {

enum class Modality { kVisual, kTextual };

// Projections shared by both modalities: W_L maps the bank into the model
// dimension, W_Q/W_K score queries against it, W_V projects retrieved rows.
struct MemoryProjections {
  ad::ParamPtr w_bank;   // memory_dim x dim
  ad::ParamPtr w_query;  // dim x dim
  ad::ParamPtr w_key;    // dim x dim
  ad::ParamPtr w_value;  // dim x dim
  int topk = 1;

  MemoryProjections() = default;
  MemoryProjections(ad::ParamStore& store, Rng& rng, const std::string& name, Index memory_dim,
                    Index dim, int topk);
};

struct PriorKnowledge {
  Mat values;               // L x dim
  Eigen::MatrixXi indices;  // L x k, retrieved memory row ids (score-descending)
  Mat weights;              // L x k, softmax weights (each row sums to 1)
  Modality modality = Modality::kTextual;
};

// Row-stochastic similarity map softmax((X Wq)(M Wl Wk)^T / sqrt(D)).
Mat similarity_map(const Mat& features, const Mat& bank, const MemoryProjections& proj);

// Top-k retrieval: per feature row, pick the k memory rows with the highest
// raw (pre-softmax) scores, softmax those scores, and return the weighted
// projected memory rows. Plain-value evaluation path.
PriorKnowledge topk_retrieve(const Mat& features, const Mat& bank, const MemoryProjections& proj,
                             Modality modality);

// Feature consolidation X' = X + prior values.
Mat consolidate(const Mat& features, const PriorKnowledge& prior);

// Differentiable retrieval used inside training/decoding forward passes.
// Produces the same values/indices/weights as topk_retrieve.
ad::Var retrieve_on_tape(ad::Tape& t, const ad::Var& features, const ad::Var& bank,
                         const MemoryProjections& proj, Eigen::MatrixXi* indices_out = nullptr,
                         Mat* weights_out = nullptr);

}  // namespace memgen
