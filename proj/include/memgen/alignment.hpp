// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "memgen/autodiff.hpp"
#include "memgen/nn.hpp"
#include "memgen/retrieval.hpp"
#include "memgen/types.hpp"

namespace memgen {

struct SemanticEmbedding {
  RowVec vector;
  Modality modality = Modality::kVisual;
  std::string sample_id;
};

enum class AlignMode { kSiamese, kDual, kHga, kOff };

AlignMode align_mode_from_string(const std::string& name);
std::string to_string(AlignMode mode);

// Single-layer transformer encoder with a learnable [CLS] row prepended to
// the prior-knowledge sequence; the [CLS] output summarizes the sample.
// Shared across modalities in siamese mode.
class SiameseEncoder {
 public:
  SiameseEncoder() = default;
  SiameseEncoder(ad::ParamStore& store, Rng& rng, const std::string& name, int layers, Index dim,
                 int heads, Index ffn_hidden, bool positional_encoding);

  ad::Var encode(ad::Tape& t, const ad::Var& prior_values) const;  // 1 x dim
  RowVec encode_eval(const Mat& prior_values) const;

  bool positional_encoding() const { return positional_encoding_; }

 private:
  ad::ParamPtr cls_;
  nn::TransformerEncoder encoder_;
  bool positional_encoding_ = true;
};

// Symmetric InfoNCE over per-sample [CLS] embeddings: cosine similarities at
// temperature tau, cross-entropy against the diagonal in both directions,
// each direction averaged over the batch.
ad::Var align_loss_on_tape(ad::Tape& t, const ad::Var& visual_batch, const ad::Var& textual_batch,
                           Scalar tau);
Scalar align_loss(const Mat& visual_batch, const Mat& textual_batch, Scalar tau);

// High-granularity alignment: cross-attention reconstructions of each
// modality from the other, followed by per-position symmetric InfoNCE.
ad::Var hga_loss_on_tape(ad::Tape& t, const ad::Var& visual_prior, const ad::Var& textual_prior,
                         Scalar tau, Scalar lambda_txt, Scalar lambda_img);
Scalar hga_loss(const Mat& visual_prior, const Mat& textual_prior, Scalar tau, Scalar lambda_txt,
                Scalar lambda_img);

void export_embeddings_csv(const std::string& path, const std::vector<SemanticEmbedding>& embs);

}  // namespace memgen
