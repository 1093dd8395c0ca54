// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memgen/alignment.hpp"
#include "memgen/config.hpp"
#include "memgen/corpus.hpp"
#include "memgen/nn.hpp"
#include "memgen/otmem.hpp"
#include "memgen/retrieval.hpp"
#include "memgen/types.hpp"

namespace memgen {

struct VisualFeatures {
  Mat values;  // N_I x dim
  std::string source;  // "extractor" | "precomputed"
};

// Shape of the visual input the model is built for.
struct VisualSpec {
  bool precomputed = false;
  Index grid_h = 16;
  Index grid_w = 16;
  Index feature_rows = 0;  // N_I when precomputed

  static VisualSpec from_samples(const std::vector<PairedSample>& samples);
};

struct DecodeResult {
  std::vector<int> tokens;  // <bos> ... (<eos> when finished)
  Scalar logprob = 0.0;
  bool finished = false;
};

// Plain loss helpers (the tape path uses ad::nll_rows with the same math).
Scalar gen_loss(const Mat& logits, const std::vector<int>& targets);  // mean CE, <pad> ignored
Scalar joint_loss(Scalar generation, Scalar alignment);
Mat fuse_semantic(const Mat& encoded, const RowVec& semantic);

// Retrieval records of one forward pass, for inspection exports.
struct RetrievalRecord {
  PriorKnowledge visual;
  PriorKnowledge textual;               // rows align with the decoder input tokens
  std::vector<int> textual_tokens;      // decoder input ids (starts with <bos>)
};

// The report generator: patch extractor (or precomputed features), memory
// retrieval and consolidation on both modalities, alignment module, visual
// transformer encoder with semantic fusion, and a prompt-augmented
// transformer decoder.
class ReportModel {
 public:
  ReportModel(const ModelConfig& cfg, int vocab_size, const VisualSpec& visual);

  const ModelConfig& config() const { return cfg_; }
  int vocab_size() const { return vocab_size_; }
  Index visual_rows() const { return n_visual_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  void set_memory_bank(const MemoryBank& bank);
  Mat memory_bank() const { return memory_->value; }

  // ---- feature extraction ----
  VisualFeatures extract_features(const PairedSample& sample) const;

  // ---- training forward ----
  struct SampleForward {
    ad::Var gen_nll;            // 1x1 teacher-forced mean cross entropy
    ad::Var visual_summary;     // 1xD, valid in siamese/dual modes
    ad::Var textual_summary;    // 1xD
    ad::Var hga;                // 1x1, valid in hga mode
    int target_count = 0;
  };
  SampleForward forward_sample(ad::Tape& t, const PairedSample& sample, const Report& report) const;

  struct BatchLoss {
    ad::Var total, generation, alignment;
    Scalar generation_value = 0.0, alignment_value = 0.0;
  };
  BatchLoss forward_batch(ad::Tape& t, const std::vector<const PairedSample*>& samples,
                          const std::vector<const Report*>& reports) const;

  // Teacher-forced logits over the whole sequence (rows follow decoder
  // input positions; row u scores token u+1).
  Mat forward_logits(const PairedSample& sample, const Report& report) const;

  // ---- decoding ----
  Mat encode_visual_eval(const PairedSample& sample) const;  // bold V (fusion included)
  RowVec consolidated_token_row(int token) const;
  // Next-token logits given the consolidated prefix; cross-attends to
  // [bold_V; prompts]. Throws if the prefix exceeds max_len.
  Vec decode_step(const Mat& bold_visual, const Mat& prefix_consolidated) const;
  Vec decode_step_with_memory(const Mat& memory_rows, const Mat& prefix_consolidated) const;

  DecodeResult greedy_decode(const PairedSample& sample) const;
  // Length-unnormalized beam search; the stepwise-argmax trajectory is always
  // kept as a candidate, so widening the beam never falls below greedy.
  DecodeResult beam_search(const PairedSample& sample, int beam, Index max_len) const;
  DecodeResult beam_search(const PairedSample& sample) const;

  // Retrieval records for one sample (inspection/export path).
  RetrievalRecord inspect_retrieval(const PairedSample& sample, const Report& report) const;
  SemanticEmbedding semantic_embedding(const PairedSample& sample, const Report& report,
                                       Modality modality) const;

 private:
  ad::Var visual_features_on_tape(ad::Tape& t, const PairedSample& sample) const;
  ad::Var encode_visual_on_tape(ad::Tape& t, const PairedSample& sample,
                                ad::Var* visual_summary_out) const;
  ad::Var siamese_visual(ad::Tape& t, const ad::Var& prior_values) const;
  ad::Var siamese_textual(ad::Tape& t, const ad::Var& prior_values) const;

  ModelConfig cfg_;
  AlignMode mode_ = AlignMode::kSiamese;
  int vocab_size_ = 0;
  VisualSpec visual_;
  Index n_visual_ = 0;

  ad::ParamStore params_;
  nn::Linear extractor_;
  ad::ParamPtr word_emb_;
  ad::ParamPtr visual_pos_;
  ad::ParamPtr memory_;
  MemoryProjections retrieval_;
  nn::TransformerEncoder encoder_;
  SiameseEncoder siamese_;          // siamese mode
  SiameseEncoder align_visual_;     // dual mode
  SiameseEncoder align_textual_;
  nn::TransformerDecoder decoder_;
  ad::ParamPtr prompts_;
  nn::Linear out_proj_;
  Mat token_pe_;  // sinusoidal table, max_len + 2 rows
};

}  // namespace memgen
