// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "memgen/autodiff.hpp"
#include "memgen/corpus.hpp"
#include "memgen/nn.hpp"
#include "memgen/types.hpp"

namespace memgen {

struct MemoryBank {
  Mat rows;  // memory_slots x memory_dim
  std::string provenance = "random";  // "ot-pretrained" | "random"
  bool trainable = true;

  void save(const std::string& path, const nlohmann::json& extra_meta = {}) const;
  static MemoryBank load(const std::string& path);
};

struct TopicPretrainConfig {
  Index memory_slots = 64;   // number of topics
  Index memory_dim = 64;     // topic/word embedding dimension
  Scalar sinkhorn_lambda = 20.0;
  Scalar likelihood_weight = 0.07;
  Scalar sinkhorn_tol = 1e-6;
  int sinkhorn_max_iter = 500;
  Scalar lr = 1e-3;
  int epochs = 200;
  int batch = 16;
  Index hidden = 256;
  Scalar dropout = 0.1;
  bool train_word_embeddings = true;
  std::uint64_t seed = 1;
};

// Topic model that pre-trains the memory bank: an MLP encoder maps a
// normalized bag-of-words to a topic distribution, and word/topic embeddings
// define the transport cost between words and topics.
class TopicModel {
 public:
  TopicModel(Index vocab_size, const TopicPretrainConfig& cfg, Rng& rng);

  // Optionally overrides the word-embedding init (one "word v0 v1 ..." line
  // per word; missing words keep their random rows).
  void load_word_embeddings(const std::string& path, const Vocabulary& vocab);

  ad::Var topic_distribution(ad::Tape& t, const Vec& bow_normalized, bool training, Rng& rng);
  ad::Var loss(ad::Tape& t, const Vec& bow_normalized, bool training, Rng& rng);

  Vec topic_distribution_eval(const Vec& bow_normalized);

  const Mat& word_embeddings() const { return word_emb_->value; }
  const Mat& topic_embeddings() const { return topic_emb_->value; }
  ad::ParamStore& params() { return params_; }
  const TopicPretrainConfig& config() const { return cfg_; }

 private:
  TopicPretrainConfig cfg_;
  ad::ParamStore params_;
  ad::ParamPtr word_emb_;   // E: vocab x memory_dim, unit-norm rows at init
  ad::ParamPtr topic_emb_;  // G: memory_slots x memory_dim
  nn::Linear fc1_, fc2_;
};

// Transport cost between word and topic embeddings: 1 - cos(e_i, g_j);
// zero-norm rows behave as cosine 0 (cost 1).
Mat cost_matrix(const Mat& word_embeddings, const Mat& topic_embeddings);

struct PretrainResult {
  MemoryBank bank;
  std::vector<Scalar> loss_history;  // mean loss per epoch
};

// Minimizes  -likelihood_weight * bow' log softmax((2-P) z)  +  OT(bow, z; P)
// over the encoder, topic embeddings and (optionally) word embeddings.
// Throws std::runtime_error with the epoch index if the loss diverges.
PretrainResult pretrain_memory(TopicModel& model, const std::vector<BowVector>& corpus,
                               const TopicPretrainConfig& cfg);

// Mean cosine of greedily matching each centroid row to its best remaining
// topic row (diagnostic used by the planted-topic recovery checks).
Scalar greedy_match_mean_cosine(const Mat& centroids, const Mat& topics);

}  // namespace memgen
