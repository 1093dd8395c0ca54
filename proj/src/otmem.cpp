// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/otmem.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memgen/array_store.hpp"

namespace memgen {

void MemoryBank::save(const std::string& path, const nlohmann::json& extra_meta) const {
  ArrayStore store;
  store.put("M", rows);
  store.meta = extra_meta;
  store.meta["memory_slots"] = rows.rows();
  store.meta["memory_dim"] = rows.cols();
  store.meta["provenance"] = provenance;
  store.save(path);
}

MemoryBank MemoryBank::load(const std::string& path) {
  const ArrayStore store = ArrayStore::load(path);
  MemoryBank bank;
  bank.rows = store.get("M");
  bank.provenance = store.meta.value("provenance", "random");
  if (!bank.rows.allFinite()) throw std::runtime_error("MemoryBank: non-finite entries in '" + path + "'");
  return bank;
}

TopicModel::TopicModel(Index vocab_size, const TopicPretrainConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.memory_slots < 1 || cfg.memory_dim < 1)
    throw std::invalid_argument("TopicModel: memory_slots and memory_dim must be positive");
  Mat word_init = rng.gaussian(vocab_size, cfg.memory_dim, 1.0);
  for (Index i = 0; i < word_init.rows(); ++i) word_init.row(i).normalize();
  word_emb_ = params_.create("topic.word_emb", std::move(word_init), cfg.train_word_embeddings);
  topic_emb_ = params_.create("topic.topic_emb", rng.gaussian(cfg.memory_slots, cfg.memory_dim, 1.0));
  fc1_ = nn::Linear(params_, rng, "topic.encoder.fc1", vocab_size, cfg.hidden);
  fc2_ = nn::Linear(params_, rng, "topic.encoder.fc2", cfg.hidden, cfg.memory_slots);
}

void TopicModel::load_word_embeddings(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("TopicModel: cannot open embeddings '" + path + "'");
  std::string line;
  long loaded = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string word;
    iss >> word;
    auto it = vocab.word_to_id.find(word);
    if (it == vocab.word_to_id.end()) continue;
    Vec row(cfg_.memory_dim);
    for (Index d = 0; d < cfg_.memory_dim; ++d) {
      if (!(iss >> row(d)))
        throw std::runtime_error("TopicModel: embedding line for '" + word + "' has fewer than " +
                                 std::to_string(cfg_.memory_dim) + " values");
    }
    word_emb_->value.row(it->second) = row.transpose();
    ++loaded;
  }
  if (loaded == 0) throw std::runtime_error("TopicModel: no vocabulary words found in '" + path + "'");
}

ad::Var TopicModel::topic_distribution(ad::Tape& t, const Vec& bow_normalized, bool training,
                                       Rng& rng) {
  const ad::Var x = t.constant(bow_normalized.transpose());
  ad::Var h = ad::relu(fc1_(t, x));
  h = ad::dropout(h, cfg_.dropout, rng, training);
  return ad::softmax_rows(fc2_(t, h));
}

ad::Var TopicModel::loss(ad::Tape& t, const Vec& bow_normalized, bool training, Rng& rng) {
  const ad::Var z = topic_distribution(t, bow_normalized, training, rng);

  const ad::Var words = ad::normalize_rows(t.leaf(word_emb_));
  const ad::Var topics = ad::normalize_rows(t.leaf(topic_emb_));
  const ad::Var cosine = ad::matmul_nt(words, topics);      // V x N
  const ad::Var cost = ad::affine(cosine, -1.0, 1.0);       // 1 - cos

  // Expected multinomial log-likelihood of the decoder softmax((2-P) z).
  const ad::Var decoder_logits = ad::matmul_nt(z, ad::affine(cosine, 1.0, 1.0));  // 1 x V
  const ad::Var log_probs = ad::log_softmax_rows(decoder_logits);
  const ad::Var likelihood = ad::sum_all(ad::cmul(t.constant(bow_normalized.transpose()), log_probs));

  const ad::Var transport = ad::sinkhorn_loss(cost, z, bow_normalized, cfg_.sinkhorn_lambda,
                                              cfg_.sinkhorn_tol, cfg_.sinkhorn_max_iter);
  return ad::scale(likelihood, -cfg_.likelihood_weight) + transport;
}

Vec TopicModel::topic_distribution_eval(const Vec& bow_normalized) {
  ad::Tape t;
  Rng unused(0);
  return topic_distribution(t, bow_normalized, false, unused).value().row(0).transpose();
}

Mat cost_matrix(const Mat& word_embeddings, const Mat& topic_embeddings) {
  if (word_embeddings.cols() != topic_embeddings.cols())
    throw std::invalid_argument("cost_matrix: embedding dimensions differ");
  Mat wn = word_embeddings;
  Mat tn = topic_embeddings;
  for (Index i = 0; i < wn.rows(); ++i) {
    const Scalar n = wn.row(i).norm();
    if (n < 1e-12)
      wn.row(i).setZero();
    else
      wn.row(i) /= n;
  }
  for (Index j = 0; j < tn.rows(); ++j) {
    const Scalar n = tn.row(j).norm();
    if (n < 1e-12)
      tn.row(j).setZero();
    else
      tn.row(j) /= n;
  }
  return Mat::Ones(wn.rows(), tn.rows()) - wn * tn.transpose();
}

PretrainResult pretrain_memory(TopicModel& model, const std::vector<BowVector>& corpus,
                               const TopicPretrainConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("pretrain_memory: empty corpus");

  Rng rng(cfg.seed + 0x51ul);
  ad::Adam adam(model.params().all(), cfg.lr);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  PretrainResult result;
  ad::Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    Scalar epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      tape.reset();
      std::vector<ad::Var> losses;
      for (std::size_t i = start; i < stop; ++i)
        losses.push_back(model.loss(tape, corpus[order[i]].normalized, true, rng));
      const ad::Var batch_loss = ad::mean_all(ad::concat_cols(losses));
      const Scalar value = batch_loss.scalar();
      if (!std::isfinite(value))
        throw std::runtime_error("pretrain_memory: loss diverged at epoch " + std::to_string(epoch));
      adam.zero_grad();
      tape.backward(batch_loss);
      adam.step();
      epoch_loss += value * static_cast<Scalar>(stop - start);
    }
    result.loss_history.push_back(epoch_loss / static_cast<Scalar>(corpus.size()));
  }

  result.bank.rows = model.topic_embeddings();
  result.bank.provenance = "ot-pretrained";
  return result;
}

Scalar greedy_match_mean_cosine(const Mat& centroids, const Mat& topics) {
  Mat sims(centroids.rows(), topics.rows());
  for (Index i = 0; i < centroids.rows(); ++i)
    for (Index j = 0; j < topics.rows(); ++j) {
      const Scalar denom = centroids.row(i).norm() * topics.row(j).norm();
      sims(i, j) = denom < 1e-12 ? 0.0 : centroids.row(i).dot(topics.row(j)) / denom;
    }
  std::vector<bool> row_used(static_cast<std::size_t>(centroids.rows()), false);
  std::vector<bool> col_used(static_cast<std::size_t>(topics.rows()), false);
  Scalar total = 0.0;
  const Index picks = std::min(centroids.rows(), topics.rows());
  for (Index pick = 0; pick < picks; ++pick) {
    Scalar best = -2.0;
    Index bi = -1, bj = -1;
    for (Index i = 0; i < sims.rows(); ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      for (Index j = 0; j < sims.cols(); ++j) {
        if (col_used[static_cast<std::size_t>(j)]) continue;
        if (sims(i, j) > best) {
          best = sims(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[static_cast<std::size_t>(bi)] = true;
    col_used[static_cast<std::size_t>(bj)] = true;
    total += best;
  }
  return total / static_cast<Scalar>(picks);
}

}  // namespace memgen
