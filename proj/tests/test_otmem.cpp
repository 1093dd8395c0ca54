// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "memgen/corpus.hpp"
#include "memgen/otmem.hpp"
#include "test_util.hpp"

using namespace memgen;

namespace {

std::vector<BowVector> synthetic_bows(int n_samples, int n_findings, std::uint64_t seed,
                                      Vocabulary* vocab_out) {
  const auto samples = synth_generate(n_samples, n_findings, {16, 16}, seed);
  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.report_text);
  const Vocabulary vocab = build_vocab(texts, 1);
  std::vector<BowVector> bows;
  for (const auto& s : samples) bows.push_back(bow(tokenize(s.report_text, vocab), vocab));
  if (vocab_out) *vocab_out = vocab;
  return bows;
}

}  // namespace

TEST_CASE("cost_matrix: aligned, opposed, orthogonal, zero rows") {
  Mat words(4, 3), topics(2, 3);
  words.row(0) << 1, 0, 0;
  words.row(1) << -2, 0, 0;
  words.row(2) << 0, 5, 0;
  words.row(3) << 0, 0, 0;  // zero norm
  topics.row(0) << 3, 0, 0;
  topics.row(1) << 0, 0, 1;
  const Mat cost = cost_matrix(words, topics);
  CHECK(cost(0, 0) == doctest::Approx(0.0));   // same direction
  CHECK(cost(1, 0) == doctest::Approx(2.0));   // opposite
  CHECK(cost(2, 0) == doctest::Approx(1.0));   // orthogonal
  CHECK(cost(3, 0) == doctest::Approx(1.0));   // zero-norm row behaves as cosine 0
  CHECK_THROWS_AS(cost_matrix(words, Mat::Zero(2, 4)), std::invalid_argument);
}

TEST_CASE("topic distribution: softmax properties and eval determinism") {
  TopicPretrainConfig cfg;
  cfg.memory_slots = 6;
  cfg.memory_dim = 8;
  cfg.hidden = 16;
  Rng rng(3);
  TopicModel model(12, cfg, rng);

  Vec bow_vec = Vec::Zero(12);
  bow_vec(5) = 0.5;
  bow_vec(7) = 0.5;
  const Vec z1 = model.topic_distribution_eval(bow_vec);
  const Vec z2 = model.topic_distribution_eval(bow_vec);
  CHECK(z1.sum() == doctest::Approx(1.0));
  CHECK((z1 - z2).cwiseAbs().maxCoeff() == 0.0);  // eval mode is deterministic
  CHECK((z1.array() > 0).all());
}

TEST_CASE("uniform topic distribution when encoder output is constant") {
  TopicPretrainConfig cfg;
  cfg.memory_slots = 5;
  cfg.memory_dim = 4;
  cfg.hidden = 8;
  Rng rng(5);
  TopicModel model(6, cfg, rng);
  // Zero the encoder to force equal logits.
  model.params().get("topic.encoder.fc1.weight")->value.setZero();
  model.params().get("topic.encoder.fc1.bias")->value.setZero();
  model.params().get("topic.encoder.fc2.weight")->value.setZero();
  model.params().get("topic.encoder.fc2.bias")->value.setZero();
  Vec bow_vec = Vec::Zero(6);
  bow_vec(2) = 1.0;
  const Vec z = model.topic_distribution_eval(bow_vec);
  for (Index j = 0; j < z.size(); ++j) CHECK(z(j) == doctest::Approx(0.2));
}

TEST_CASE("pretraining loss gradient matches finite differences") {
  Vocabulary vocab;
  const auto bows = synthetic_bows(6, 3, 21, &vocab);
  TopicPretrainConfig cfg;
  cfg.memory_slots = 4;
  cfg.memory_dim = 6;
  cfg.hidden = 10;
  cfg.dropout = 0.0;
  cfg.sinkhorn_tol = 1e-11;      // tight solve so the dual-based gradient is sharp
  cfg.sinkhorn_max_iter = 20000;
  Rng rng(7);
  TopicModel model(vocab.size(), cfg, rng);

  Rng unused(0);
  auto loss_fn = [&]() {
    Scalar total = 0.0;
    for (int s = 0; s < 3; ++s) {
      ad::Tape t;
      total += model.loss(t, bows[static_cast<std::size_t>(s)].normalized, false, unused).scalar();
    }
    return total / 3.0;
  };
  auto grad_fn = [&]() {
    model.params().zero_grad();
    ad::Tape t;
    std::vector<ad::Var> losses;
    for (int s = 0; s < 3; ++s)
      losses.push_back(model.loss(t, bows[static_cast<std::size_t>(s)].normalized, false, unused));
    const ad::Var mean = ad::mean_all(ad::concat_cols(losses));
    t.backward(mean);
  };

  Rng coord_rng(11);
  const auto report = testutil::fd_check(model.params().all(), loss_fn, grad_fn, coord_rng, 5);
  INFO("worst param ", report.worst_param, " rel err ", report.worst_rel);
  CHECK(report.worst_rel < 1e-4);
}

TEST_CASE("pretrain_memory: loss decreases over the first 10 epochs (3 seeds)") {
  Scalar first_mean = 0.0, last_mean = 0.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Vocabulary vocab;
    const auto bows = synthetic_bows(24, 3, 100 + seed, &vocab);
    TopicPretrainConfig cfg;
    cfg.memory_slots = 8;
    cfg.memory_dim = 16;
    cfg.hidden = 32;
    cfg.epochs = 10;
    cfg.lr = 2e-3;
    cfg.seed = seed;
    Rng rng(seed);
    TopicModel model(vocab.size(), cfg, rng);
    const PretrainResult result = pretrain_memory(model, bows, cfg);
    REQUIRE(result.loss_history.size() == 10);
    first_mean += result.loss_history.front();
    last_mean += result.loss_history.back();
    CHECK(result.bank.provenance == "ot-pretrained");
    CHECK(result.bank.rows.allFinite());
  }
  CHECK(last_mean / 3.0 <= first_mean / 3.0);
}

TEST_CASE("trained topic distribution concentrates on single-finding reports") {
  const int n_findings = 3;
  const auto samples = synth_generate(96, n_findings, {16, 16}, 31);
  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.report_text);
  const Vocabulary vocab = build_vocab(texts, 1);
  std::vector<BowVector> bows;
  for (const auto& s : samples) bows.push_back(bow(tokenize(s.report_text, vocab), vocab));

  TopicPretrainConfig cfg;
  cfg.memory_slots = 8;
  cfg.memory_dim = 32;
  cfg.epochs = 120;
  cfg.lr = 5e-3;
  cfg.seed = 31;
  Rng rng(31);
  TopicModel model(vocab.size(), cfg, rng);
  pretrain_memory(model, bows, cfg);

  // A fresh single-finding report should activate few topics.
  const auto templates = synth_finding_templates(n_findings);
  Scalar max_mass = 0.0;
  for (const auto& t : templates) {
    const Report r = tokenize(t.sentences[0], vocab);
    const Vec z = model.topic_distribution_eval(bow(r, vocab).normalized);
    max_mass = std::max(max_mass, z.maxCoeff());
  }
  INFO("best single-finding topic mass ", max_mass);
  CHECK(max_mass > 0.5);
}

TEST_CASE("memory bank file round trip") {
  Rng rng(17);
  MemoryBank bank;
  bank.rows = rng.gaussian(6, 4, 1.0);
  bank.provenance = "ot-pretrained";
  const std::string path =
      (std::filesystem::temp_directory_path() / "memgen_bank_rt.bin").string();
  bank.save(path, {{"alpha", 20.0}, {"epsilon", 0.07}, {"seed", 17}});
  const MemoryBank loaded = MemoryBank::load(path);
  CHECK(loaded.provenance == "ot-pretrained");
  CHECK((loaded.rows - bank.rows).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("greedy matching diagnostic on a known alignment") {
  Mat centroids(2, 3), topics(3, 3);
  centroids.row(0) << 1, 0, 0;
  centroids.row(1) << 0, 1, 0;
  topics.row(0) << 0, 2, 0;   // matches centroid 1
  topics.row(1) << 0, 0, 1;   // matches nothing
  topics.row(2) << 0.9, 0, 0; // matches centroid 0
  CHECK(greedy_match_mean_cosine(centroids, topics) == doctest::Approx(1.0));
}
