// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memgen/config.hpp"
#include "memgen/corpus.hpp"
#include "memgen/generator.hpp"
#include "memgen/metrics.hpp"
#include "memgen/otmem.hpp"

namespace memgen {

// Samples with tokenized (and max_len-truncated) reports; entries whose
// report has no in-vocabulary content are dropped.
struct PreparedDataset {
  std::vector<PairedSample> samples;
  std::vector<Report> reports;

  std::size_t size() const { return samples.size(); }
};

PreparedDataset prepare_dataset(std::vector<PairedSample> samples, const Vocabulary& vocab,
                                Index max_len);

struct Checkpoint {
  ModelConfig config;
  int vocab_size = 0;
  VisualSpec visual;
  int epoch = 0;
  std::string rng_state;
  std::vector<Scalar> loss_history;

  void save(const std::string& path, const ReportModel& model) const;
  // Rebuilds the model from the stored config and parameter tensors.
  static std::pair<Checkpoint, std::unique_ptr<ReportModel>> load(const std::string& path);
};

struct TrainResult {
  std::unique_ptr<ReportModel> model;
  std::vector<Scalar> loss_history;        // mean joint loss per epoch
  std::vector<Scalar> val_bleu4_history;   // one entry per validation pass
  Scalar best_val_bleu4 = -1.0;
  int best_epoch = -1;
};

using EpochCallback = std::function<void(int epoch, Scalar loss)>;

// Joint training per the configured flags. If cfg.premem, `bank` must be
// supplied (pretrained memory); otherwise the bank stays at its random
// unit-Gaussian initialization. Keeps the best-validation-BLEU-4 parameters
// when a validation set is given.
TrainResult train(const ModelConfig& cfg, int vocab_size, const PreparedDataset& train_set,
                  const PreparedDataset* val_set, const std::optional<MemoryBank>& bank,
                  const EpochCallback& on_epoch = nullptr);

// Decodes every sample (beam when beam > 1) and scores against references.
struct GenerationOutput {
  std::vector<std::string> sample_ids;
  std::vector<TokenSeq> candidates;
  std::vector<TokenSeq> references;
  std::vector<Scalar> logprobs;
};
GenerationOutput generate_reports(const ReportModel& model, const PreparedDataset& data,
                                  const Vocabulary& vocab, int beam);
TokenSeq report_words(const Report& report, const Vocabulary& vocab);

// One ablation harness cell.
struct AblationCell {
  std::string row;  // BASE, +PreMem, ...
  std::uint64_t seed = 0;
  ModelConfig config;
  EvalReport eval;
  bool failed = false;
  std::string error;
};

// Runs the standard flag grid (BASE, +PreMem, +PreMem+wm, +SAM+wm,
// +PreMem+SAM, full) over the given seeds, pretraining one memory bank per
// seed and reusing it for all PreMem rows. Per-cell failures are recorded
// and do not stop the grid. `sweep` optionally adds single-knob sweeps
// ("memory_slots", "topk" or "batch" with a list of values) applied to the
// full configuration.
struct AblationOptions {
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string sweep_key;            // empty = flag grid only
  std::vector<long> sweep_values;
};
std::vector<AblationCell> ablate(const ModelConfig& base, const PreparedDataset& train_set,
                                 const PreparedDataset& val_set, const PreparedDataset& test_set,
                                 const Vocabulary& vocab, const AblationOptions& options);

std::string ablation_csv(const std::vector<AblationCell>& cells);

// Pretrains a topic model on the dataset reports and returns the bank.
PretrainResult pretrain_bank(const ModelConfig& cfg, const PreparedDataset& data,
                             const Vocabulary& vocab);
TopicPretrainConfig topic_config_from(const ModelConfig& cfg);

}  // namespace memgen
