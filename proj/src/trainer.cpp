// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memgen/array_store.hpp"

namespace memgen {

PreparedDataset prepare_dataset(std::vector<PairedSample> samples, const Vocabulary& vocab,
                                Index max_len) {
  PreparedDataset out;
  for (auto& sample : samples) {
    Report report = tokenize(sample.report_text, vocab);
    // Truncate to max_len content tokens, keeping the <eos> frame.
    if (report.content_length() > max_len) {
      report.tokens.resize(static_cast<std::size_t>(max_len) + 1);
      report.tokens.push_back(kEos);
    }
    bool has_content = false;
    for (std::size_t i = 1; i + 1 < report.tokens.size(); ++i)
      if (report.tokens[i] > kUnk) has_content = true;
    if (!has_content) continue;  // degenerate report, dropped
    out.samples.push_back(std::move(sample));
    out.reports.push_back(std::move(report));
  }
  return out;
}

void Checkpoint::save(const std::string& path, const ReportModel& model) const {
  ArrayStore store;
  for (const auto& p : model.params().all()) store.put("param." + p->name, p->value);
  for (const auto& p : model.params().all()) {
    if (p->adam_m.size() > 0) {
      store.put("adam_m." + p->name, p->adam_m);
      store.put("adam_v." + p->name, p->adam_v);
    }
  }
  store.meta["config"] = config.to_json();
  store.meta["config_hash"] = config.hash();
  store.meta["vocab_size"] = vocab_size;
  store.meta["visual"] = {{"precomputed", visual.precomputed},
                          {"grid_h", visual.grid_h},
                          {"grid_w", visual.grid_w},
                          {"feature_rows", visual.feature_rows}};
  store.meta["epoch"] = epoch;
  store.meta["rng_state"] = rng_state;
  store.meta["loss_history"] = loss_history;
  store.save(path);
}

std::pair<Checkpoint, std::unique_ptr<ReportModel>> Checkpoint::load(const std::string& path) {
  const ArrayStore store = ArrayStore::load(path);
  Checkpoint ckpt;
  ckpt.config = ModelConfig::from_json(store.meta.at("config"));
  const std::string stored_hash = store.meta.value("config_hash", "");
  if (stored_hash != ckpt.config.hash())
    throw std::runtime_error("Checkpoint: config hash mismatch in '" + path + "'");
  ckpt.vocab_size = store.meta.at("vocab_size").get<int>();
  const auto& vj = store.meta.at("visual");
  ckpt.visual.precomputed = vj.at("precomputed").get<bool>();
  ckpt.visual.grid_h = vj.at("grid_h").get<Index>();
  ckpt.visual.grid_w = vj.at("grid_w").get<Index>();
  ckpt.visual.feature_rows = vj.at("feature_rows").get<Index>();
  ckpt.epoch = store.meta.value("epoch", 0);
  ckpt.rng_state = store.meta.value("rng_state", "");
  ckpt.loss_history = store.meta.value("loss_history", std::vector<Scalar>{});

  auto model = std::make_unique<ReportModel>(ckpt.config, ckpt.vocab_size, ckpt.visual);
  for (const auto& p : model->params().all()) {
    const Mat& stored = store.get("param." + p->name);
    if (stored.rows() != p->value.rows() || stored.cols() != p->value.cols())
      throw std::runtime_error("Checkpoint: shape mismatch for param '" + p->name + "'");
    p->value = stored;
    if (store.has("adam_m." + p->name)) {
      p->adam_m = store.get("adam_m." + p->name);
      p->adam_v = store.get("adam_v." + p->name);
    }
  }
  return {std::move(ckpt), std::move(model)};
}

TokenSeq report_words(const Report& report, const Vocabulary& vocab) {
  TokenSeq words;
  for (int id : report.tokens)
    if (!vocab.is_special(id)) words.push_back(vocab.word_of(id));
  return words;
}

namespace {

TokenSeq decode_words(const std::vector<int>& tokens, const Vocabulary& vocab) {
  TokenSeq words;
  for (int id : tokens)
    if (!vocab.is_special(id)) words.push_back(vocab.word_of(id));
  return words;
}

// Validation BLEU over token ids (no vocabulary needed); greedy decoding
// keeps the per-epoch cost low.
Scalar validation_bleu4(const ReportModel& model, const PreparedDataset& data) {
  std::vector<TokenSeq> cands, refs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DecodeResult dec = model.greedy_decode(data.samples[i]);
    TokenSeq cand, ref;
    for (int id : dec.tokens)
      if (id >= kUnk) cand.push_back(std::to_string(id));
    for (int id : data.reports[i].tokens)
      if (id >= kUnk) ref.push_back(std::to_string(id));
    cands.push_back(std::move(cand));
    refs.push_back(std::move(ref));
  }
  return bleu_n(cands, refs, 4);
}

}  // namespace

TrainResult train(const ModelConfig& cfg, int vocab_size, const PreparedDataset& train_set,
                  const PreparedDataset* val_set, const std::optional<MemoryBank>& bank,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");
  if (cfg.premem && !bank.has_value())
    throw std::invalid_argument("train: premem is set but no memory bank was supplied");

  const VisualSpec visual = VisualSpec::from_samples(train_set.samples);

  TrainResult result;
  result.model = std::make_unique<ReportModel>(cfg, vocab_size, visual);
  ReportModel& model = *result.model;
  if (cfg.premem) model.set_memory_bank(*bank);

  ad::Adam adam(model.params().all(), cfg.lr_rest,
                {{std::string("extractor."), cfg.lr_extractor}});
  Rng rng(cfg.seed ^ 0x7261696eull);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  // Parameters of the best validation checkpoint, restored at the end.
  std::vector<Mat> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (const auto& p : model.params().all()) best_params.push_back(p->value);
  };

  ad::Tape tape;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    Scalar epoch_loss = 0.0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<const PairedSample*> samples;
      std::vector<const Report*> reports;
      for (std::size_t i = start; i < stop; ++i) {
        samples.push_back(&train_set.samples[order[i]]);
        reports.push_back(&train_set.reports[order[i]]);
      }
      tape.reset();
      const auto loss = model.forward_batch(tape, samples, reports);
      const Scalar value = loss.total.scalar();
      if (!std::isfinite(value))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(step));
      adam.zero_grad();
      tape.backward(loss.total);
      adam.step();
      epoch_loss += value * static_cast<Scalar>(stop - start);
      ++step;
    }
    epoch_loss /= static_cast<Scalar>(train_set.size());
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);

    if (val_set && val_set->size() > 0 && (epoch % cfg.val_every == 0 || epoch == cfg.epochs)) {
      const Scalar bleu4 = validation_bleu4(model, *val_set);
      result.val_bleu4_history.push_back(bleu4);
      if (bleu4 > result.best_val_bleu4) {
        result.best_val_bleu4 = bleu4;
        result.best_epoch = epoch;
        snapshot();
      }
    }
  }

  if (!best_params.empty()) {
    const auto& params = model.params().all();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
  }
  return result;
}

GenerationOutput generate_reports(const ReportModel& model, const PreparedDataset& data,
                                  const Vocabulary& vocab, int beam) {
  GenerationOutput out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DecodeResult dec = beam > 1 ? model.beam_search(data.samples[i], beam,
                                                          model.config().max_len)
                                      : model.greedy_decode(data.samples[i]);
    out.sample_ids.push_back(data.samples[i].sample_id);
    out.candidates.push_back(decode_words(dec.tokens, vocab));
    out.references.push_back(report_words(data.reports[i], vocab));
    out.logprobs.push_back(dec.logprob);
  }
  return out;
}

TopicPretrainConfig topic_config_from(const ModelConfig& cfg) {
  TopicPretrainConfig tc;
  tc.memory_slots = cfg.memory_slots;
  tc.memory_dim = cfg.memory_dim;
  tc.sinkhorn_lambda = cfg.sinkhorn_lambda;
  tc.likelihood_weight = cfg.likelihood_weight;
  tc.sinkhorn_tol = cfg.sinkhorn_tol;
  tc.sinkhorn_max_iter = cfg.sinkhorn_max_iter;
  tc.lr = cfg.pretrain_lr;
  tc.epochs = cfg.pretrain_epochs;
  tc.hidden = cfg.topic_hidden;
  tc.dropout = cfg.topic_dropout;
  tc.train_word_embeddings = !cfg.freeze_word_embeddings;
  tc.seed = cfg.seed;
  return tc;
}

PretrainResult pretrain_bank(const ModelConfig& cfg, const PreparedDataset& data,
                             const Vocabulary& vocab) {
  std::vector<BowVector> bows;
  for (const auto& report : data.reports) bows.push_back(bow(report, vocab));
  const TopicPretrainConfig tc = topic_config_from(cfg);
  Rng rng(cfg.seed ^ 0x746f7069ull);
  TopicModel model(vocab.size(), tc, rng);
  return pretrain_memory(model, bows, tc);
}

std::vector<AblationCell> ablate(const ModelConfig& base, const PreparedDataset& train_set,
                                 const PreparedDataset& val_set, const PreparedDataset& test_set,
                                 const Vocabulary& vocab, const AblationOptions& options) {
  struct RowSpec {
    const char* name;
    bool premem, sam, prompts;
  };
  const RowSpec rows[] = {{"BASE", false, false, false},
                          {"+PreMem", true, false, false},
                          {"+PreMem+wm", true, false, true},
                          {"+SAM+wm", false, true, true},
                          {"+PreMem+SAM", true, true, false},
                          {"full", true, true, true}};

  std::vector<AblationCell> cells;
  for (const std::uint64_t seed : options.seeds) {
    // One pretrained bank per seed, shared by all PreMem rows.
    std::optional<MemoryBank> bank;
    std::string bank_error;
    {
      ModelConfig cfg = base;
      cfg.seed = seed;
      try {
        bank = pretrain_bank(cfg, train_set, vocab).bank;
      } catch (const std::exception& e) {
        bank_error = e.what();
      }
    }

    auto run_cell = [&](const std::string& row, const ModelConfig& cfg) {
      AblationCell cell;
      cell.row = row;
      cell.seed = seed;
      cell.config = cfg;
      try {
        if (cfg.premem && !bank.has_value())
          throw std::runtime_error("memory pretraining failed: " + bank_error);
        TrainResult tr = train(cfg, vocab.size(), train_set, &val_set, bank);
        const GenerationOutput gen = generate_reports(*tr.model, test_set, vocab, cfg.beam);
        cell.eval = evaluate_corpus(gen.candidates, gen.references);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    };

    for (const auto& row : rows) {
      ModelConfig cfg = base;
      cfg.seed = seed;
      cfg.premem = row.premem;
      cfg.sam = row.sam;
      cfg.prompts = row.prompts;
      run_cell(row.name, cfg);
    }

    for (const long value : options.sweep_values) {
      ModelConfig cfg = base;
      cfg.seed = seed;
      cfg.premem = true;
      cfg.sam = true;
      cfg.prompts = true;
      if (options.sweep_key == "memory_slots") {
        cfg.memory_slots = value;
        cfg.topk = std::min<long>(cfg.topk, value);
      } else if (options.sweep_key == "topk") {
        cfg.topk = static_cast<int>(value);
      } else if (options.sweep_key == "batch") {
        cfg.batch = static_cast<int>(value);
      } else if (!options.sweep_key.empty()) {
        throw std::invalid_argument("ablate: unknown sweep key '" + options.sweep_key + "'");
      }
      std::optional<MemoryBank> sweep_bank = bank;
      if (options.sweep_key == "memory_slots") {
        // Bank capacity changed: pretrain a matching bank.
        try {
          sweep_bank = pretrain_bank(cfg, train_set, vocab).bank;
        } catch (const std::exception&) {
          sweep_bank.reset();
        }
      }
      AblationCell cell;
      cell.row = options.sweep_key + "=" + std::to_string(value);
      cell.seed = seed;
      cell.config = cfg;
      try {
        if (cfg.premem && !sweep_bank.has_value())
          throw std::runtime_error("memory pretraining failed for sweep cell");
        TrainResult tr = train(cfg, vocab.size(), train_set, &val_set, sweep_bank);
        const GenerationOutput gen = generate_reports(*tr.model, test_set, vocab, cfg.beam);
        cell.eval = evaluate_corpus(gen.candidates, gen.references);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string ablation_csv(const std::vector<AblationCell>& cells) {
  std::ostringstream out;
  out << "row,seed,bleu1,bleu2,bleu3,bleu4,meteor,rouge_l,error\n";
  for (const auto& c : cells) {
    out << c.row << ',' << c.seed << ',';
    if (c.failed) {
      out << ",,,,,," << '"' << c.error << '"' << '\n';
    } else {
      out << c.eval.bleu[0] << ',' << c.eval.bleu[1] << ',' << c.eval.bleu[2] << ','
          << c.eval.bleu[3] << ',' << c.eval.meteor << ',' << c.eval.rouge_l << ",\n";
    }
  }
  return out.str();
}

}  // namespace memgen
