// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "memgen/array_store.hpp"
#include "memgen/trainer.hpp"

namespace memgen::cli {

namespace {

constexpr const char* kVersion = "memgen 0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required = true) {
  cmd->add_option("--config", opts.config_path, "JSON config file (CLI flags override)");
  auto* seed_opt = cmd->add_option("--seed", opts.seed, "RNG seed");
  seed_opt->each([&opts](const std::string&) { opts.seed_given = true; });
  auto* out_opt = cmd->add_option("--out", opts.out, "output path");
  if (out_required) out_opt->required();
}

ModelConfig resolve_config(const CommonOpts& opts) {
  ModelConfig cfg = opts.config_path.empty() ? ModelConfig::desk_defaults()
                                             : ModelConfig::load(opts.config_path);
  if (opts.seed_given) cfg.seed = opts.seed;
  return cfg;
}

void write_run_json(const std::string& out_path, const std::string& command,
                    const std::vector<std::string>& argv, const ModelConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path p(out_path);
  fs::path run_path = p.parent_path() / (p.stem().string() + ".run.json");
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = cfg.to_json();
  j["config_hash"] = cfg.hash();
  j["version"] = kVersion;
  j["version_hash"] = content_hash(kVersion);
  std::ofstream out(run_path.string(), std::ios::trunc);
  if (out) out << j.dump(2) << '\n';
}

Vocabulary vocab_from(const std::string& path) { return Vocabulary::load(path); }

std::optional<MemoryBank> maybe_load_bank(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return MemoryBank::load(path);
}

int cmd_synth_data(const std::vector<std::string>& argv, const CommonOpts& opts, int n,
                   int findings, Index grid, std::uint64_t seed) {
  const auto samples = synth_generate(n, findings, {grid, grid}, seed);
  save_dataset(opts.out, samples);
  ModelConfig cfg = resolve_config(opts);
  cfg.seed = seed;
  write_run_json(opts.out, "synth-data", argv, cfg);
  std::cout << "wrote " << samples.size() << " samples to " << opts.out << '\n';
  return 0;
}

int cmd_build_vocab(const std::vector<std::string>& argv, const CommonOpts& opts,
                    const std::string& data_path, int min_freq) {
  const auto samples = load_dataset(data_path);
  std::vector<std::string> reports;
  for (const auto& s : samples) reports.push_back(s.report_text);
  const Vocabulary vocab = build_vocab(reports, min_freq);
  vocab.save(opts.out);
  ModelConfig cfg = resolve_config(opts);
  cfg.min_freq = min_freq;
  write_run_json(opts.out, "build-vocab", argv, cfg);
  std::cout << "vocabulary size " << vocab.size() << " written to " << opts.out << '\n';
  return 0;
}

int cmd_pretrain_memory(const std::vector<std::string>& argv, const CommonOpts& opts,
                        const std::string& data_path, const std::string& vocab_path,
                        const std::string& embeddings_path, ModelConfig cfg) {
  const Vocabulary vocab = vocab_from(vocab_path);
  const PreparedDataset data = prepare_dataset(load_dataset(data_path), vocab, cfg.max_len);
  if (data.size() == 0) throw std::invalid_argument("pretrain-memory: no usable samples");

  std::vector<BowVector> bows;
  for (const auto& report : data.reports) bows.push_back(bow(report, vocab));

  const TopicPretrainConfig tc = topic_config_from(cfg);
  Rng rng(cfg.seed ^ 0x746f7069ull);
  TopicModel model(vocab.size(), tc, rng);
  if (!embeddings_path.empty()) model.load_word_embeddings(embeddings_path, vocab);
  const PretrainResult result = pretrain_memory(model, bows, tc);

  ArrayStore store;
  store.put("M", result.bank.rows);
  store.put("E", model.word_embeddings());
  store.put("G", model.topic_embeddings());
  for (const auto& p : model.params().all()) {
    if (p->name.rfind("topic.encoder.", 0) == 0) store.put("theta." + p->name, p->value);
  }
  store.meta["memory_slots"] = tc.memory_slots;
  store.meta["memory_dim"] = tc.memory_dim;
  store.meta["alpha"] = tc.sinkhorn_lambda;
  store.meta["epsilon"] = tc.likelihood_weight;
  store.meta["seed"] = tc.seed;
  store.meta["provenance"] = result.bank.provenance;
  store.meta["loss_history"] = result.loss_history;
  store.save(opts.out);
  write_run_json(opts.out, "pretrain-memory", argv, cfg);
  std::cout << "pretrained memory bank (" << tc.memory_slots << " x " << tc.memory_dim
            << ") written to " << opts.out << "; final loss "
            << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << '\n';
  return 0;
}

int cmd_train(const std::vector<std::string>& argv, const CommonOpts& opts,
              const std::string& data_path, const std::string& val_path,
              const std::string& vocab_path, const std::string& bank_path, ModelConfig cfg) {
  const Vocabulary vocab = vocab_from(vocab_path);
  const PreparedDataset train_set = prepare_dataset(load_dataset(data_path), vocab, cfg.max_len);
  PreparedDataset val_set;
  if (!val_path.empty()) val_set = prepare_dataset(load_dataset(val_path), vocab, cfg.max_len);

  std::optional<MemoryBank> bank;
  if (cfg.premem) {
    if (bank_path.empty())
      throw std::invalid_argument("train: --bank is required when premem is set");
    bank = maybe_load_bank(bank_path);
  }

  TrainResult result = train(cfg, vocab.size(), train_set,
                             val_set.size() > 0 ? &val_set : nullptr, bank,
                             [](int epoch, Scalar loss) {
                               std::cout << "epoch " << epoch << " loss " << loss << '\n';
                             });

  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.vocab_size = vocab.size();
  ckpt.visual = VisualSpec::from_samples(train_set.samples);
  ckpt.epoch = cfg.epochs;
  ckpt.rng_state = Rng(cfg.seed).serialize();
  ckpt.loss_history = result.loss_history;
  ckpt.save(opts.out, *result.model);
  write_run_json(opts.out, "train", argv, cfg);
  std::cout << "checkpoint written to " << opts.out;
  if (result.best_epoch >= 0)
    std::cout << " (best val BLEU-4 " << result.best_val_bleu4 << " at epoch "
              << result.best_epoch << ")";
  std::cout << '\n';
  return 0;
}

int cmd_generate(const std::vector<std::string>& argv, const CommonOpts& opts,
                 const std::string& ckpt_path, const std::string& data_path,
                 const std::string& vocab_path, int beam_override) {
  auto [ckpt, model] = Checkpoint::load(ckpt_path);
  const Vocabulary vocab = vocab_from(vocab_path);
  const PreparedDataset data =
      prepare_dataset(load_dataset(data_path), vocab, ckpt.config.max_len);
  const int beam = beam_override > 0 ? beam_override : ckpt.config.beam;
  const GenerationOutput gen = generate_reports(*model, data, vocab, beam);

  std::ofstream out(opts.out, std::ios::trunc);
  if (!out) throw std::runtime_error("generate: cannot write '" + opts.out + "'");
  for (std::size_t i = 0; i < gen.sample_ids.size(); ++i) {
    nlohmann::json j;
    j["sample_id"] = gen.sample_ids[i];
    std::string cand, ref;
    for (const auto& w : gen.candidates[i]) cand += (cand.empty() ? "" : " ") + w;
    for (const auto& w : gen.references[i]) ref += (ref.empty() ? "" : " ") + w;
    j["generated"] = cand;
    j["reference"] = ref;
    j["logprob"] = gen.logprobs[i];
    out << j.dump() << '\n';
  }
  write_run_json(opts.out, "generate", argv, ckpt.config);
  std::cout << "generated " << gen.sample_ids.size() << " reports to " << opts.out << '\n';
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& argv, const CommonOpts& opts,
                 const std::string& gen_path, const std::string& hist_path, long bucket) {
  std::ifstream in(gen_path);
  if (!in) throw std::runtime_error("evaluate: cannot open '" + gen_path + "'");
  std::vector<TokenSeq> cands, refs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("evaluate: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("generated") || !j.contains("reference"))
      throw std::invalid_argument("evaluate: line " + std::to_string(line_no) +
                                  ": missing 'generated' or 'reference'");
    cands.push_back(split_tokens(j.at("generated").get<std::string>()));
    refs.push_back(split_tokens(j.at("reference").get<std::string>()));
  }
  const EvalReport report = evaluate_corpus(cands, refs, bucket);
  std::ofstream out(opts.out, std::ios::trunc);
  if (!out) throw std::runtime_error("evaluate: cannot write '" + opts.out + "'");
  out << report.to_json().dump(2) << '\n';
  if (!hist_path.empty()) {
    std::ofstream hist(hist_path, std::ios::trunc);
    hist << "bucket_start,count\n";
    for (const auto& [start, count] : report.length_hist) hist << start << ',' << count << '\n';
  }
  write_run_json(opts.out, "evaluate", argv, ModelConfig::desk_defaults());
  std::cout << report.to_json().dump() << '\n';
  return 0;
}

int cmd_ablate(const std::vector<std::string>& argv, const CommonOpts& opts,
               const std::string& train_path, const std::string& val_path,
               const std::string& test_path, const std::string& vocab_path, ModelConfig cfg,
               int seeds, const std::string& sweep) {
  const Vocabulary vocab = vocab_from(vocab_path);
  const PreparedDataset train_set = prepare_dataset(load_dataset(train_path), vocab, cfg.max_len);
  const PreparedDataset val_set = prepare_dataset(load_dataset(val_path), vocab, cfg.max_len);
  const PreparedDataset test_set = prepare_dataset(load_dataset(test_path), vocab, cfg.max_len);

  AblationOptions options;
  options.seeds.clear();
  for (int s = 0; s < seeds; ++s) options.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(s));
  if (!sweep.empty()) {
    const auto eq = sweep.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("ablate: --sweep expects key=v1,v2,...");
    options.sweep_key = sweep.substr(0, eq);
    std::istringstream iss(sweep.substr(eq + 1));
    std::string item;
    while (std::getline(iss, item, ',')) options.sweep_values.push_back(std::stol(item));
  }

  const auto cells = ablate(cfg, train_set, val_set, test_set, vocab, options);
  std::ofstream out(opts.out, std::ios::trunc);
  if (!out) throw std::runtime_error("ablate: cannot write '" + opts.out + "'");
  out << ablation_csv(cells);
  write_run_json(opts.out, "ablate", argv, cfg);
  std::cout << ablation_csv(cells);
  return 0;
}

int cmd_inspect_memory(const std::vector<std::string>& argv, const CommonOpts& opts,
                       const std::string& ckpt_path, const std::string& data_path,
                       const std::string& vocab_path, const std::string& embeddings_out) {
  auto [ckpt, model] = Checkpoint::load(ckpt_path);
  const Vocabulary vocab = vocab_from(vocab_path);
  const PreparedDataset data =
      prepare_dataset(load_dataset(data_path), vocab, ckpt.config.max_len);

  std::ofstream out(opts.out, std::ios::trunc);
  if (!out) throw std::runtime_error("inspect-memory: cannot write '" + opts.out + "'");
  out << "sample_id,modality,position,token_or_patch,indices,weights\n";
  auto write_rows = [&out](const std::string& sample_id, const PriorKnowledge& pk,
                           const std::function<std::string(Index)>& label, const char* modality) {
    for (Index i = 0; i < pk.indices.rows(); ++i) {
      out << sample_id << ',' << modality << ',' << i << ',' << label(i) << ',';
      for (Index j = 0; j < pk.indices.cols(); ++j)
        out << (j ? ";" : "") << pk.indices(i, j);
      out << ',';
      for (Index j = 0; j < pk.weights.cols(); ++j)
        out << (j ? ";" : "") << pk.weights(i, j);
      out << '\n';
    }
  };

  std::vector<SemanticEmbedding> embeddings;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const RetrievalRecord rec = model->inspect_retrieval(data.samples[i], data.reports[i]);
    write_rows(data.samples[i].sample_id, rec.visual,
               [](Index pos) { return "patch_" + std::to_string(pos); }, "visual");
    write_rows(data.samples[i].sample_id, rec.textual,
               [&](Index pos) { return vocab.word_of(rec.textual_tokens[static_cast<std::size_t>(pos)]); },
               "textual");
    if (!embeddings_out.empty() && ckpt.config.sam && ckpt.config.align_mode != "hga") {
      embeddings.push_back(
          model->semantic_embedding(data.samples[i], data.reports[i], Modality::kVisual));
      embeddings.push_back(
          model->semantic_embedding(data.samples[i], data.reports[i], Modality::kTextual));
    }
  }
  if (!embeddings_out.empty() && !embeddings.empty())
    export_embeddings_csv(embeddings_out, embeddings);
  write_run_json(opts.out, "inspect-memory", argv, ckpt.config);
  std::cout << "retrieval records for " << data.size() << " samples written to " << opts.out
            << '\n';
  return 0;
}

// CLI values override config-file values only when actually passed; the
// recorded appliers copy parsed fields onto the file-provided base.
struct ConfigOverrides {
  ModelConfig parsed = ModelConfig::desk_defaults();
  std::vector<std::pair<CLI::Option*, std::function<void(ModelConfig&, const ModelConfig&)>>>
      appliers;

  void apply(ModelConfig& base) const {
    for (const auto& [opt, copy] : appliers)
      if (opt->count() > 0) copy(base, parsed);
  }
};

void add_config_overrides(CLI::App* cmd, ConfigOverrides& ov) {
  ModelConfig& cfg = ov.parsed;
  auto track = [&](CLI::Option* opt, auto member) {
    ov.appliers.emplace_back(opt, [member](ModelConfig& dst, const ModelConfig& src) {
      dst.*member = src.*member;
    });
  };
  track(cmd->add_option("--alpha", cfg.sinkhorn_lambda, "Sinkhorn regularization multiplier"),
        &ModelConfig::sinkhorn_lambda);
  track(cmd->add_option("--eps", cfg.likelihood_weight, "likelihood term weight"),
        &ModelConfig::likelihood_weight);
  track(cmd->add_option("--nm", cfg.memory_slots, "memory bank capacity"),
        &ModelConfig::memory_slots);
  track(cmd->add_option("--dm", cfg.memory_dim, "memory bank feature dimension"),
        &ModelConfig::memory_dim);
  track(cmd->add_option("--dim", cfg.embed_dim, "model dimension"), &ModelConfig::embed_dim);
  track(cmd->add_option("--topk", cfg.topk, "retrieved rows per query"), &ModelConfig::topk);
  track(cmd->add_option("--tau", cfg.tau, "contrastive temperature"), &ModelConfig::tau);
  track(cmd->add_option("--batch", cfg.batch, "mini-batch size"), &ModelConfig::batch);
  track(cmd->add_option("--epochs", cfg.epochs, "training epochs"), &ModelConfig::epochs);
  track(cmd->add_option("--beam", cfg.beam, "beam size"), &ModelConfig::beam);
  track(cmd->add_option("--lr", cfg.pretrain_lr, "pretraining learning rate"),
        &ModelConfig::pretrain_lr);
  track(cmd->add_option("--pretrain-epochs", cfg.pretrain_epochs, "pretraining epochs"),
        &ModelConfig::pretrain_epochs);
  track(cmd->add_option("--lr-extractor", cfg.lr_extractor, "extractor learning rate"),
        &ModelConfig::lr_extractor);
  track(cmd->add_option("--lr-rest", cfg.lr_rest, "learning rate of everything else"),
        &ModelConfig::lr_rest);
  track(cmd->add_option("--max-len", cfg.max_len, "maximum generated length"),
        &ModelConfig::max_len);
  track(cmd->add_option("--prompt-slots", cfg.prompt_slots, "learnable prompt rows"),
        &ModelConfig::prompt_slots);
  track(cmd->add_option("--min-freq", cfg.min_freq, "vocabulary frequency threshold"),
        &ModelConfig::min_freq);
  track(cmd->add_flag("--premem,!--no-premem", cfg.premem, "use a pretrained memory bank"),
        &ModelConfig::premem);
  track(cmd->add_flag("--sam,!--no-sam", cfg.sam, "enable the alignment module"),
        &ModelConfig::sam);
  track(cmd->add_flag("--wm,!--no-wm", cfg.prompts, "enable learnable prompts"),
        &ModelConfig::prompts);
  track(cmd->add_flag("--fuse-add,!--no-fuse-add", cfg.fuse_add,
                      "add semantic embedding to encoder"),
        &ModelConfig::fuse_add);
  track(cmd->add_option("--align-mode", cfg.align_mode, "siamese|dual|hga"),
        &ModelConfig::align_mode);
}

ModelConfig finalize_config(const CommonOpts& opts, const ConfigOverrides& ov) {
  ModelConfig cfg = opts.config_path.empty() ? ModelConfig::desk_defaults()
                                             : ModelConfig::load(opts.config_path);
  ov.apply(cfg);
  if (opts.seed_given) cfg.seed = opts.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"memory-augmented cross-modal report generation toolkit"};
  app.require_subcommand(1);

  // synth-data
  CommonOpts synth_opts;
  int synth_n = 512, synth_findings = 8;
  Index synth_grid = 16;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic paired dataset");
  synth->add_option("--n", synth_n, "number of samples")->required();
  synth->add_option("--findings", synth_findings, "number of planted findings");
  synth->add_option("--grid", synth_grid, "square grid side");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--config", synth_opts.config_path, "JSON config file");
  synth->add_option("--out", synth_opts.out, "output JSONL")->required();

  // build-vocab
  CommonOpts vocab_opts;
  std::string vocab_data;
  int vocab_min_freq = 3;
  auto* bvocab = app.add_subcommand("build-vocab", "build a vocabulary from dataset reports");
  bvocab->add_option("--data", vocab_data, "dataset JSONL")->required();
  bvocab->add_option("--min-freq", vocab_min_freq, "frequency threshold");
  add_common(bvocab, vocab_opts);

  // pretrain-memory
  CommonOpts pre_opts;
  std::string pre_data, pre_vocab, pre_embeddings;
  ConfigOverrides pre_ov;
  auto* pre = app.add_subcommand("pretrain-memory", "pretrain the memory bank on reports");
  pre->add_option("--data", pre_data, "dataset JSONL")->required();
  pre->add_option("--vocab", pre_vocab, "vocabulary file")->required();
  pre->add_option("--embeddings", pre_embeddings, "optional word-embedding text file");
  add_config_overrides(pre, pre_ov);
  add_common(pre, pre_opts);

  // train
  CommonOpts train_opts;
  std::string train_data, train_val, train_vocab, train_bank;
  ConfigOverrides train_ov;
  auto* train_cmd = app.add_subcommand("train", "train the full model");
  train_cmd->add_option("--data", train_data, "training JSONL")->required();
  train_cmd->add_option("--val", train_val, "validation JSONL");
  train_cmd->add_option("--vocab", train_vocab, "vocabulary file")->required();
  train_cmd->add_option("--bank", train_bank, "pretrained memory bank file");
  add_config_overrides(train_cmd, train_ov);
  add_common(train_cmd, train_opts);

  // generate
  CommonOpts gen_opts;
  std::string gen_ckpt, gen_data, gen_vocab;
  int gen_beam = 0;
  auto* gen = app.add_subcommand("generate", "decode reports for a dataset");
  gen->add_option("--ckpt", gen_ckpt, "model checkpoint")->required();
  gen->add_option("--data", gen_data, "dataset JSONL")->required();
  gen->add_option("--vocab", gen_vocab, "vocabulary file")->required();
  gen->add_option("--beam", gen_beam, "beam size override");
  add_common(gen, gen_opts);

  // evaluate
  CommonOpts eval_opts;
  std::string eval_gen, eval_hist;
  long eval_bucket = 5;
  auto* eval = app.add_subcommand("evaluate", "score generated reports");
  eval->add_option("--gen", eval_gen, "generation JSONL (from generate)")->required();
  eval->add_option("--hist", eval_hist, "CSV path for the length histogram");
  eval->add_option("--bucket", eval_bucket, "length histogram bucket width");
  add_common(eval, eval_opts);

  // ablate
  CommonOpts abl_opts;
  std::string abl_train, abl_val, abl_test, abl_vocab, abl_sweep;
  int abl_seeds = 3;
  ConfigOverrides abl_ov;
  auto* abl = app.add_subcommand("ablate", "run the ablation grid");
  abl->add_option("--data", abl_train, "training JSONL")->required();
  abl->add_option("--val", abl_val, "validation JSONL")->required();
  abl->add_option("--test", abl_test, "test JSONL")->required();
  abl->add_option("--vocab", abl_vocab, "vocabulary file")->required();
  abl->add_option("--seeds", abl_seeds, "number of seeds");
  abl->add_option("--sweep", abl_sweep, "sweep spec, e.g. memory_slots=32,64,128");
  add_config_overrides(abl, abl_ov);
  add_common(abl, abl_opts);

  // inspect-memory
  CommonOpts ins_opts;
  std::string ins_ckpt, ins_data, ins_vocab, ins_embeddings;
  auto* ins = app.add_subcommand("inspect-memory", "export retrieval records as CSV");
  ins->add_option("--ckpt", ins_ckpt, "model checkpoint")->required();
  ins->add_option("--data", ins_data, "dataset JSONL")->required();
  ins->add_option("--vocab", ins_vocab, "vocabulary file")->required();
  ins->add_option("--embeddings", ins_embeddings, "CSV path for semantic embeddings");
  add_common(ins, ins_opts);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", 1}}.dump() << '\n';
    std::cerr << app.help() << '\n';
    return 1;
  }

  try {
    if (synth->parsed())
      return cmd_synth_data(args, synth_opts, synth_n, synth_findings, synth_grid, synth_seed);
    if (bvocab->parsed()) return cmd_build_vocab(args, vocab_opts, vocab_data, vocab_min_freq);
    if (pre->parsed()) {
      return cmd_pretrain_memory(args, pre_opts, pre_data, pre_vocab, pre_embeddings,
                                 finalize_config(pre_opts, pre_ov));
    }
    if (train_cmd->parsed()) {
      return cmd_train(args, train_opts, train_data, train_val, train_vocab, train_bank,
                       finalize_config(train_opts, train_ov));
    }
    if (gen->parsed()) return cmd_generate(args, gen_opts, gen_ckpt, gen_data, gen_vocab, gen_beam);
    if (eval->parsed()) return cmd_evaluate(args, eval_opts, eval_gen, eval_hist, eval_bucket);
    if (abl->parsed()) {
      return cmd_ablate(args, abl_opts, abl_train, abl_val, abl_test, abl_vocab,
                        finalize_config(abl_opts, abl_ov), abl_seeds, abl_sweep);
    }
    if (ins->parsed())
      return cmd_inspect_memory(args, ins_opts, ins_ckpt, ins_data, ins_vocab, ins_embeddings);
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", 1}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", 2}}.dump() << '\n';
    return 2;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace memgen::cli
