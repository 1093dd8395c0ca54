// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "memgen/corpus.hpp"
#include "memgen/generator.hpp"
#include "memgen/trainer.hpp"

namespace memgen::testutil {

inline ModelConfig tiny_config(std::uint64_t seed = 1) {
  ModelConfig cfg = ModelConfig::desk_defaults();
  cfg.seed = seed;
  cfg.embed_dim = 16;
  cfg.memory_dim = 16;
  cfg.memory_slots = 8;
  cfg.topk = 3;
  cfg.heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.siamese_layers = 1;
  cfg.ffn_dim = 32;
  cfg.prompt_slots = 4;
  cfg.patch = 4;
  cfg.max_len = 24;
  cfg.batch = 4;
  cfg.premem = false;
  return cfg;
}

struct TinyWorld {
  Vocabulary vocab;
  PreparedDataset data;
  ModelConfig cfg;
};

inline TinyWorld tiny_world(int n_samples, int n_findings, std::uint64_t seed,
                            ModelConfig cfg = tiny_config()) {
  TinyWorld world;
  auto samples = synth_generate(n_samples, n_findings, {16, 16}, seed);
  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.report_text);
  world.vocab = build_vocab(texts, 1);
  world.data = prepare_dataset(std::move(samples), world.vocab, cfg.max_len);
  world.cfg = cfg;
  world.cfg.seed = seed;
  return world;
}

}  // namespace memgen::testutil
