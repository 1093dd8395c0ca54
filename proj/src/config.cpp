// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/config.hpp"

#include <fstream>
#include <stdexcept>

#include "memgen/alignment.hpp"
#include "memgen/array_store.hpp"

namespace memgen {

ModelConfig ModelConfig::desk_defaults() { return ModelConfig{}; }

ModelConfig ModelConfig::paper_defaults() {
  ModelConfig c;
  c.memory_slots = 2048;
  c.memory_dim = 512;
  c.embed_dim = 512;
  c.topk = 32;
  c.heads = 8;
  c.enc_layers = 3;
  c.dec_layers = 3;
  c.siamese_layers = 1;
  c.ffn_dim = 2048;
  c.tau = 1.0;
  c.sinkhorn_lambda = 20.0;
  c.likelihood_weight = 0.07;
  c.pretrain_lr = 1e-4;
  c.lr_extractor = 1e-4;
  c.lr_rest = 5e-4;
  c.batch = 16;
  c.epochs = 50;
  c.beam = 3;
  c.min_freq = 17;
  c.max_len = 100;
  return c;
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{{"seed", seed},
                        {"memory_slots", memory_slots},
                        {"memory_dim", memory_dim},
                        {"embed_dim", embed_dim},
                        {"topk", topk},
                        {"heads", heads},
                        {"enc_layers", enc_layers},
                        {"dec_layers", dec_layers},
                        {"siamese_layers", siamese_layers},
                        {"ffn_dim", ffn_dim},
                        {"prompt_slots", prompt_slots},
                        {"patch", patch},
                        {"topic_hidden", topic_hidden},
                        {"topic_dropout", topic_dropout},
                        {"tau", tau},
                        {"sinkhorn_lambda", sinkhorn_lambda},
                        {"likelihood_weight", likelihood_weight},
                        {"sinkhorn_tol", sinkhorn_tol},
                        {"sinkhorn_max_iter", sinkhorn_max_iter},
                        {"hga_lambda_txt", hga_lambda_txt},
                        {"hga_lambda_img", hga_lambda_img},
                        {"lr_extractor", lr_extractor},
                        {"lr_rest", lr_rest},
                        {"pretrain_lr", pretrain_lr},
                        {"pretrain_epochs", pretrain_epochs},
                        {"batch", batch},
                        {"epochs", epochs},
                        {"val_every", val_every},
                        {"max_len", max_len},
                        {"beam", beam},
                        {"min_freq", min_freq},
                        {"premem", premem},
                        {"sam", sam},
                        {"prompts", prompts},
                        {"fuse_add", fuse_add},
                        {"align_mode", align_mode},
                        {"siamese_positional_encoding", siamese_positional_encoding},
                        {"freeze_word_embeddings", freeze_word_embeddings}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  read_field(j, "seed", c.seed);
  read_field(j, "memory_slots", c.memory_slots);
  read_field(j, "memory_dim", c.memory_dim);
  read_field(j, "embed_dim", c.embed_dim);
  read_field(j, "topk", c.topk);
  read_field(j, "heads", c.heads);
  read_field(j, "enc_layers", c.enc_layers);
  read_field(j, "dec_layers", c.dec_layers);
  read_field(j, "siamese_layers", c.siamese_layers);
  read_field(j, "ffn_dim", c.ffn_dim);
  read_field(j, "prompt_slots", c.prompt_slots);
  read_field(j, "patch", c.patch);
  read_field(j, "topic_hidden", c.topic_hidden);
  read_field(j, "topic_dropout", c.topic_dropout);
  read_field(j, "tau", c.tau);
  read_field(j, "sinkhorn_lambda", c.sinkhorn_lambda);
  read_field(j, "likelihood_weight", c.likelihood_weight);
  read_field(j, "sinkhorn_tol", c.sinkhorn_tol);
  read_field(j, "sinkhorn_max_iter", c.sinkhorn_max_iter);
  read_field(j, "hga_lambda_txt", c.hga_lambda_txt);
  read_field(j, "hga_lambda_img", c.hga_lambda_img);
  read_field(j, "lr_extractor", c.lr_extractor);
  read_field(j, "lr_rest", c.lr_rest);
  read_field(j, "pretrain_lr", c.pretrain_lr);
  read_field(j, "pretrain_epochs", c.pretrain_epochs);
  read_field(j, "batch", c.batch);
  read_field(j, "epochs", c.epochs);
  read_field(j, "val_every", c.val_every);
  read_field(j, "max_len", c.max_len);
  read_field(j, "beam", c.beam);
  read_field(j, "min_freq", c.min_freq);
  read_field(j, "premem", c.premem);
  read_field(j, "sam", c.sam);
  read_field(j, "prompts", c.prompts);
  read_field(j, "fuse_add", c.fuse_add);
  read_field(j, "align_mode", c.align_mode);
  read_field(j, "siamese_positional_encoding", c.siamese_positional_encoding);
  read_field(j, "freeze_word_embeddings", c.freeze_word_embeddings);
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("ModelConfig: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("ModelConfig: invalid JSON in '" + path + "': " + e.what());
  }
  return from_json(j);
}

void ModelConfig::validate() const {
  if (memory_slots < 1 || memory_dim < 1 || embed_dim < 1)
    throw std::invalid_argument("config: dimensions must be positive");
  if (topk < 1 || topk > memory_slots)
    throw std::invalid_argument("config: topk must be in [1, memory_slots]");
  if (heads < 1 || embed_dim % heads != 0)
    throw std::invalid_argument("config: heads must divide embed_dim");
  if (enc_layers < 0 || dec_layers < 1 || siamese_layers < 1)
    throw std::invalid_argument("config: invalid layer counts");
  if (prompt_slots < 0) throw std::invalid_argument("config: prompt_slots must be >= 0");
  if (beam < 1) throw std::invalid_argument("config: beam must be >= 1");
  if (max_len < 2) throw std::invalid_argument("config: max_len too small");
  if (tau <= 0 || sinkhorn_lambda <= 0)
    throw std::invalid_argument("config: tau and sinkhorn_lambda must be positive");
  if (batch < 1 || epochs < 0) throw std::invalid_argument("config: invalid batch/epochs");
  if (min_freq < 1) throw std::invalid_argument("config: min_freq must be >= 1");
  align_mode_from_string(align_mode);  // throws on unknown mode
}

std::string ModelConfig::hash() const { return content_hash(to_json().dump()); }

}  // namespace memgen
