// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "memgen/types.hpp"

namespace memgen {

// Every hyperparameter of the pipeline. desk_defaults() is the working
// configuration for the synthetic benchmark; paper_defaults() documents the
// full-scale reference settings.
struct ModelConfig {
  std::uint64_t seed = 1;

  // dimensions
  Index memory_slots = 64;   // memory bank capacity
  Index memory_dim = 64;     // memory bank feature dimension
  Index embed_dim = 64;      // shared model dimension
  int topk = 8;              // retrieved memory rows per query
  int heads = 8;
  int enc_layers = 3;
  int dec_layers = 3;
  int siamese_layers = 1;
  Index ffn_dim = 128;
  Index prompt_slots = 8;    // learnable prompt rows in the decoder memory
  Index patch = 4;           // patch size of the built-in extractor
  Index topic_hidden = 256;  // hidden width of the topic encoder MLP
  Scalar topic_dropout = 0.1;

  // losses / solver
  Scalar tau = 1.0;
  Scalar sinkhorn_lambda = 20.0;
  Scalar likelihood_weight = 0.07;
  Scalar sinkhorn_tol = 1e-6;
  int sinkhorn_max_iter = 500;
  Scalar hga_lambda_txt = 1.0;
  Scalar hga_lambda_img = 1.0;

  // optimization
  Scalar lr_extractor = 1e-4;
  Scalar lr_rest = 5e-4;
  Scalar pretrain_lr = 5e-3;
  int pretrain_epochs = 200;
  int batch = 16;
  int epochs = 50;
  int val_every = 5;

  // generation
  Index max_len = 64;
  int beam = 3;

  // corpus
  int min_freq = 3;

  // ablation flags
  bool premem = true;       // initialize the bank from a pretrained file
  bool sam = true;          // alignment module active
  bool prompts = true;      // learnable prompts in the decoder
  bool fuse_add = true;     // add the visual semantic embedding to the encoder output
  std::string align_mode = "siamese";  // siamese | dual | hga
  bool siamese_positional_encoding = true;
  bool freeze_word_embeddings = false;

  static ModelConfig desk_defaults();
  static ModelConfig paper_defaults();

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  static ModelConfig load(const std::string& path);
  void validate() const;  // throws std::invalid_argument
  std::string hash() const;
};

}  // namespace memgen
