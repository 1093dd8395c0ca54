// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "memgen/autodiff.hpp"
#include "memgen/rng.hpp"
#include "memgen/types.hpp"

namespace memgen::nn {

using ad::ParamPtr;
using ad::ParamStore;
using ad::Tape;
using ad::Var;

Mat glorot(Rng& rng, Index rows, Index cols);
Mat sinusoidal_encoding(Index len, Index dim);
Mat causal_mask(Index len);  // 0 on/below the diagonal, -1e30 strictly above

struct Linear {
  ParamPtr weight, bias;

  Linear() = default;
  Linear(ParamStore& store, Rng& rng, const std::string& name, Index in, Index out);
  Var operator()(Tape& t, const Var& x) const;
};

struct LayerNorm {
  ParamPtr gain, bias;

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, Index dim);
  Var operator()(Tape& t, const Var& x) const;
};

struct MultiHeadAttention {
  Linear wq, wk, wv, wo;
  int heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, Rng& rng, const std::string& name, Index dim, int heads);
  // add_mask, when present, is added to the pre-softmax scores of every head.
  Var operator()(Tape& t, const Var& queries, const Var& keys_values,
                 const Mat* add_mask = nullptr) const;
};

struct FeedForward {
  Linear fc1, fc2;

  FeedForward() = default;
  FeedForward(ParamStore& store, Rng& rng, const std::string& name, Index dim, Index hidden);
  Var operator()(Tape& t, const Var& x) const;
};

// Post-norm transformer encoder layer: LN(x + attn) then LN(.+ ffn).
struct EncoderLayer {
  MultiHeadAttention attn;
  FeedForward ffn;
  LayerNorm norm1, norm2;

  EncoderLayer() = default;
  EncoderLayer(ParamStore& store, Rng& rng, const std::string& name, Index dim, int heads,
               Index ffn_hidden);
  Var operator()(Tape& t, const Var& x, const Mat* add_mask = nullptr) const;
};

struct DecoderLayer {
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ffn;
  LayerNorm norm1, norm2, norm3;

  DecoderLayer() = default;
  DecoderLayer(ParamStore& store, Rng& rng, const std::string& name, Index dim, int heads,
               Index ffn_hidden);
  Var operator()(Tape& t, const Var& x, const Var& memory, const Mat& self_mask) const;
};

struct TransformerEncoder {
  std::vector<EncoderLayer> layers;

  TransformerEncoder() = default;
  TransformerEncoder(ParamStore& store, Rng& rng, const std::string& name, int n_layers,
                     Index dim, int heads, Index ffn_hidden);
  Var operator()(Tape& t, Var x, const Mat* add_mask = nullptr) const;
};

struct TransformerDecoder {
  std::vector<DecoderLayer> layers;

  TransformerDecoder() = default;
  TransformerDecoder(ParamStore& store, Rng& rng, const std::string& name, int n_layers,
                     Index dim, int heads, Index ffn_hidden);
  Var operator()(Tape& t, Var x, const Var& memory, const Mat& self_mask) const;
};

}  // namespace memgen::nn
