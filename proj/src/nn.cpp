// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace memgen::nn {

Mat glorot(Rng& rng, Index rows, Index cols) {
  const Scalar stddev = std::sqrt(2.0 / static_cast<Scalar>(rows + cols));
  return rng.gaussian(rows, cols, stddev);
}

Mat sinusoidal_encoding(Index len, Index dim) {
  Mat pe(len, dim);
  for (Index pos = 0; pos < len; ++pos) {
    for (Index i = 0; i < dim; i += 2) {
      const Scalar denom = std::pow(10000.0, static_cast<Scalar>(i) / static_cast<Scalar>(dim));
      pe(pos, i) = std::sin(static_cast<Scalar>(pos) / denom);
      if (i + 1 < dim) pe(pos, i + 1) = std::cos(static_cast<Scalar>(pos) / denom);
    }
  }
  return pe;
}

Mat causal_mask(Index len) {
  Mat m = Mat::Zero(len, len);
  for (Index i = 0; i < len; ++i)
    for (Index j = i + 1; j < len; ++j) m(i, j) = -1e30;
  return m;
}

Linear::Linear(ParamStore& store, Rng& rng, const std::string& name, Index in, Index out) {
  weight = store.create(name + ".weight", glorot(rng, in, out));
  bias = store.create(name + ".bias", Mat::Zero(1, out));
}

Var Linear::operator()(Tape& t, const Var& x) const {
  return ad::broadcast_add_row(ad::matmul(x, t.leaf(weight)), t.leaf(bias));
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, Index dim) {
  gain = store.create(name + ".gain", Mat::Ones(1, dim));
  bias = store.create(name + ".bias", Mat::Zero(1, dim));
}

Var LayerNorm::operator()(Tape& t, const Var& x) const {
  return ad::layer_norm_rows(x, t.leaf(gain), t.leaf(bias));
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, Rng& rng, const std::string& name,
                                       Index dim, int heads_)
    : wq(store, rng, name + ".wq", dim, dim),
      wk(store, rng, name + ".wk", dim, dim),
      wv(store, rng, name + ".wv", dim, dim),
      wo(store, rng, name + ".wo", dim, dim),
      heads(heads_) {
  if (dim % heads_ != 0) throw std::invalid_argument("MultiHeadAttention: heads must divide dim");
}

Var MultiHeadAttention::operator()(Tape& t, const Var& queries, const Var& keys_values,
                                   const Mat* add_mask) const {
  const Var q = wq(t, queries);
  const Var k = wk(t, keys_values);
  const Var v = wv(t, keys_values);
  const Index head_dim = q.cols() / heads;
  const Scalar inv_sqrt = 1.0 / std::sqrt(static_cast<Scalar>(head_dim));

  std::vector<Var> contexts;
  contexts.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const Var qh = ad::slice_cols(q, h * head_dim, head_dim);
    const Var kh = ad::slice_cols(k, h * head_dim, head_dim);
    const Var vh = ad::slice_cols(v, h * head_dim, head_dim);
    Var scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt);
    if (add_mask) scores = ad::add_const(scores, *add_mask);
    contexts.push_back(ad::matmul(ad::softmax_rows(scores), vh));
  }
  return wo(t, ad::concat_cols(contexts));
}

FeedForward::FeedForward(ParamStore& store, Rng& rng, const std::string& name, Index dim,
                         Index hidden)
    : fc1(store, rng, name + ".fc1", dim, hidden), fc2(store, rng, name + ".fc2", hidden, dim) {}

Var FeedForward::operator()(Tape& t, const Var& x) const {
  return fc2(t, ad::relu(fc1(t, x)));
}

EncoderLayer::EncoderLayer(ParamStore& store, Rng& rng, const std::string& name, Index dim,
                           int heads, Index ffn_hidden)
    : attn(store, rng, name + ".attn", dim, heads),
      ffn(store, rng, name + ".ffn", dim, ffn_hidden),
      norm1(store, name + ".norm1", dim),
      norm2(store, name + ".norm2", dim) {}

Var EncoderLayer::operator()(Tape& t, const Var& x, const Mat* add_mask) const {
  const Var a = norm1(t, x + attn(t, x, x, add_mask));
  return norm2(t, a + ffn(t, a));
}

DecoderLayer::DecoderLayer(ParamStore& store, Rng& rng, const std::string& name, Index dim,
                           int heads, Index ffn_hidden)
    : self_attn(store, rng, name + ".self", dim, heads),
      cross_attn(store, rng, name + ".cross", dim, heads),
      ffn(store, rng, name + ".ffn", dim, ffn_hidden),
      norm1(store, name + ".norm1", dim),
      norm2(store, name + ".norm2", dim),
      norm3(store, name + ".norm3", dim) {}

Var DecoderLayer::operator()(Tape& t, const Var& x, const Var& memory,
                             const Mat& self_mask) const {
  const Var a = norm1(t, x + self_attn(t, x, x, &self_mask));
  const Var b = norm2(t, a + cross_attn(t, a, memory, nullptr));
  return norm3(t, b + ffn(t, b));
}

TransformerEncoder::TransformerEncoder(ParamStore& store, Rng& rng, const std::string& name,
                                       int n_layers, Index dim, int heads, Index ffn_hidden) {
  layers.reserve(static_cast<std::size_t>(n_layers));
  for (int i = 0; i < n_layers; ++i)
    layers.emplace_back(store, rng, name + ".layer" + std::to_string(i), dim, heads, ffn_hidden);
}

Var TransformerEncoder::operator()(Tape& t, Var x, const Mat* add_mask) const {
  for (const auto& layer : layers) x = layer(t, x, add_mask);
  return x;
}

TransformerDecoder::TransformerDecoder(ParamStore& store, Rng& rng, const std::string& name,
                                       int n_layers, Index dim, int heads, Index ffn_hidden) {
  layers.reserve(static_cast<std::size_t>(n_layers));
  for (int i = 0; i < n_layers; ++i)
    layers.emplace_back(store, rng, name + ".layer" + std::to_string(i), dim, heads, ffn_hidden);
}

Var TransformerDecoder::operator()(Tape& t, Var x, const Var& memory,
                                   const Mat& self_mask) const {
  for (const auto& layer : layers) x = layer(t, x, memory, self_mask);
  return x;
}

}  // namespace memgen::nn
