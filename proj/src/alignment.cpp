// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/alignment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace memgen {

AlignMode align_mode_from_string(const std::string& name) {
  if (name == "siamese") return AlignMode::kSiamese;
  if (name == "dual") return AlignMode::kDual;
  if (name == "hga") return AlignMode::kHga;
  if (name == "off") return AlignMode::kOff;
  throw std::invalid_argument("unknown align mode '" + name + "'");
}

std::string to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::kSiamese: return "siamese";
    case AlignMode::kDual: return "dual";
    case AlignMode::kHga: return "hga";
    case AlignMode::kOff: return "off";
  }
  return "off";
}

SiameseEncoder::SiameseEncoder(ad::ParamStore& store, Rng& rng, const std::string& name,
                               int layers, Index dim, int heads, Index ffn_hidden,
                               bool positional_encoding)
    : positional_encoding_(positional_encoding) {
  cls_ = store.create(name + ".cls", rng.gaussian(1, dim, 0.02));
  encoder_ = nn::TransformerEncoder(store, rng, name, layers, dim, heads, ffn_hidden);
}

ad::Var SiameseEncoder::encode(ad::Tape& t, const ad::Var& prior_values) const {
  if (prior_values.rows() < 1) throw std::invalid_argument("SiameseEncoder: empty sequence");
  ad::Var x = ad::concat_rows({t.leaf(cls_), prior_values});
  if (positional_encoding_)
    x = ad::add_const(x, nn::sinusoidal_encoding(x.rows(), x.cols()));
  const ad::Var encoded = encoder_(t, x);
  return ad::slice_rows(encoded, 0, 1);
}

RowVec SiameseEncoder::encode_eval(const Mat& prior_values) const {
  ad::Tape t;
  return encode(t, t.constant(prior_values)).value().row(0);
}

namespace {

ad::Var cosine_matrix(ad::Tape&, const ad::Var& a, const ad::Var& b) {
  const ad::Var an = ad::normalize_rows(a, "degenerate embedding");
  const ad::Var bn = ad::normalize_rows(b, "degenerate embedding");
  return ad::matmul_nt(an, bn);
}

std::vector<int> iota_targets(Index n) {
  std::vector<int> t(static_cast<std::size_t>(n));
  std::iota(t.begin(), t.end(), 0);
  return t;
}

// Cross-entropy against the diagonal of a similarity matrix, both
// row-wise and column-wise, each averaged over its rows.
ad::Var symmetric_diag_nll(ad::Tape& t, const ad::Var& sims, Scalar tau) {
  const ad::Var scaled = ad::scale(sims, 1.0 / tau);
  const auto targets = iota_targets(scaled.rows());
  return ad::nll_rows(scaled, targets) + ad::nll_rows(ad::transpose(scaled), targets);
}

}  // namespace

ad::Var align_loss_on_tape(ad::Tape& t, const ad::Var& visual_batch, const ad::Var& textual_batch,
                           Scalar tau) {
  if (tau <= 0) throw std::invalid_argument("align_loss: tau must be positive");
  if (visual_batch.rows() != textual_batch.rows())
    throw std::invalid_argument("align_loss: batch sizes differ");
  if (visual_batch.rows() < 2)
    throw std::invalid_argument("align_loss: batch size must be at least 2");
  return symmetric_diag_nll(t, cosine_matrix(t, visual_batch, textual_batch), tau);
}

Scalar align_loss(const Mat& visual_batch, const Mat& textual_batch, Scalar tau) {
  ad::Tape t;
  return align_loss_on_tape(t, t.constant(visual_batch), t.constant(textual_batch), tau).scalar();
}

ad::Var hga_loss_on_tape(ad::Tape& t, const ad::Var& visual_prior, const ad::Var& textual_prior,
                         Scalar tau, Scalar lambda_txt, Scalar lambda_img) {
  if (tau <= 0) throw std::invalid_argument("hga_loss: tau must be positive");
  if (visual_prior.rows() < 1 || textual_prior.rows() < 1)
    throw std::invalid_argument("hga_loss: empty sequence");
  const Scalar inv_sqrt = 1.0 / std::sqrt(static_cast<Scalar>(visual_prior.cols()));

  // Cross-modal reconstructions: each textual position attends over the
  // visual prior and vice versa.
  const ad::Var txt_from_vis = ad::matmul(
      ad::softmax_rows(ad::scale(ad::matmul_nt(textual_prior, visual_prior), inv_sqrt)),
      visual_prior);
  const ad::Var vis_from_txt = ad::matmul(
      ad::softmax_rows(ad::scale(ad::matmul_nt(visual_prior, textual_prior), inv_sqrt)),
      textual_prior);

  const ad::Var loss_txt = symmetric_diag_nll(t, cosine_matrix(t, textual_prior, txt_from_vis), tau);
  const ad::Var loss_img = symmetric_diag_nll(t, cosine_matrix(t, visual_prior, vis_from_txt), tau);
  return ad::scale(loss_txt, lambda_txt) + ad::scale(loss_img, lambda_img);
}

Scalar hga_loss(const Mat& visual_prior, const Mat& textual_prior, Scalar tau, Scalar lambda_txt,
                Scalar lambda_img) {
  ad::Tape t;
  return hga_loss_on_tape(t, t.constant(visual_prior), t.constant(textual_prior), tau, lambda_txt,
                          lambda_img)
      .scalar();
}

void export_embeddings_csv(const std::string& path, const std::vector<SemanticEmbedding>& embs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("export_embeddings_csv: cannot write '" + path + "'");
  out << "sample_id,modality,values\n";
  for (const auto& e : embs) {
    out << e.sample_id << ',' << (e.modality == Modality::kVisual ? "visual" : "textual") << ',';
    for (Index d = 0; d < e.vector.size(); ++d) {
      if (d) out << ';';
      out << e.vector(d);
    }
    out << '\n';
  }
}

}  // namespace memgen
