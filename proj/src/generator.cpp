// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memgen {

VisualSpec VisualSpec::from_samples(const std::vector<PairedSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("VisualSpec: empty dataset");
  VisualSpec spec;
  const auto& s = samples.front();
  if (s.has_grid()) {
    spec.precomputed = false;
    spec.grid_h = s.grid->rows();
    spec.grid_w = s.grid->cols();
  } else {
    spec.precomputed = true;
    spec.feature_rows = s.features->rows();
  }
  return spec;
}

Scalar gen_loss(const Mat& logits, const std::vector<int>& targets) {
  if (static_cast<Index>(targets.size()) != logits.rows())
    throw std::invalid_argument("gen_loss: target count mismatch");
  Scalar total = 0.0;
  long counted = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const int tgt = targets[static_cast<std::size_t>(i)];
    if (tgt == kPad) continue;
    if (tgt < 0 || tgt >= logits.cols()) throw std::invalid_argument("gen_loss: target out of range");
    const Scalar m = logits.row(i).maxCoeff();
    const Scalar lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, tgt);
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("gen_loss: no non-pad targets");
  return total / static_cast<Scalar>(counted);
}

Scalar joint_loss(Scalar generation, Scalar alignment) { return generation + alignment; }

Mat fuse_semantic(const Mat& encoded, const RowVec& semantic) {
  if (semantic.size() != encoded.cols())
    throw std::invalid_argument("fuse_semantic: dimension mismatch");
  Mat out = encoded;
  out.rowwise() += semantic;
  return out;
}

ReportModel::ReportModel(const ModelConfig& cfg, int vocab_size, const VisualSpec& visual)
    : cfg_(cfg), vocab_size_(vocab_size), visual_(visual) {
  cfg_.validate();
  mode_ = align_mode_from_string(cfg_.align_mode);
  if (vocab_size_ <= kUnk) throw std::invalid_argument("ReportModel: vocabulary too small");

  if (visual_.precomputed) {
    n_visual_ = visual_.feature_rows;
    if (n_visual_ < 1) throw std::invalid_argument("ReportModel: feature_rows must be positive");
  } else {
    if (visual_.grid_h % cfg_.patch != 0 || visual_.grid_w % cfg_.patch != 0)
      throw std::invalid_argument("ReportModel: grid not divisible by patch size");
    n_visual_ = (visual_.grid_h / cfg_.patch) * (visual_.grid_w / cfg_.patch);
  }

  Rng rng(cfg_.seed);
  const Index dim = cfg_.embed_dim;
  if (!visual_.precomputed)
    extractor_ = nn::Linear(params_, rng, "extractor.patch", cfg_.patch * cfg_.patch, dim);
  word_emb_ = params_.create("embed.words", rng.gaussian(vocab_size_, dim, 1.0 / std::sqrt(dim)),
                             !cfg_.freeze_word_embeddings);
  visual_pos_ = params_.create("encoder.visual_pos", rng.gaussian(n_visual_, dim, 0.02));
  memory_ = params_.create("memory.bank", rng.gaussian(cfg_.memory_slots, cfg_.memory_dim, 1.0));
  retrieval_ = MemoryProjections(params_, rng, "retrieval", cfg_.memory_dim, dim, cfg_.topk);
  encoder_ = nn::TransformerEncoder(params_, rng, "encoder", cfg_.enc_layers, dim, cfg_.heads,
                                    cfg_.ffn_dim);
  if (cfg_.sam && mode_ == AlignMode::kSiamese) {
    siamese_ = SiameseEncoder(params_, rng, "siamese", cfg_.siamese_layers, dim, cfg_.heads,
                              cfg_.ffn_dim, cfg_.siamese_positional_encoding);
  } else if (cfg_.sam && mode_ == AlignMode::kDual) {
    align_visual_ = SiameseEncoder(params_, rng, "align.visual", cfg_.siamese_layers, dim,
                                   cfg_.heads, cfg_.ffn_dim, cfg_.siamese_positional_encoding);
    align_textual_ = SiameseEncoder(params_, rng, "align.textual", cfg_.siamese_layers, dim,
                                    cfg_.heads, cfg_.ffn_dim, cfg_.siamese_positional_encoding);
  }
  decoder_ = nn::TransformerDecoder(params_, rng, "decoder", cfg_.dec_layers, dim, cfg_.heads,
                                    cfg_.ffn_dim);
  if (cfg_.prompts && cfg_.prompt_slots > 0)
    prompts_ = params_.create("decoder.prompts", rng.gaussian(cfg_.prompt_slots, dim, 0.02));
  out_proj_ = nn::Linear(params_, rng, "decoder.out", dim, vocab_size_);
  token_pe_ = nn::sinusoidal_encoding(cfg_.max_len + 2, dim);
}

void ReportModel::set_memory_bank(const MemoryBank& bank) {
  if (bank.rows.rows() != cfg_.memory_slots || bank.rows.cols() != cfg_.memory_dim)
    throw std::invalid_argument("set_memory_bank: bank shape does not match config");
  if (!bank.rows.allFinite()) throw std::invalid_argument("set_memory_bank: non-finite bank");
  memory_->value = bank.rows;
}

VisualFeatures ReportModel::extract_features(const PairedSample& sample) const {
  VisualFeatures out;
  if (visual_.precomputed) {
    if (!sample.features.has_value())
      throw std::invalid_argument("extract_features: sample lacks precomputed features");
    if (sample.features->cols() != cfg_.embed_dim)
      throw std::invalid_argument("extract_features: precomputed feature dim != embed_dim");
    out.values = *sample.features;
    out.source = "precomputed";
    return out;
  }
  ad::Tape t;
  out.values = visual_features_on_tape(t, sample).value();
  out.source = "extractor";
  return out;
}

ad::Var ReportModel::visual_features_on_tape(ad::Tape& t, const PairedSample& sample) const {
  if (visual_.precomputed) {
    if (!sample.features.has_value())
      throw std::invalid_argument("forward: sample lacks precomputed features");
    if (sample.features->rows() != n_visual_ || sample.features->cols() != cfg_.embed_dim)
      throw std::invalid_argument("forward: precomputed feature shape mismatch");
    return t.constant(*sample.features);
  }
  if (!sample.grid.has_value()) throw std::invalid_argument("forward: sample lacks image grid");
  const Mat& grid = *sample.grid;
  if (grid.rows() != visual_.grid_h || grid.cols() != visual_.grid_w)
    throw std::invalid_argument("forward: grid shape mismatch");
  const Index p = cfg_.patch;
  Mat patches(n_visual_, p * p);
  Index row = 0;
  for (Index by = 0; by + p <= grid.rows(); by += p)
    for (Index bx = 0; bx + p <= grid.cols(); bx += p) {
      Index col = 0;
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) patches(row, col++) = grid(by + i, bx + j);
      ++row;
    }
  return extractor_(t, t.constant(patches));
}

ad::Var ReportModel::siamese_visual(ad::Tape& t, const ad::Var& prior_values) const {
  return mode_ == AlignMode::kDual ? align_visual_.encode(t, prior_values)
                                   : siamese_.encode(t, prior_values);
}

ad::Var ReportModel::siamese_textual(ad::Tape& t, const ad::Var& prior_values) const {
  return mode_ == AlignMode::kDual ? align_textual_.encode(t, prior_values)
                                   : siamese_.encode(t, prior_values);
}

ReportModel::SampleForward ReportModel::forward_sample(ad::Tape& t, const PairedSample& sample,
                                                       const Report& report) const {
  const Index seq = static_cast<Index>(report.tokens.size());
  if (seq < 3) throw std::invalid_argument("forward: report has no content tokens");
  if (seq - 1 > cfg_.max_len + 1) throw std::invalid_argument("forward: report exceeds max_len");

  const ad::Var bank = t.leaf(memory_);

  // Visual path: features -> retrieval -> consolidation.
  const ad::Var features = visual_features_on_tape(t, sample);
  const ad::Var prior_v = retrieve_on_tape(t, features, bank, retrieval_);
  const ad::Var consolidated_v = features + prior_v;

  // Textual path over the decoder inputs (<bos> w_1 .. w_l).
  std::vector<int> input_tokens(report.tokens.begin(), report.tokens.end() - 1);
  std::vector<int> targets(report.tokens.begin() + 1, report.tokens.end());
  const ad::Var embedded = ad::embedding_rows(t.leaf(word_emb_), input_tokens);
  const ad::Var prior_r = retrieve_on_tape(t, embedded, bank, retrieval_);
  const ad::Var consolidated_r = embedded + prior_r;

  SampleForward out;
  out.target_count = static_cast<int>(targets.size());

  if (cfg_.sam && mode_ != AlignMode::kOff) {
    // Content rows of the textual prior (<bos> row excluded).
    const ad::Var prior_r_content = ad::slice_rows(prior_r, 1, prior_r.rows() - 1);
    if (mode_ == AlignMode::kHga) {
      out.hga = hga_loss_on_tape(t, prior_v, prior_r_content, cfg_.tau, cfg_.hga_lambda_txt,
                                 cfg_.hga_lambda_img);
    } else {
      out.visual_summary = siamese_visual(t, prior_v);
      out.textual_summary = siamese_textual(t, prior_r_content);
    }
  }

  // Visual encoder with learned patch positions, then semantic fusion.
  ad::Var encoded = encoder_(t, consolidated_v + t.leaf(visual_pos_));
  if (cfg_.sam && cfg_.fuse_add && mode_ != AlignMode::kHga && mode_ != AlignMode::kOff)
    encoded = ad::broadcast_add_row(encoded, out.visual_summary);

  ad::Var memory_rows = encoded;
  if (prompts_) memory_rows = ad::concat_rows({encoded, t.leaf(prompts_)});

  const ad::Var dec_in = ad::add_const(consolidated_r, token_pe_.topRows(seq - 1));
  const ad::Var hidden = decoder_(t, dec_in, memory_rows, nn::causal_mask(seq - 1));
  const ad::Var logits = out_proj_(t, hidden);
  out.gen_nll = ad::nll_rows(logits, targets);
  return out;
}

ReportModel::BatchLoss ReportModel::forward_batch(ad::Tape& t,
                                                  const std::vector<const PairedSample*>& samples,
                                                  const std::vector<const Report*>& reports) const {
  if (samples.empty() || samples.size() != reports.size())
    throw std::invalid_argument("forward_batch: bad batch");
  std::vector<ad::Var> nlls;
  std::vector<ad::Var> visual_summaries, textual_summaries;
  std::vector<ad::Var> hga_terms;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleForward f = forward_sample(t, *samples[i], *reports[i]);
    nlls.push_back(f.gen_nll);
    if (f.visual_summary.valid()) {
      visual_summaries.push_back(f.visual_summary);
      textual_summaries.push_back(f.textual_summary);
    }
    if (f.hga.valid()) hga_terms.push_back(f.hga);
  }

  BatchLoss loss;
  loss.generation = ad::mean_all(ad::concat_cols(nlls));
  if (!visual_summaries.empty() && visual_summaries.size() >= 2) {
    loss.alignment = align_loss_on_tape(t, ad::concat_rows(visual_summaries),
                                        ad::concat_rows(textual_summaries), cfg_.tau);
  } else if (!hga_terms.empty()) {
    loss.alignment = ad::mean_all(ad::concat_cols(hga_terms));
  } else {
    loss.alignment = t.constant(Mat::Zero(1, 1));
  }
  loss.total = loss.generation + loss.alignment;
  loss.generation_value = loss.generation.scalar();
  loss.alignment_value = loss.alignment.scalar();
  return loss;
}

Mat ReportModel::forward_logits(const PairedSample& sample, const Report& report) const {
  ad::Tape t;
  const Index seq = static_cast<Index>(report.tokens.size());
  if (seq < 2) throw std::invalid_argument("forward_logits: report too short");

  const Mat bold = encode_visual_eval(sample);
  std::vector<int> input_tokens(report.tokens.begin(), report.tokens.end() - 1);
  const ad::Var bank = t.leaf(memory_);
  const ad::Var embedded = ad::embedding_rows(t.leaf(word_emb_), input_tokens);
  const ad::Var prior_r = retrieve_on_tape(t, embedded, bank, retrieval_);
  const ad::Var consolidated_r = embedded + prior_r;

  ad::Var memory_rows = t.constant(bold);
  if (prompts_) memory_rows = ad::concat_rows({memory_rows, t.leaf(prompts_)});
  const ad::Var dec_in = ad::add_const(consolidated_r, token_pe_.topRows(seq - 1));
  const ad::Var hidden = decoder_(t, dec_in, memory_rows, nn::causal_mask(seq - 1));
  return out_proj_(t, hidden).value();
}

Mat ReportModel::encode_visual_eval(const PairedSample& sample) const {
  ad::Tape t;
  const ad::Var bank = t.leaf(memory_);
  const ad::Var features = visual_features_on_tape(t, sample);
  const ad::Var prior_v = retrieve_on_tape(t, features, bank, retrieval_);
  const ad::Var consolidated_v = features + prior_v;
  ad::Var encoded = encoder_(t, consolidated_v + t.leaf(visual_pos_));
  if (cfg_.sam && cfg_.fuse_add && mode_ != AlignMode::kHga && mode_ != AlignMode::kOff) {
    const ad::Var summary = siamese_visual(t, prior_v);
    encoded = ad::broadcast_add_row(encoded, summary);
  }
  return encoded.value();
}

RowVec ReportModel::consolidated_token_row(int token) const {
  ad::Tape t;
  const ad::Var bank = t.leaf(memory_);
  const ad::Var embedded = ad::embedding_rows(t.leaf(word_emb_), {token});
  const ad::Var prior = retrieve_on_tape(t, embedded, bank, retrieval_);
  return (embedded + prior).value().row(0);
}

Vec ReportModel::decode_step(const Mat& bold_visual, const Mat& prefix_consolidated) const {
  Mat memory_rows = bold_visual;
  if (prompts_) {
    memory_rows.conservativeResize(bold_visual.rows() + prompts_->value.rows(), Eigen::NoChange);
    memory_rows.bottomRows(prompts_->value.rows()) = prompts_->value;
  }
  return decode_step_with_memory(memory_rows, prefix_consolidated);
}

Vec ReportModel::decode_step_with_memory(const Mat& memory_rows,
                                         const Mat& prefix_consolidated) const {
  const Index len = prefix_consolidated.rows();
  if (len < 1) throw std::invalid_argument("decode_step: empty prefix");
  if (len > cfg_.max_len + 1) throw std::invalid_argument("decode_step: prefix exceeds max_len");
  ad::Tape t;
  const ad::Var dec_in =
      ad::add_const(t.constant(prefix_consolidated), token_pe_.topRows(len));
  const ad::Var hidden = decoder_(t, dec_in, t.constant(memory_rows), nn::causal_mask(len));
  const ad::Var logits = out_proj_(t, hidden);
  return logits.value().row(logits.rows() - 1).transpose();
}

namespace {

RowVec log_softmax_vec(const Vec& logits) {
  const Scalar m = logits.maxCoeff();
  const Scalar lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).transpose();
}

// argmax over allowed continuations (<pad> and <bos> are never generated);
// ties resolve to the lowest token id.
int best_token(const RowVec& log_probs) {
  int best = kEos;
  Scalar best_lp = -std::numeric_limits<Scalar>::infinity();
  for (Index v = 0; v < log_probs.size(); ++v) {
    if (v == kPad || v == kBos) continue;
    if (log_probs(v) > best_lp) {
      best_lp = log_probs(v);
      best = static_cast<int>(v);
    }
  }
  return best;
}

}  // namespace

DecodeResult ReportModel::greedy_decode(const PairedSample& sample) const {
  const Mat bold = encode_visual_eval(sample);
  DecodeResult result;
  result.tokens = {kBos};
  Mat prefix = consolidated_token_row(kBos);
  for (Index step = 0; step < cfg_.max_len; ++step) {
    const RowVec log_probs = log_softmax_vec(decode_step(bold, prefix));
    const int tok = best_token(log_probs);
    result.tokens.push_back(tok);
    result.logprob += log_probs(tok);
    if (tok == kEos) {
      result.finished = true;
      break;
    }
    prefix.conservativeResize(prefix.rows() + 1, Eigen::NoChange);
    prefix.row(prefix.rows() - 1) = consolidated_token_row(tok);
  }
  return result;
}

DecodeResult ReportModel::beam_search(const PairedSample& sample) const {
  return beam_search(sample, cfg_.beam, cfg_.max_len);
}

DecodeResult ReportModel::beam_search(const PairedSample& sample, int beam, Index max_len) const {
  if (beam < 1) throw std::invalid_argument("beam_search: beam must be >= 1");
  max_len = std::min(max_len, cfg_.max_len);
  const DecodeResult greedy = greedy_decode(sample);
  if (beam == 1) return greedy;

  const Mat bold = encode_visual_eval(sample);
  struct Hyp {
    std::vector<int> tokens;
    Mat prefix;
    Scalar logprob = 0.0;
  };
  std::vector<Hyp> live(1);
  live[0].tokens = {kBos};
  live[0].prefix = consolidated_token_row(kBos);

  DecodeResult best_finished;
  bool have_finished = false;

  for (Index step = 0; step < max_len && !live.empty(); ++step) {
    struct Cand {
      std::size_t hyp;
      int token;
      Scalar logprob;
    };
    std::vector<Cand> cands;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const RowVec log_probs = log_softmax_vec(decode_step(bold, live[h].prefix));
      for (Index v = 0; v < log_probs.size(); ++v) {
        if (v == kPad || v == kBos) continue;
        cands.push_back({h, static_cast<int>(v), live[h].logprob + log_probs(v)});
      }
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(beam), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(),
                      [](const Cand& a, const Cand& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.hyp != b.hyp) return a.hyp < b.hyp;
                        return a.token < b.token;
                      });

    std::vector<Hyp> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Cand& cand = cands[c];
      if (cand.token == kEos) {
        if (!have_finished || cand.logprob > best_finished.logprob) {
          best_finished.tokens = live[cand.hyp].tokens;
          best_finished.tokens.push_back(kEos);
          best_finished.logprob = cand.logprob;
          best_finished.finished = true;
          have_finished = true;
        }
        continue;
      }
      Hyp h;
      h.tokens = live[cand.hyp].tokens;
      h.tokens.push_back(cand.token);
      h.logprob = cand.logprob;
      h.prefix = live[cand.hyp].prefix;
      h.prefix.conservativeResize(h.prefix.rows() + 1, Eigen::NoChange);
      h.prefix.row(h.prefix.rows() - 1) = consolidated_token_row(cand.token);
      next.push_back(std::move(h));
    }
    // Once every surviving candidate scores below the best finished
    // hypothesis, no extension can overtake it.
    if (have_finished) {
      next.erase(std::remove_if(next.begin(), next.end(),
                                [&](const Hyp& h) { return h.logprob <= best_finished.logprob; }),
                 next.end());
    }
    live = std::move(next);
  }

  DecodeResult result;
  if (have_finished) {
    result = best_finished;
  } else if (!live.empty()) {
    const auto it = std::max_element(live.begin(), live.end(),
                                     [](const Hyp& a, const Hyp& b) { return a.logprob < b.logprob; });
    result.tokens = it->tokens;
    result.logprob = it->logprob;
    result.finished = false;
  }
  if (result.tokens.empty() || greedy.logprob > result.logprob) return greedy;
  return result;
}

RetrievalRecord ReportModel::inspect_retrieval(const PairedSample& sample,
                                               const Report& report) const {
  RetrievalRecord rec;
  const Mat features = extract_features(sample).values;
  rec.visual = topk_retrieve(features, memory_->value, retrieval_, Modality::kVisual);

  rec.textual_tokens.assign(report.tokens.begin(), report.tokens.end() - 1);
  Mat embedded(static_cast<Index>(rec.textual_tokens.size()), cfg_.embed_dim);
  for (std::size_t i = 0; i < rec.textual_tokens.size(); ++i)
    embedded.row(static_cast<Index>(i)) = word_emb_->value.row(rec.textual_tokens[i]);
  rec.textual = topk_retrieve(embedded, memory_->value, retrieval_, Modality::kTextual);
  return rec;
}

SemanticEmbedding ReportModel::semantic_embedding(const PairedSample& sample, const Report& report,
                                                  Modality modality) const {
  if (!cfg_.sam || mode_ == AlignMode::kHga || mode_ == AlignMode::kOff)
    throw std::invalid_argument("semantic_embedding: alignment encoder not active");
  ad::Tape t;
  const ad::Var bank = t.leaf(memory_);
  SemanticEmbedding emb;
  emb.sample_id = sample.sample_id;
  emb.modality = modality;
  if (modality == Modality::kVisual) {
    const ad::Var features = visual_features_on_tape(t, sample);
    const ad::Var prior = retrieve_on_tape(t, features, bank, retrieval_);
    emb.vector = siamese_visual(t, prior).value().row(0);
  } else {
    std::vector<int> content(report.tokens.begin() + 1, report.tokens.end() - 1);
    if (content.empty()) throw std::invalid_argument("semantic_embedding: empty report");
    const ad::Var embedded = ad::embedding_rows(t.leaf(word_emb_), content);
    const ad::Var prior = retrieve_on_tape(t, embedded, bank, retrieval_);
    emb.vector = siamese_textual(t, prior).value().row(0);
  }
  return emb;
}

}  // namespace memgen
