// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "memgen/types.hpp"

namespace memgen {

// Token ids 0..3 are reserved for the specials, in this order.
enum SpecialToken : int { kPad = 0, kBos = 1, kEos = 2, kUnk = 3 };

struct Vocabulary {
  std::unordered_map<std::string, int> word_to_id;
  std::vector<std::string> id_to_word;
  int min_freq = 1;

  int size() const { return static_cast<int>(id_to_word.size()); }
  int id_of(const std::string& word) const;  // <unk> for OOV
  const std::string& word_of(int id) const;
  bool is_special(int id) const { return id >= kPad && id <= kUnk; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
};

// Token-id sequence framed by <bos>/<eos>; content_length counts the tokens
// strictly between the frame (specials excluded).
struct Report {
  std::vector<int> tokens;

  int content_length() const { return static_cast<int>(tokens.size()) - 2; }
};

struct BowVector {
  Vec counts;      // length = vocab size; zero on specials and <unk>
  Vec normalized;  // counts / counts.sum(), sums to 1
};

struct PairedSample {
  std::string sample_id;
  std::string report_text;                // raw report string
  std::optional<Mat> grid;                // raw image grid H x W
  std::optional<Mat> features;            // precomputed N_I x D features
  std::vector<std::string> findings;      // planted finding labels (synthetic only)

  bool has_grid() const { return grid.has_value(); }
};

Vocabulary build_vocab(const std::vector<std::string>& reports, int min_freq);
std::vector<std::string> normalize_tokens(const std::string& text);  // lowercase, strip punctuation
Report tokenize(const std::string& text, const Vocabulary& vocab);
BowVector bow(const Report& report, const Vocabulary& vocab);

// ---- synthetic paired-data generator ----

struct FindingTemplate {
  std::string name;
  std::vector<std::string> sentences;       // paraphrase templates
  std::vector<std::string> unique_words;    // words occurring only in this finding's templates
};

// The finding vocabulary the generator plants (first n_findings entries are
// used). Exposed so tests and diagnostics can recover per-finding word sets
// without duplicating strings.
std::vector<FindingTemplate> synth_finding_templates(int n_findings);
const std::string& synth_filler_sentence();

// Pixel block (4x4) a finding's pattern occupies on the grid.
struct FindingLocation {
  Index row0, col0;
};
FindingLocation synth_finding_location(int finding, Index grid_h, Index grid_w);

std::vector<PairedSample> synth_generate(int n_samples, int n_findings,
                                         std::pair<Index, Index> grid, std::uint64_t seed);

// ---- dataset I/O (JSONL, one sample per line) ----

std::vector<PairedSample> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<PairedSample>& samples);

}  // namespace memgen
