// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "memgen/types.hpp"

namespace memgen {

using TokenSeq = std::vector<std::string>;

struct EvalReport {
  Scalar bleu[4] = {0, 0, 0, 0};
  Scalar rouge_l = 0.0;
  Scalar meteor = 0.0;
  std::map<long, long> length_hist;  // bucket start -> count
  long bucket = 5;
  long n_samples = 0;

  nlohmann::json to_json() const;
};

// Corpus-level BLEU-n: uniform weights over 1..n-gram modified precisions
// with clipping and brevity penalty; any zero precision gives 0 (no
// smoothing).
Scalar bleu_n(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references,
              int n);

// Mean sentence-level LCS F-measure with beta = 1.2.
Scalar rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

// METEOR-style harmonic mean with fragmentation penalty over exact and
// suffix-stem matches only (no synonym resource); not comparable to scores
// from the full METEOR toolkit.
Scalar meteor_lite(const std::vector<TokenSeq>& candidates,
                   const std::vector<TokenSeq>& references);

std::map<long, long> length_hist(const std::vector<TokenSeq>& candidates, long bucket);

EvalReport evaluate_corpus(const std::vector<TokenSeq>& candidates,
                           const std::vector<TokenSeq>& references, long bucket = 5);

// Suffix-stripping stem used by meteor_lite (longest of ing/ed/ly/es/s with
// a minimum stem length of 3).
std::string suffix_stem(const std::string& word);

TokenSeq split_tokens(const std::string& text);  // whitespace split

}  // namespace memgen
