// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace memgen {

namespace {

void check_corpus(const std::vector<TokenSeq>& candidates,
                  const std::vector<TokenSeq>& references) {
  if (candidates.empty()) throw std::invalid_argument("metrics: empty corpus");
  if (candidates.size() != references.size())
    throw std::invalid_argument("metrics: candidate/reference count mismatch");
}

std::unordered_map<std::string, long> ngram_counts(const TokenSeq& tokens, int n) {
  std::unordered_map<std::string, long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key.push_back('\x1f');
      key += tokens[i + static_cast<std::size_t>(j)];
    }
    ++counts[key];
  }
  return counts;
}

long lcs_length(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<long> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

Scalar bleu_n(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references,
              int n) {
  check_corpus(candidates, references);
  if (n < 1 || n > 4) throw std::invalid_argument("bleu_n: n must be in 1..4");

  long cand_total_len = 0, ref_total_len = 0;
  Scalar log_precision_sum = 0.0;
  for (int order = 1; order <= n; ++order) {
    long matched = 0, total = 0;
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      const auto cand = ngram_counts(candidates[s], order);
      const auto ref = ngram_counts(references[s], order);
      for (const auto& [gram, count] : cand) {
        total += count;
        const auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(count, it->second);
      }
    }
    if (matched == 0 || total == 0) return 0.0;
    log_precision_sum += std::log(static_cast<Scalar>(matched) / static_cast<Scalar>(total));
  }
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    cand_total_len += static_cast<long>(candidates[s].size());
    ref_total_len += static_cast<long>(references[s].size());
  }
  if (cand_total_len == 0) return 0.0;
  const Scalar brevity =
      cand_total_len >= ref_total_len
          ? 1.0
          : std::exp(1.0 - static_cast<Scalar>(ref_total_len) / static_cast<Scalar>(cand_total_len));
  return brevity * std::exp(log_precision_sum / static_cast<Scalar>(n));
}

Scalar rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
  check_corpus(candidates, references);
  constexpr Scalar beta = 1.2;
  Scalar total = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& ref = references[s];
    if (cand.empty() || ref.empty()) continue;
    const Scalar lcs = static_cast<Scalar>(lcs_length(cand, ref));
    if (lcs == 0.0) continue;
    const Scalar precision = lcs / static_cast<Scalar>(cand.size());
    const Scalar recall = lcs / static_cast<Scalar>(ref.size());
    total += (1.0 + beta * beta) * recall * precision / (recall + beta * beta * precision);
  }
  return total / static_cast<Scalar>(candidates.size());
}

std::string suffix_stem(const std::string& word) {
  static const char* kSuffixes[] = {"ing", "ed", "ly", "es", "s"};
  for (const char* suffix : kSuffixes) {
    const std::size_t len = std::string(suffix).size();
    if (word.size() >= len + 3 && word.compare(word.size() - len, len, suffix) == 0)
      return word.substr(0, word.size() - len);
  }
  return word;
}

namespace {

// Greedy left-to-right unigram alignment: exact surface matches first, then
// stem matches over the remainder. Returns reference position per candidate
// position (-1 when unmatched).
std::vector<long> meteor_alignment(const TokenSeq& cand, const TokenSeq& ref) {
  std::vector<long> match(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && cand[i] == ref[j]) {
        match[i] = static_cast<long>(j);
        ref_used[j] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (match[i] != -1) continue;
    const std::string stem = suffix_stem(cand[i]);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && stem == suffix_stem(ref[j])) {
        match[i] = static_cast<long>(j);
        ref_used[j] = true;
        break;
      }
    }
  }
  return match;
}

long chunk_count(const std::vector<long>& match) {
  long chunks = 0;
  long prev_ref = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] == -1) {
      in_chunk = false;
      prev_ref = -2;
      continue;
    }
    if (!in_chunk || match[i] != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = match[i];
  }
  return chunks;
}

}  // namespace

Scalar meteor_lite(const std::vector<TokenSeq>& candidates,
                   const std::vector<TokenSeq>& references) {
  check_corpus(candidates, references);
  constexpr Scalar alpha = 0.9;   // recall weight in the harmonic mean
  constexpr Scalar gamma = 0.5;   // penalty scale
  constexpr Scalar beta = 3.0;    // penalty exponent
  Scalar total = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& ref = references[s];
    if (cand.empty() || ref.empty()) continue;
    const auto match = meteor_alignment(cand, ref);
    const long m = static_cast<long>(std::count_if(match.begin(), match.end(),
                                                   [](long v) { return v != -1; }));
    if (m == 0) continue;
    const Scalar precision = static_cast<Scalar>(m) / static_cast<Scalar>(cand.size());
    const Scalar recall = static_cast<Scalar>(m) / static_cast<Scalar>(ref.size());
    const Scalar fmean = precision * recall / (alpha * precision + (1.0 - alpha) * recall);
    const Scalar frag = static_cast<Scalar>(chunk_count(match)) / static_cast<Scalar>(m);
    total += fmean * (1.0 - gamma * std::pow(frag, beta));
  }
  return total / static_cast<Scalar>(candidates.size());
}

std::map<long, long> length_hist(const std::vector<TokenSeq>& candidates, long bucket) {
  if (bucket < 1) throw std::invalid_argument("length_hist: bucket must be >= 1");
  std::map<long, long> hist;
  for (const auto& c : candidates) {
    const long start = (static_cast<long>(c.size()) / bucket) * bucket;
    ++hist[start];
  }
  return hist;
}

EvalReport evaluate_corpus(const std::vector<TokenSeq>& candidates,
                           const std::vector<TokenSeq>& references, long bucket) {
  EvalReport report;
  for (int n = 1; n <= 4; ++n) report.bleu[n - 1] = bleu_n(candidates, references, n);
  report.rouge_l = rouge_l(candidates, references);
  report.meteor = meteor_lite(candidates, references);
  report.length_hist = length_hist(candidates, bucket);
  report.bucket = bucket;
  report.n_samples = static_cast<long>(candidates.size());
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [start, count] : length_hist) {
    std::ostringstream key;
    key << '[' << start << ',' << (start + bucket) << ')';
    hist[key.str()] = count;
  }
  return nlohmann::json{{"bleu", {bleu[0], bleu[1], bleu[2], bleu[3]}},
                        {"rouge_l", rouge_l},
                        {"meteor", meteor},
                        {"length_hist", hist},
                        {"bucket", bucket},
                        {"n_samples", n_samples}};
}

TokenSeq split_tokens(const std::string& text) {
  TokenSeq tokens;
  std::istringstream iss(text);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace memgen
