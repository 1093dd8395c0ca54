// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>

#include "memgen/metrics.hpp"
#include "memgen/rng.hpp"

using namespace memgen;

namespace {

// ---- naive loop oracles, structured independently of src/metrics.cpp ----

std::map<std::vector<std::string>, int> oracle_ngrams(const TokenSeq& toks, int n) {
  std::map<std::vector<std::string>, int> out;
  for (int i = 0; i + n <= static_cast<int>(toks.size()); ++i) {
    std::vector<std::string> gram;
    for (int j = 0; j < n; ++j) gram.push_back(toks[static_cast<std::size_t>(i + j)]);
    out[gram] += 1;
  }
  return out;
}

Scalar oracle_bleu(const std::vector<TokenSeq>& cands, const std::vector<TokenSeq>& refs, int n) {
  Scalar geo = 0.0;
  for (int order = 1; order <= n; ++order) {
    long clipped = 0, total = 0;
    for (std::size_t s = 0; s < cands.size(); ++s) {
      auto cg = oracle_ngrams(cands[s], order);
      auto rg = oracle_ngrams(refs[s], order);
      for (auto& [gram, count] : cg) {
        total += count;
        int ref_count = rg.count(gram) ? rg[gram] : 0;
        clipped += std::min(count, ref_count);
      }
    }
    if (total == 0 || clipped == 0) return 0.0;
    geo += std::log(static_cast<Scalar>(clipped) / static_cast<Scalar>(total)) / n;
  }
  long clen = 0, rlen = 0;
  for (std::size_t s = 0; s < cands.size(); ++s) {
    clen += static_cast<long>(cands[s].size());
    rlen += static_cast<long>(refs[s].size());
  }
  Scalar bp = 1.0;
  if (clen < rlen && clen > 0) bp = std::exp(1.0 - static_cast<Scalar>(rlen) / clen);
  return bp * std::exp(geo);
}

int oracle_lcs(const TokenSeq& a, const TokenSeq& b, std::size_t i, std::size_t j,
               std::map<std::pair<std::size_t, std::size_t>, int>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  const auto key = std::make_pair(i, j);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  int best;
  if (a[i] == b[j])
    best = 1 + oracle_lcs(a, b, i + 1, j + 1, memo);
  else
    best = std::max(oracle_lcs(a, b, i + 1, j, memo), oracle_lcs(a, b, i, j + 1, memo));
  memo[key] = best;
  return best;
}

Scalar oracle_rouge(const std::vector<TokenSeq>& cands, const std::vector<TokenSeq>& refs) {
  const Scalar beta2 = 1.2 * 1.2;
  Scalar total = 0.0;
  for (std::size_t s = 0; s < cands.size(); ++s) {
    if (cands[s].empty() || refs[s].empty()) continue;
    std::map<std::pair<std::size_t, std::size_t>, int> memo;
    const int lcs = oracle_lcs(cands[s], refs[s], 0, 0, memo);
    if (lcs == 0) continue;
    const Scalar p = static_cast<Scalar>(lcs) / cands[s].size();
    const Scalar r = static_cast<Scalar>(lcs) / refs[s].size();
    total += (1.0 + beta2) * r * p / (r + beta2 * p);
  }
  return total / cands.size();
}

Scalar oracle_meteor(const std::vector<TokenSeq>& cands, const std::vector<TokenSeq>& refs) {
  Scalar total = 0.0;
  for (std::size_t s = 0; s < cands.size(); ++s) {
    const auto& cand = cands[s];
    const auto& ref = refs[s];
    if (cand.empty() || ref.empty()) continue;
    std::vector<int> match(cand.size(), -1);
    std::vector<bool> used(ref.size(), false);
    // exact pass
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (match[i] == -1 && !used[j] && cand[i] == ref[j]) {
          match[i] = static_cast<int>(j);
          used[j] = true;
          break;
        }
    // stem pass
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (match[i] != -1) continue;
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (!used[j] && suffix_stem(cand[i]) == suffix_stem(ref[j])) {
          match[i] = static_cast<int>(j);
          used[j] = true;
          break;
        }
    }
    int m = 0;
    for (int v : match)
      if (v != -1) ++m;
    if (m == 0) continue;
    // chunks: maximal runs contiguous in both strings
    int chunks = 0;
    int prev = -5;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (match[i] == -1) {
        prev = -5;
        continue;
      }
      if (match[i] != prev + 1) ++chunks;
      prev = match[i];
    }
    const Scalar p = static_cast<Scalar>(m) / cand.size();
    const Scalar r = static_cast<Scalar>(m) / ref.size();
    const Scalar f = p * r / (0.9 * p + 0.1 * r);
    const Scalar pen = 0.5 * std::pow(static_cast<Scalar>(chunks) / m, 3.0);
    total += f * (1.0 - pen);
  }
  return total / cands.size();
}

std::vector<TokenSeq> random_corpus(Rng& rng, std::size_t sentences,
                                    const std::vector<std::string>& vocab) {
  std::vector<TokenSeq> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    TokenSeq sent;
    const std::size_t len = 1 + rng.uniform_int(8);
    for (std::size_t i = 0; i < len; ++i) sent.push_back(vocab[rng.uniform_int(vocab.size())]);
    out.push_back(std::move(sent));
  }
  return out;
}

const std::vector<std::string> kVocab = {"the",  "cat",   "is",   "on",   "mat",
                                         "dog",  "runs",  "fast", "slow", "walking",
                                         "walks", "walked"};

}  // namespace

TEST_CASE("bleu: identity, disjoint, clipping example") {
  const std::vector<TokenSeq> cands = {{"a", "b", "c", "d", "e"}};
  CHECK(bleu_n(cands, cands, 4) == doctest::Approx(1.0));
  const std::vector<TokenSeq> refs = {{"x", "y", "z", "w", "v"}};
  CHECK(bleu_n(cands, refs, 1) == 0.0);

  // "the the the the the the the" vs "the cat is on the mat":
  // clipped unigram precision 2/7.
  const std::vector<TokenSeq> rep = {{"the", "the", "the", "the", "the", "the", "the"}};
  const std::vector<TokenSeq> ref = {{"the", "cat", "is", "on", "the", "mat"}};
  CHECK(bleu_n(rep, ref, 1) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("bleu: brevity penalty and validation") {
  // candidate shorter than reference
  const std::vector<TokenSeq> cands = {{"a", "b"}};
  const std::vector<TokenSeq> refs = {{"a", "b", "c", "d"}};
  CHECK(bleu_n(cands, refs, 1) == doctest::Approx(std::exp(1.0 - 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(bleu_n({}, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(bleu_n(cands, refs, 5), std::invalid_argument);
  CHECK_THROWS_AS(bleu_n(cands, {}, 1), std::invalid_argument);
}

TEST_CASE("rouge_l: identity, worked LCS example, disjoint") {
  const std::vector<TokenSeq> cands = {{"a", "b", "c", "d"}};
  CHECK(rouge_l(cands, cands) == doctest::Approx(1.0));
  // "a b c d" vs "a c b d": LCS length 3, P = R = 3/4, F = 3/4.
  const std::vector<TokenSeq> refs = {{"a", "c", "b", "d"}};
  CHECK(rouge_l(cands, refs) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rouge_l({{"a"}}, {{"b"}}) == 0.0);
}

TEST_CASE("meteor_lite: identity above 0.99 for m >= 5, disjoint zero, stems match") {
  const std::vector<TokenSeq> cands = {{"one", "two", "three", "four", "five"}};
  CHECK(meteor_lite(cands, cands) > 0.99);
  CHECK(meteor_lite({{"a"}}, {{"b"}}) == 0.0);
  // stem match: walking ~ walked (identical after suffix stripping)
  CHECK(suffix_stem("walking") == "walk");
  CHECK(suffix_stem("walked") == "walk");
  CHECK(suffix_stem("walks") == "walk");
  CHECK(suffix_stem("is") == "is");  // too short to strip
  CHECK(meteor_lite({{"walking"}}, {{"walked"}}) > 0.0);
}

TEST_CASE("meteor_lite: worked six-token example equals the loop oracle") {
  const std::vector<TokenSeq> cands = {{"the", "cat", "walked", "on", "the", "mat"}};
  const std::vector<TokenSeq> refs = {{"the", "dog", "walks", "on", "the", "mat"}};
  CHECK(meteor_lite(cands, refs) == doctest::Approx(oracle_meteor(cands, refs)).epsilon(1e-12));
}

TEST_CASE("all metrics match naive loop oracles on 20 random corpora") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(6);
    const auto cands = random_corpus(rng, n, kVocab);
    const auto refs = random_corpus(rng, n, kVocab);
    for (int order = 1; order <= 4; ++order) {
      CHECK(bleu_n(cands, refs, order) ==
            doctest::Approx(oracle_bleu(cands, refs, order)).epsilon(1e-9));
    }
    CHECK(rouge_l(cands, refs) == doctest::Approx(oracle_rouge(cands, refs)).epsilon(1e-9));
    CHECK(meteor_lite(cands, refs) == doctest::Approx(oracle_meteor(cands, refs)).epsilon(1e-9));
  }
}

TEST_CASE("bleu monotonically non-increasing in n on random corpora") {
  // Sentences of length >= 4 with substitution noise; degenerate one-token
  // sentences can invert corpus-level precisions and are excluded.
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(5);
    std::vector<TokenSeq> cands;
    for (std::size_t s = 0; s < n; ++s) {
      TokenSeq sent;
      const std::size_t len = 4 + rng.uniform_int(6);
      for (std::size_t i = 0; i < len; ++i) sent.push_back(kVocab[rng.uniform_int(kVocab.size())]);
      cands.push_back(std::move(sent));
    }
    auto refs = cands;
    for (auto& sent : refs)
      if (rng.bernoulli(0.5))
        sent[rng.uniform_int(sent.size())] = kVocab[rng.uniform_int(kVocab.size())];
    Scalar prev = 2.0;
    for (int order = 1; order <= 4; ++order) {
      const Scalar score = bleu_n(cands, refs, order);
      CHECK(score <= prev + 1e-12);
      prev = score;
    }
  }
}

TEST_CASE("metrics are permutation invariant in corpus order") {
  Rng rng(13);
  auto cands = random_corpus(rng, 6, kVocab);
  auto refs = random_corpus(rng, 6, kVocab);
  std::vector<TokenSeq> cands_perm = {cands[3], cands[0], cands[5], cands[1], cands[4], cands[2]};
  std::vector<TokenSeq> refs_perm = {refs[3], refs[0], refs[5], refs[1], refs[4], refs[2]};
  CHECK(bleu_n(cands, refs, 4) == doctest::Approx(bleu_n(cands_perm, refs_perm, 4)).epsilon(1e-12));
  CHECK(rouge_l(cands, refs) == doctest::Approx(rouge_l(cands_perm, refs_perm)).epsilon(1e-12));
  CHECK(meteor_lite(cands, refs) ==
        doctest::Approx(meteor_lite(cands_perm, refs_perm)).epsilon(1e-12));
}

TEST_CASE("length_hist: buckets and totals") {
  const std::vector<TokenSeq> cands = {{"a", "b", "c", "d", "e", "f", "g"},
                                       {"a"},
                                       {"a", "b", "c", "d", "e"}};
  const auto hist = length_hist(cands, 5);
  CHECK(hist.at(5) == 2);  // lengths 7 and 5
  CHECK(hist.at(0) == 1);  // length 1
  long total = 0;
  for (const auto& [start, count] : hist) total += count;
  CHECK(total == static_cast<long>(cands.size()));
  CHECK_THROWS_AS(length_hist(cands, 0), std::invalid_argument);

  const auto single = length_hist({{"a", "b", "c", "d", "e", "f", "g"}}, 5);
  CHECK(single.size() == 1);
  CHECK(single.at(5) == 1);
}

TEST_CASE("evaluate_corpus: aggregates and JSON rendering") {
  const std::vector<TokenSeq> cands = {{"a", "b", "c", "d"}, {"x", "y", "z", "w"}};
  const EvalReport rep = evaluate_corpus(cands, cands, 5);
  CHECK(rep.bleu[3] == doctest::Approx(1.0));
  CHECK(rep.rouge_l == doctest::Approx(1.0));
  CHECK(rep.n_samples == 2);
  const auto j = rep.to_json();
  CHECK(j.at("length_hist").contains("[0,5)"));
  CHECK(j.at("length_hist").at("[0,5)").get<long>() == 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(j.at("bleu")[static_cast<std::size_t>(i)].get<Scalar>() >= 0.0);
    CHECK(j.at("bleu")[static_cast<std::size_t>(i)].get<Scalar>() <= 1.0);
  }
}

TEST_CASE("split_tokens") {
  const TokenSeq t = split_tokens("  alpha beta\tgamma ");
  REQUIRE(t.size() == 3);
  CHECK(t[0] == "alpha");
  CHECK(t[2] == "gamma");
}
