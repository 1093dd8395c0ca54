// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "memgen/corpus.hpp"
#include "memgen/rng.hpp"

using namespace memgen;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("build_vocab: frequency threshold and specials") {
  std::vector<std::string> corpus(100, "no acute findings");
  const Vocabulary v = build_vocab(corpus, 17);
  CHECK(v.size() == 4 + 3);
  CHECK(v.word_of(kPad) == "<pad>");
  CHECK(v.word_of(kBos) == "<bos>");
  CHECK(v.word_of(kEos) == "<eos>");
  CHECK(v.word_of(kUnk) == "<unk>");
  CHECK(v.id_of("no") >= 4);

  const Vocabulary small = build_vocab({"a b", "b c"}, 2);
  CHECK(small.size() == 5);
  CHECK(small.id_of("b") == 4);
  CHECK(small.id_of("a") == kUnk);
  CHECK(small.id_of("c") == kUnk);
}

TEST_CASE("build_vocab: empty corpus and validation") {
  CHECK_THROWS_WITH_AS(build_vocab({}, 1), "empty corpus", std::invalid_argument);
  CHECK_THROWS_AS(build_vocab({"x"}, 0), std::invalid_argument);
}

TEST_CASE("build_vocab: deterministic and permutation invariant") {
  const std::vector<std::string> corpus = {"pleural effusion noted", "effusion at the base",
                                           "the heart is normal", "base of the lung"};
  const Vocabulary a = build_vocab(corpus, 1);
  std::vector<std::string> shuffled = {corpus[2], corpus[0], corpus[3], corpus[1]};
  const Vocabulary b = build_vocab(shuffled, 1);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) CHECK(a.word_of(i) == b.word_of(i));
  // ties in frequency break alphabetically
  const Vocabulary ties = build_vocab({"zebra apple"}, 1);
  CHECK(ties.word_of(4) == "apple");
  CHECK(ties.word_of(5) == "zebra");
}

TEST_CASE("tokenize: framing, lowercasing, punctuation, OOV") {
  const Vocabulary v = build_vocab({"no acute findings"}, 1);
  const Report r = tokenize("No acute findings.", v);
  REQUIRE(r.tokens.size() == 5);
  CHECK(r.tokens.front() == kBos);
  CHECK(r.tokens.back() == kEos);
  CHECK(r.tokens[1] == v.id_of("no"));
  CHECK(r.content_length() == 3);

  const Report empty = tokenize("", v);
  CHECK(empty.tokens == std::vector<int>{kBos, kEos});
  CHECK(empty.content_length() == 0);

  const Report oov = tokenize("no zzz findings", v);
  CHECK(oov.tokens[2] == kUnk);
}

TEST_CASE("bow: counts, normalization, degenerate report") {
  const Vocabulary v = build_vocab({"a a b"}, 1);
  const Report r = tokenize("a a b", v);
  const BowVector b = bow(r, v);
  CHECK(b.counts(v.id_of("a")) == 2.0);
  CHECK(b.counts(v.id_of("b")) == 1.0);
  CHECK(b.normalized(v.id_of("a")) == doctest::Approx(2.0 / 3.0));
  CHECK(b.normalized(v.id_of("b")) == doctest::Approx(1.0 / 3.0));
  CHECK(b.normalized.sum() == doctest::Approx(1.0).epsilon(1e-9));

  const Report single = tokenize("b", v);
  const BowVector one_hot = bow(single, v);
  CHECK(one_hot.normalized.maxCoeff() == 1.0);

  const Report unk_only = tokenize("zzz qqq", v);
  CHECK_THROWS_WITH_AS(bow(unk_only, v), "degenerate report", std::invalid_argument);
}

TEST_CASE("bow of tokenize reproduces exact frequencies without OOV") {
  const Vocabulary v = build_vocab({"one two three four five"}, 1);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<std::string> words = {"one", "two", "three", "four", "five"};
    std::string text;
    std::map<std::string, int> freq;
    const int len = 1 + static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < len; ++i) {
      const auto& w = words[rng.uniform_int(words.size())];
      ++freq[w];
      text += (text.empty() ? "" : " ") + w;
    }
    const BowVector b = bow(tokenize(text, v), v);
    for (const auto& [w, count] : freq) CHECK(b.counts(v.id_of(w)) == count);
    CHECK(b.normalized.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("synth_generate: determinism and seed sensitivity") {
  const auto a = synth_generate(8, 4, {16, 16}, 42);
  const auto b = synth_generate(8, 4, {16, 16}, 42);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].report_text == b[i].report_text);
    CHECK(a[i].sample_id == b[i].sample_id);
    CHECK((*a[i].grid - *b[i].grid).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a[i].findings == b[i].findings);
  }
  const auto c = synth_generate(8, 4, {16, 16}, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].report_text != c[i].report_text) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("synth_generate: single finding shares templates, at least one finding") {
  const auto samples = synth_generate(20, 1, {16, 16}, 7);
  const auto templates = synth_finding_templates(1);
  for (const auto& s : samples) {
    REQUIRE(s.findings.size() == 1);
    CHECK(s.findings[0] == templates[0].name);
    const bool t0 = s.report_text.find(templates[0].sentences[0]) != std::string::npos;
    const bool t1 = s.report_text.find(templates[0].sentences[1]) != std::string::npos;
    CHECK((t0 || t1));
  }
}

TEST_CASE("synth_generate: per-finding frequency near 0.3 at n=1000") {
  const int n = 1000, findings = 8;
  const auto samples = synth_generate(n, findings, {16, 16}, 123);
  std::map<std::string, int> present;
  for (const auto& s : samples)
    for (const auto& f : s.findings) ++present[f];
  const auto templates = synth_finding_templates(findings);
  for (const auto& t : templates) {
    const Scalar freq = static_cast<Scalar>(present[t.name]) / n;
    INFO("finding ", t.name, " freq ", freq);
    CHECK(freq >= 0.25);
    CHECK(freq <= 0.35);
  }
}

TEST_CASE("synth_generate: validation errors") {
  CHECK_THROWS_AS(synth_generate(4, 0, {16, 16}, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_generate(4, 17, {16, 16}, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_generate(4, 2, {2, 2}, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_generate(0, 2, {16, 16}, 1), std::invalid_argument);
  CHECK_THROWS_AS(synth_generate(4, 8, {4, 4}, 1), std::invalid_argument);
}

TEST_CASE("dataset: save/load round trip") {
  const auto samples = synth_generate(5, 3, {8, 8}, 9);
  const std::string path = temp_path("memgen_corpus_rt.jsonl");
  save_dataset(path, samples);
  const auto loaded = load_dataset(path);
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].sample_id == samples[i].sample_id);
    CHECK(loaded[i].report_text == samples[i].report_text);
    CHECK(loaded[i].findings == samples[i].findings);
    CHECK((*loaded[i].grid - *samples[i].grid).cwiseAbs().maxCoeff() < 1e-15);
  }
  std::remove(path.c_str());
}

TEST_CASE("dataset: empty file and malformed lines") {
  const std::string path = temp_path("memgen_corpus_bad.jsonl");
  {
    std::ofstream out(path, std::ios::trunc);
  }
  CHECK(load_dataset(path).empty());
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"sample_id": "ok", "report": "fine", "image": {"features": [[1, 2]]}})" << '\n';
    out << R"({"sample_id": "broken", "image": {"features": [[1, 2]]}})" << '\n';
  }
  try {
    load_dataset(path);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("report") != std::string::npos);
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"sample_id": "both", "report": "x", "image": {"grid": [[1]], "features": [[1]]}})"
        << '\n';
  }
  CHECK_THROWS_AS(load_dataset(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("vocabulary file round trip, line number = id") {
  const Vocabulary v = build_vocab({"alpha beta alpha"}, 1);
  const std::string path = temp_path("memgen_vocab.txt");
  v.save(path);
  const Vocabulary loaded = Vocabulary::load(path);
  REQUIRE(loaded.size() == v.size());
  for (int i = 0; i < v.size(); ++i) CHECK(loaded.word_of(i) == v.word_of(i));
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "<pad>");
  std::remove(path.c_str());
}
