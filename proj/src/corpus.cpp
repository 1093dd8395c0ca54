// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "memgen/rng.hpp"

namespace memgen {

namespace {
const std::vector<std::string> kSpecials = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

int Vocabulary::id_of(const std::string& word) const {
  auto it = word_to_id.find(word);
  return it == word_to_id.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word_of(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("Vocabulary: id out of range");
  return id_to_word[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("Vocabulary: cannot write '" + path + "'");
  for (const auto& w : id_to_word) out << w << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Vocabulary: cannot open '" + path + "'");
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    v.word_to_id[line] = static_cast<int>(v.id_to_word.size());
    v.id_to_word.push_back(line);
  }
  for (std::size_t i = 0; i < kSpecials.size(); ++i) {
    if (v.id_to_word.size() <= i || v.id_to_word[i] != kSpecials[i])
      throw std::runtime_error("Vocabulary: '" + path + "' does not start with the special tokens");
  }
  return v;
}

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char ch : text) {
    if (std::isalnum(ch))
      cleaned.push_back(static_cast<char>(std::tolower(ch)));
    else
      cleaned.push_back(' ');
  }
  std::vector<std::string> tokens;
  std::istringstream iss(cleaned);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

Vocabulary build_vocab(const std::vector<std::string>& reports, int min_freq) {
  if (reports.empty()) throw std::invalid_argument("empty corpus");
  if (min_freq < 1) throw std::invalid_argument("build_vocab: min_freq must be >= 1");

  std::map<std::string, long> freq;  // ordered: alphabetical tie-break for free
  for (const auto& r : reports)
    for (const auto& tok : normalize_tokens(r)) ++freq[tok];

  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [word, count] : freq)
    if (count >= min_freq) kept.emplace_back(word, count);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  v.min_freq = min_freq;
  for (const auto& s : kSpecials) {
    v.word_to_id[s] = static_cast<int>(v.id_to_word.size());
    v.id_to_word.push_back(s);
  }
  for (const auto& [word, count] : kept) {
    v.word_to_id[word] = static_cast<int>(v.id_to_word.size());
    v.id_to_word.push_back(word);
  }
  return v;
}

Report tokenize(const std::string& text, const Vocabulary& vocab) {
  Report r;
  r.tokens.push_back(kBos);
  for (const auto& tok : normalize_tokens(text)) r.tokens.push_back(vocab.id_of(tok));
  r.tokens.push_back(kEos);
  return r;
}

BowVector bow(const Report& report, const Vocabulary& vocab) {
  BowVector b;
  b.counts = Vec::Zero(vocab.size());
  for (int id : report.tokens) {
    if (id > kUnk && id < vocab.size()) b.counts(id) += 1.0;
  }
  const Scalar total = b.counts.sum();
  if (total <= 0.0) throw std::invalid_argument("degenerate report");
  b.normalized = b.counts / total;
  return b;
}

// ---- synthetic generator ----

namespace {

struct FindingSpec {
  const char* name;
  const char* site;
};

// 16 findings, each with a unique finding word and a unique site word so the
// planted topics are recoverable from text alone.
const FindingSpec kFindings[16] = {
    {"cardiomegaly", "silhouette"}, {"edema", "interstitium"},
    {"effusion", "costophrenic"},   {"pneumothorax", "apex"},
    {"consolidation", "lobe"},      {"atelectasis", "base"},
    {"nodule", "hilum"},            {"fracture", "rib"},
    {"opacity", "midzone"},         {"emphysema", "airspace"},
    {"fibrosis", "parenchyma"},     {"scoliosis", "spine"},
    {"hernia", "diaphragm"},        {"calcification", "aorta"},
    {"thickening", "pleura"},       {"congestion", "vasculature"},
};

const std::string kFiller = "remaining structures are unremarkable";

}  // namespace

std::vector<FindingTemplate> synth_finding_templates(int n_findings) {
  if (n_findings < 1 || n_findings > 16)
    throw std::invalid_argument("synth_finding_templates: n_findings must be in [1,16]");
  std::vector<FindingTemplate> out;
  for (int f = 0; f < n_findings; ++f) {
    FindingTemplate t;
    t.name = kFindings[f].name;
    const std::string word = kFindings[f].name;
    const std::string site = kFindings[f].site;
    t.sentences = {word + " near " + site, site + " " + word + " seen"};
    t.unique_words = {word, site};
    out.push_back(std::move(t));
  }
  return out;
}

const std::string& synth_filler_sentence() { return kFiller; }

FindingLocation synth_finding_location(int finding, Index grid_h, Index grid_w) {
  const Index blocks_per_row = grid_w / 4;
  const Index block_row = finding / blocks_per_row;
  const Index block_col = finding % blocks_per_row;
  if ((block_row + 1) * 4 > grid_h)
    throw std::invalid_argument("synth_finding_location: grid too small for finding index");
  return {block_row * 4, block_col * 4};
}

std::vector<PairedSample> synth_generate(int n_samples, int n_findings,
                                         std::pair<Index, Index> grid, std::uint64_t seed) {
  const auto [h, w] = grid;
  if (n_samples < 1) throw std::invalid_argument("synth_generate: n_samples must be positive");
  if (n_findings < 1 || n_findings > 16)
    throw std::invalid_argument("synth_generate: n_findings must be in [1,16]");
  if (h < 4 || w < 4) throw std::invalid_argument("synth_generate: grid must be at least 4x4");
  if (h % 4 != 0 || w % 4 != 0)
    throw std::invalid_argument("synth_generate: grid sides must be multiples of 4");
  if ((h / 4) * (w / 4) < n_findings)
    throw std::invalid_argument("synth_generate: grid too small for requested findings");

  const auto templates = synth_finding_templates(n_findings);

  // Per-finding 4x4 intensity pattern, fixed independently of the seed.
  std::vector<Mat> patterns;
  for (int f = 0; f < n_findings; ++f) {
    Rng pattern_rng(0x9e3779b9u + static_cast<std::uint64_t>(f));
    Mat p(4, 4);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) p(i, j) = pattern_rng.bernoulli(0.5) ? 1.0 : -1.0;
    patterns.push_back(p);
  }

  Rng rng(seed);
  std::vector<PairedSample> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    std::vector<int> present;
    for (int f = 0; f < n_findings; ++f)
      if (rng.bernoulli(0.3)) present.push_back(f);
    if (present.empty()) present.push_back(static_cast<int>(rng.uniform_int(n_findings)));

    Mat img(h, w);
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) img(i, j) = 0.1 * rng.normal();

    std::string text;
    PairedSample sample;
    for (int f : present) {
      const auto loc = synth_finding_location(f, h, w);
      img.block(loc.row0, loc.col0, 4, 4) += patterns[static_cast<std::size_t>(f)];
      const auto& tpl = templates[static_cast<std::size_t>(f)];
      const std::size_t variant = rng.uniform_int(tpl.sentences.size());
      if (!text.empty()) text += " . ";
      text += tpl.sentences[variant];
      sample.findings.push_back(tpl.name);
    }
    text += " . " + kFiller + " .";

    char id[32];
    std::snprintf(id, sizeof(id), "synth-%05d", s);
    sample.sample_id = id;
    sample.report_text = text;
    sample.grid = img;
    samples.push_back(std::move(sample));
  }
  return samples;
}

// ---- dataset I/O ----

namespace {

Mat json_to_matrix(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw std::invalid_argument(std::string(what) + " must be a 2-d array");
  const Index nr = static_cast<Index>(rows.size());
  const Index nc = static_cast<Index>(rows[0].size());
  Mat m(nr, nc);
  for (Index i = 0; i < nr; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != nc)
      throw std::invalid_argument(std::string(what) + " has ragged rows");
    for (Index j = 0; j < nc; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<Scalar>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<PairedSample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open '" + path + "'");
  std::vector<PairedSample> samples;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "load_dataset: line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(where + ": invalid JSON (" + e.what() + ")");
    }
    try {
      PairedSample s;
      if (!j.contains("sample_id")) throw std::invalid_argument("missing field 'sample_id'");
      if (!j.contains("report")) throw std::invalid_argument("missing field 'report'");
      if (!j.contains("image")) throw std::invalid_argument("missing field 'image'");
      s.sample_id = j.at("sample_id").get<std::string>();
      s.report_text = j.at("report").get<std::string>();
      const auto& img = j.at("image");
      const bool has_grid = img.contains("grid");
      const bool has_features = img.contains("features");
      if (has_grid == has_features)
        throw std::invalid_argument("image must contain exactly one of 'grid' or 'features'");
      if (has_grid)
        s.grid = json_to_matrix(img.at("grid"), "image.grid");
      else
        s.features = json_to_matrix(img.at("features"), "image.features");
      if (j.contains("findings"))
        s.findings = j.at("findings").get<std::vector<std::string>>();
      samples.push_back(std::move(s));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  // All samples of a dataset must agree on the visual token count.
  for (const auto& s : samples) {
    const auto& first = samples.front();
    if (s.has_grid() != first.has_grid())
      throw std::invalid_argument("load_dataset: mixed grid/features image forms");
    const bool same_shape =
        s.has_grid() ? (s.grid->rows() == first.grid->rows() && s.grid->cols() == first.grid->cols())
                     : (s.features->rows() == first.features->rows() &&
                        s.features->cols() == first.features->cols());
    if (!same_shape)
      throw std::invalid_argument("load_dataset: inconsistent image shapes across samples");
  }
  return samples;
}

void save_dataset(const std::string& path, const std::vector<PairedSample>& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot write '" + path + "'");
  for (const auto& s : samples) {
    nlohmann::json j;
    j["sample_id"] = s.sample_id;
    j["report"] = s.report_text;
    if (s.has_grid())
      j["image"] = {{"grid", matrix_to_json(*s.grid)}};
    else
      j["image"] = {{"features", matrix_to_json(*s.features)}};
    if (!s.findings.empty()) j["findings"] = s.findings;
    out << j.dump() << '\n';
  }
}

}  // namespace memgen
