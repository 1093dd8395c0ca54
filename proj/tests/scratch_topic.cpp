// Scratch experiment: topic pretraining calibration (not part of the build).
#include <cstdio>
#include <set>

#include "memgen/corpus.hpp"
#include "memgen/otmem.hpp"

using namespace memgen;

int main(int argc, char** argv) {
  const int epochs = argc > 1 ? std::atoi(argv[1]) : 200;
  const double lr = argc > 2 ? std::atof(argv[2]) : 5e-3;
  const int n_samples = argc > 3 ? std::atoi(argv[3]) : 96;
  const double eps = argc > 4 ? std::atof(argv[4]) : 0.07;
  const int n_findings = 3;

  const auto samples = synth_generate(n_samples, n_findings, {16, 16}, 31);
  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.report_text);
  const Vocabulary vocab = build_vocab(texts, 1);
  std::printf("vocab size %d\n", vocab.size());
  std::vector<BowVector> bows;
  for (const auto& s : samples) bows.push_back(bow(tokenize(s.report_text, vocab), vocab));

  TopicPretrainConfig cfg;
  cfg.memory_slots = 8;
  cfg.memory_dim = 32;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.likelihood_weight = eps;
  if (argc > 5) cfg.sinkhorn_lambda = std::atof(argv[5]);
  cfg.seed = 31;
  Rng rng(31);
  TopicModel model(vocab.size(), cfg, rng);
  const PretrainResult result = pretrain_memory(model, bows, cfg);
  std::printf("loss first %.4f last %.4f\n", result.loss_history.front(),
              result.loss_history.back());

  const auto templates = synth_finding_templates(n_findings);
  double max_mass_min = 1.0;
  for (const auto& t : templates) {
    const Report r = tokenize(t.sentences[0], vocab);
    const Vec z = model.topic_distribution_eval(bow(r, vocab).normalized);
    std::printf("finding %-16s max z %.3f\n", t.name.c_str(), z.maxCoeff());
    max_mass_min = std::min(max_mass_min, z.maxCoeff());
  }

  // centroids over unique words of each finding
  Mat centroids(n_findings, cfg.memory_dim);
  for (int f = 0; f < n_findings; ++f) {
    centroids.row(f).setZero();
    for (const auto& w : templates[f].unique_words)
      centroids.row(f) += model.word_embeddings().row(vocab.id_of(w));
    centroids.row(f) /= templates[f].unique_words.size();
  }
  const double match = greedy_match_mean_cosine(centroids, model.topic_embeddings());
  std::printf("greedy match mean cosine %.3f ; min max-mass %.3f\n", match, max_mass_min);
  return 0;
}
