// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "memgen/cli.hpp"
#include "memgen/corpus.hpp"

using namespace memgen;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("memgen_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: synth-data writes a dataset and run.json, exit 0") {
  TempDir dir;
  const std::string out = dir.file("data.jsonl");
  const int code = cli::run({"synth-data", "--n", "6", "--findings", "3", "--seed", "1", "--out",
                             out});
  CHECK(code == 0);
  const auto samples = load_dataset(out);
  CHECK(samples.size() == 6);
  CHECK(fs::exists(dir.file("data.run.json")));
  const auto run = nlohmann::json::parse(read_file(dir.file("data.run.json")));
  CHECK(run.at("command") == "synth-data");
  CHECK(run.contains("config_hash"));
  CHECK(run.contains("argv"));
}

TEST_CASE("cli: a run is reproducible from its run.json argv") {
  TempDir dir;
  const std::string out1 = dir.file("a.jsonl");
  REQUIRE(cli::run({"synth-data", "--n", "5", "--findings", "2", "--seed", "9", "--out", out1}) ==
          0);
  const auto run = nlohmann::json::parse(read_file(dir.file("a.run.json")));
  std::vector<std::string> argv = run.at("argv").get<std::vector<std::string>>();
  // redirect the output and replay
  for (auto& a : argv)
    if (a == out1) a = dir.file("b.jsonl");
  REQUIRE(cli::run(argv) == 0);
  CHECK(read_file(out1) == read_file(dir.file("b.jsonl")));
}

TEST_CASE("cli: unknown flag exits 1") {
  TempDir dir;
  const int code =
      cli::run({"synth-data", "--n", "4", "--bogus-flag", "--out", dir.file("x.jsonl")});
  CHECK(code == 1);
}

TEST_CASE("cli: unknown command exits 1") { CHECK(cli::run({"frobnicate"}) == 1); }

TEST_CASE("cli: build-vocab then pretrain-memory round trip") {
  TempDir dir;
  const std::string data = dir.file("data.jsonl");
  const std::string vocab_path = dir.file("vocab.txt");
  const std::string bank = dir.file("bank.bin");
  REQUIRE(cli::run({"synth-data", "--n", "12", "--findings", "2", "--seed", "3", "--out", data}) ==
          0);
  REQUIRE(cli::run({"build-vocab", "--data", data, "--min-freq", "1", "--out", vocab_path}) == 0);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  CHECK(vocab.size() > 4);

  const int code = cli::run({"pretrain-memory", "--data", data, "--vocab", vocab_path, "--nm",
                             "4", "--dm", "8", "--topk", "2", "--alpha", "20", "--eps", "0.07",
                             "--pretrain-epochs", "2", "--seed", "3", "--out", bank});
  CHECK(code == 0);
  CHECK(fs::exists(bank));
}

TEST_CASE("cli: train rejects premem without a bank (exit 1)") {
  TempDir dir;
  const std::string data = dir.file("data.jsonl");
  const std::string vocab_path = dir.file("vocab.txt");
  REQUIRE(cli::run({"synth-data", "--n", "6", "--findings", "2", "--seed", "5", "--out", data}) ==
          0);
  REQUIRE(cli::run({"build-vocab", "--data", data, "--min-freq", "1", "--out", vocab_path}) == 0);
  const int code = cli::run({"train", "--data", data, "--vocab", vocab_path, "--premem",
                             "--epochs", "1", "--out", dir.file("ckpt.bin")});
  CHECK(code == 1);
}

TEST_CASE("cli: end-to-end train, generate, evaluate, inspect") {
  TempDir dir;
  const std::string data = dir.file("data.jsonl");
  const std::string vocab_path = dir.file("vocab.txt");
  const std::string ckpt = dir.file("ckpt.bin");
  const std::string gen = dir.file("gen.jsonl");
  const std::string eval = dir.file("eval.json");
  REQUIRE(cli::run({"synth-data", "--n", "8", "--findings", "2", "--seed", "7", "--out", data}) ==
          0);
  REQUIRE(cli::run({"build-vocab", "--data", data, "--min-freq", "1", "--out", vocab_path}) == 0);

  const int train_code =
      cli::run({"train", "--data", data, "--vocab", vocab_path, "--no-premem", "--no-sam",
                "--no-wm", "--epochs", "1", "--batch", "4", "--dim", "16", "--dm", "16", "--nm",
                "8", "--topk", "2", "--seed", "7", "--out", ckpt});
  REQUIRE(train_code == 0);
  REQUIRE(fs::exists(ckpt));

  REQUIRE(cli::run({"generate", "--ckpt", ckpt, "--data", data, "--vocab", vocab_path, "--beam",
                    "1", "--out", gen}) == 0);
  std::ifstream gen_in(gen);
  std::string line;
  int lines = 0;
  while (std::getline(gen_in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("sample_id"));
    CHECK(j.contains("generated"));
    CHECK(j.contains("reference"));
    CHECK(j.contains("logprob"));
    ++lines;
  }
  CHECK(lines == 8);

  REQUIRE(cli::run({"evaluate", "--gen", gen, "--hist", dir.file("hist.csv"), "--out", eval}) ==
          0);
  const auto report = nlohmann::json::parse(read_file(eval));
  CHECK(report.contains("bleu"));
  CHECK(report.at("n_samples") == 8);
  CHECK(read_file(dir.file("hist.csv")).find("bucket_start,count") != std::string::npos);

  REQUIRE(cli::run({"inspect-memory", "--ckpt", ckpt, "--data", data, "--vocab", vocab_path,
                    "--out", dir.file("retrieval.csv")}) == 0);
  const std::string csv = read_file(dir.file("retrieval.csv"));
  CHECK(csv.find("sample_id,modality,position,token_or_patch,indices,weights") !=
        std::string::npos);
  CHECK(csv.find("visual") != std::string::npos);
  CHECK(csv.find("textual") != std::string::npos);
  CHECK(csv.find("patch_0") != std::string::npos);
}

TEST_CASE("cli: missing input file is a runtime failure (exit 2)") {
  TempDir dir;
  const int code = cli::run({"build-vocab", "--data", dir.file("nope.jsonl"), "--out",
                             dir.file("v.txt")});
  CHECK(code == 2);
}
