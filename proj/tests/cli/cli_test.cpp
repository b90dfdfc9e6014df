// SPDX-License-Identifier: Apache-2.0
// Runs the glyphembed executable end to end and inspects exit codes and artifacts.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/checkpoint.hpp"
#include "glyphembed/corpus.hpp"
#include "glyphembed/glyph.hpp"
#include "glyphembed/model.hpp"

namespace {

namespace fs = std::filesystem;
namespace ge = glyphembed;
using nlohmann::json;

const std::string kBinary = GLYPHEMBED_CLI_PATH;
const fs::path kData = GLYPHEMBED_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> json_lines(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    work_ = fs::path(GLYPHEMBED_CLI_WORK_DIR) / info->name();
    fs::remove_all(work_);
    fs::create_directories(work_);
  }

  // Exit status of `glyphembed args...`, run inside the work directory.
  int run(const std::string& args) {
    const std::string cmd = "cd '" + work_.string() + "' && '" + kBinary + "' " + args + " >stdout.txt 2>stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string err() const { return slurp(work_ / "stderr.txt"); }
  std::string out() const { return slurp(work_ / "stdout.txt"); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(work_ / name, std::ios::binary);
    f << text;
  }

  void build_toy(const std::string& dir, int seed = 1) {
    ASSERT_EQ(run("dataset --graph " + (kData / "toy_graph.tsv").string() + " --memberships " +
                  (kData / "toy_memberships.tsv").string() + " --out " + dir + " --seed " + std::to_string(seed)),
              0)
        << err();
  }

  void overfit_corpus(const std::string& dir) {
    fs::create_directories(work_ / dir);
    fs::copy_file(kData / "overfit64.tsv", work_ / dir / "train.tsv");
  }

  fs::path work_;
};

TEST_F(Cli, DatasetWritesSixTwoTwoSplitFiles) {
  build_toy("ds");
  EXPECT_EQ(line_count(work_ / "ds/train.tsv"), 15u);
  EXPECT_EQ(line_count(work_ / "ds/valid.tsv"), 4u);
  EXPECT_EQ(line_count(work_ / "ds/test.tsv"), 4u);
  const auto summary = json::parse(slurp(work_ / "ds/summary.json"));
  EXPECT_EQ(summary["instances"], 23);
  EXPECT_EQ(summary["dropped_special_titles"], 2);
  EXPECT_EQ(summary["dropped_unreachable_titles"], 1);
  EXPECT_TRUE(summary.contains("title_length"));
  EXPECT_TRUE(fs::exists(work_ / "ds/freq.tsv"));
}

TEST_F(Cli, DatasetRerunIsByteIdentical) {
  build_toy("a", 9);
  build_toy("b", 9);
  for (const char* f : {"train.tsv", "valid.tsv", "test.tsv", "splits.tsv", "freq.tsv", "summary.json"}) {
    EXPECT_EQ(slurp(work_ / "a" / f), slurp(work_ / "b" / f)) << f;
  }
}

TEST_F(Cli, DatasetUnknownCategoryNamesTheLine) {
  write("members.tsv", "山\tMountains\n川\tNoSuchCategory\n");
  EXPECT_EQ(run("dataset --graph " + (kData / "toy_graph.tsv").string() + " --memberships members.tsv --out ds"), 3);
  EXPECT_NE(err().find("line 2"), std::string::npos) << err();
  EXPECT_NE(err().find("NoSuchCategory"), std::string::npos) << err();
}

TEST_F(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("train --model transformer"), 2);
  EXPECT_EQ(run("eval --checkpoint x.ckpt --fusion early"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, TrainRejectsBadConfigBeforeTraining) {
  overfit_corpus("c");
  write("bad.json", R"({"corpus_dir": "c", "out": "run", "learning_rate": 0.1})");
  EXPECT_EQ(run("train --config bad.json"), 2);
  EXPECT_NE(err().find("learning_rate"), std::string::npos);
  EXPECT_FALSE(fs::exists(work_ / "run"));

  write("bad2.json", R"({"corpus_dir": "c", "out": "run", "model": "visual", "d_c": 64})");
  EXPECT_EQ(run("train --config bad2.json"), 2);
  EXPECT_FALSE(fs::exists(work_ / "run"));

  EXPECT_EQ(run("train --corpus missing --out run"), 3);
  EXPECT_FALSE(fs::exists(work_ / "run"));
}

TEST_F(Cli, TrainOverfitsFixture) {
  overfit_corpus("c");
  ASSERT_EQ(run("train --corpus c --out run --model lookup --epochs 40 --batch-size 16"), 0) << err();
  const auto summary = json::parse(slurp(work_ / "run/train.json"));
  EXPECT_GE(summary["final_train_accuracy"].get<double>(), 0.95);
  const auto log = json_lines(work_ / "run/epochs.jsonl");
  ASSERT_EQ(log.size(), 40u);
  EXPECT_LT(log.back()["mean_loss"].get<double>(), log.front()["mean_loss"].get<double>());
  EXPECT_TRUE(log.front()["valid_accuracy"].is_null());
}

TEST_F(Cli, LookupAndVisualBothProduceLoadableCheckpoints) {
  overfit_corpus("c");
  for (const std::string kind : {"lookup", "visual"}) {
    ASSERT_EQ(run("train --corpus c --out " + kind + " --model " + kind + " --epochs 1 --batch-size 32"), 0) << err();
    const auto loaded = ge::load_checkpoint((work_ / kind / "model.ckpt").string());
    EXPECT_EQ(std::string(ge::to_string(loaded.model.kind())), kind);
    ASSERT_TRUE(loaded.train_config.has_value());
    EXPECT_EQ(loaded.train_config->epochs, 1u);
    const auto p = loaded.model.predict(U"\U0000E021");
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
  }
}

TEST_F(Cli, ZeroEpochsSavesInitialParameters) {
  overfit_corpus("c");
  ASSERT_EQ(run("train --corpus c --out run --epochs 0 --seed 5"), 0) << err();
  const auto loaded = ge::load_checkpoint((work_ / "run/model.ckpt").string());

  const auto categories = ge::default_categories();
  const auto train = ge::load_corpus_tsv((kData / "overfit64.tsv").string(), categories);
  ge::TrainConfig cfg;
  cfg.seed = 5;
  ge::Model fresh(ge::model_config(cfg), ge::char_frequency_table(train), categories, nullptr, cfg.seed);
  ge::round_to_storage_precision(fresh.params());
  ASSERT_EQ(loaded.model.params().size(), fresh.params().size());
  for (std::size_t t = 0; t < fresh.params().size(); ++t) {
    const auto& a = fresh.params()[t];
    const auto& b = loaded.model.params()[t];
    EXPECT_EQ(a.name(), b.name());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.value()[i], b.value()[i]) << a.name() << "[" << i << "]";
  }
}

TEST_F(Cli, TrainIsDeterministic) {
  overfit_corpus("c");
  ASSERT_EQ(run("train --corpus c --out r1 --epochs 3 --batch-size 16 --seed 11"), 0);
  ASSERT_EQ(run("train --corpus c --out r2 --epochs 3 --batch-size 16 --seed 11"), 0);
  EXPECT_EQ(slurp(work_ / "r1/model.ckpt"), slurp(work_ / "r2/model.ckpt"));
  EXPECT_EQ(slurp(work_ / "r1/epochs.jsonl"), slurp(work_ / "r2/epochs.jsonl"));
}

TEST_F(Cli, WarmStartCopiesParameters) {
  overfit_corpus("c");
  ASSERT_EQ(run("train --corpus c --out base --epochs 2 --batch-size 16"), 0);
  ASSERT_EQ(run("train --corpus c --out warm --epochs 0 --seed 99 --warm-start base/model.ckpt"), 0) << err();
  const auto base = ge::load_checkpoint((work_ / "base/model.ckpt").string());
  const auto warm = ge::load_checkpoint((work_ / "warm/model.ckpt").string());
  for (std::size_t t = 0; t < base.model.params().size(); ++t) {
    const auto& a = base.model.params()[t];
    const auto& b = warm.model.params()[t];
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.value()[i], b.value()[i]) << a.name();
  }
}

class CliEval : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    overfit_corpus("c");
    ASSERT_EQ(run("train --corpus c --out lk --model lookup --epochs 2 --batch-size 16"), 0) << err();
    ASSERT_EQ(run("train --corpus c --out vis --model visual --epochs 1 --batch-size 32"), 0) << err();
    // Seen composites, plus a title of composites never present in training.
    write("test.tsv",
          "\U0000E021\U0000E042\tEconomics\n"
          "\U0000E1FF\U0000E1FE\tArts\n");
  }
};

TEST_F(CliEval, SingleCheckpointHasNoFusionRows) {
  ASSERT_EQ(run("eval --checkpoint lk/model.ckpt --data c/train.tsv --out ev"), 0) << err();
  const auto report = json::parse(slurp(work_ / "ev/report.json"));
  ASSERT_EQ(report["rows"].size(), 1u);
  EXPECT_EQ(report["rows"][0]["name"], "lookup");
  EXPECT_EQ(report["instances"], 64);
  // 64 instances: no k in {100, 1000, 10000} fits.
  EXPECT_TRUE(report["rows"][0]["k_rarest"].empty());
  EXPECT_EQ(line_count(work_ / "ev/lookup.curve.tsv"), 65u);
  EXPECT_EQ(json_lines(work_ / "ev/lookup.records.jsonl").size(), 64u);
}

TEST_F(CliEval, LateFusionAveragesProbabilities) {
  ASSERT_EQ(run("eval --checkpoint lk/model.ckpt --checkpoint vis/model.ckpt --data c/train.tsv --fusion late "
                "--out ev"),
            0)
      << err();
  const auto report = json::parse(slurp(work_ / "ev/report.json"));
  ASSERT_EQ(report["rows"].size(), 3u);
  EXPECT_EQ(report["rows"][2]["name"], "late");
  const auto a = json_lines(work_ / "ev/lookup.records.jsonl");
  const auto b = json_lines(work_ / "ev/visual.records.jsonl");
  const auto f = json_lines(work_ / "ev/late.records.jsonl");
  ASSERT_EQ(f.size(), a.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t k = 0; k < f[i]["probs"].size(); ++k) {
      const double mean = (a[i]["probs"][k].get<double>() + b[i]["probs"][k].get<double>()) / 2;
      EXPECT_NEAR(f[i]["probs"][k].get<double>(), mean, 1e-15);
    }
  }
}

TEST_F(CliEval, FallbackRoutesUnseenTitlesToVisual) {
  ASSERT_EQ(run("eval --checkpoint lk/model.ckpt --checkpoint vis/model.ckpt --data test.tsv --fusion fallback "
                "--threshold 0 --out ev"),
            0)
      << err();
  const auto report = json::parse(slurp(work_ / "ev/report.json"));
  const auto& row = report["rows"][2];
  EXPECT_EQ(row["name"], "fallback");
  const auto records = json_lines(work_ / "ev/fallback.records.jsonl");
  ASSERT_EQ(records.size(), 2u);
  std::size_t to_visual = 0;
  for (const auto& r : records) {
    const bool unseen = r["avg_char_frequency"].get<double>() == 0.0;
    EXPECT_EQ(r["route"], unseen ? "visual" : "lookup");
    to_visual += unseen ? 1 : 0;
  }
  EXPECT_EQ(row["routing"]["visual"], to_visual);
  EXPECT_EQ(row["routing"]["lookup"], 2 - to_visual);
  EXPECT_EQ(records[1]["route"], "visual");

  // Checkpoint order does not decide which side is the lookup model.
  ASSERT_EQ(run("eval --checkpoint vis/model.ckpt --checkpoint lk/model.ckpt --data test.tsv --fusion fallback "
                "--out ev2"),
            0);
  EXPECT_EQ(slurp(work_ / "ev/fallback.records.jsonl"), slurp(work_ / "ev2/fallback.records.jsonl"));
}

TEST_F(CliEval, FusionNeedsTwoCompatibleCheckpoints) {
  EXPECT_EQ(run("eval --checkpoint lk/model.ckpt --data test.tsv --fusion late"), 2);
  write("cats.json", R"({"categories": ["A", "B", "C"]})");
  fs::create_directories(work_ / "abc");
  write("abc/train.tsv", "\U0000E021\tA\n\U0000E042\tB\n\U0000E063\tC\n");
  ASSERT_EQ(run("train --config cats.json --corpus abc --out abc_run --epochs 0"), 0) << err();
  EXPECT_EQ(run("eval --checkpoint lk/model.ckpt --checkpoint abc_run/model.ckpt --data test.tsv --fusion late"), 2);
  EXPECT_NE(err().find("categories"), std::string::npos) << err();
}

TEST_F(CliEval, KnnDefaultsToSixNeighbours) {
  ASSERT_EQ(run("analyze --checkpoint vis/model.ckpt --mode knn --chars U+E021,U+E1FF --out an"), 0) << err();
  EXPECT_EQ(line_count(work_ / "an/knn_U+E021.tsv"), 7u);
  EXPECT_EQ(line_count(work_ / "an/knn_U+E1FF.tsv"), 7u);
  EXPECT_EQ(slurp(work_ / "an/knn_U+E021.tsv").find("U+E021"), std::string::npos);
}

TEST_F(CliEval, OcclusionNeedsAVisualCheckpoint) {
  EXPECT_EQ(run("analyze --checkpoint lk/model.ckpt --mode occlusion --chars U+E021"), 2);
  ASSERT_EQ(run("analyze --checkpoint vis/model.ckpt --mode occlusion --chars 'U+E021 U+0020' --out an"), 0) << err();
  const auto blank = ge::read_pgm((work_ / "an/occlusion_U+0020.pgm").string());
  EXPECT_TRUE(blank.blank());
  const auto side = json::parse(slurp(work_ / "an/occlusion_U+0020.json"));
  for (const auto& c : side["corners"].items()) EXPECT_EQ(c.value().get<double>(), 0.0);
  const auto heat = ge::read_pgm((work_ / "an/occlusion_U+E021.pgm").string());
  EXPECT_FALSE(heat.blank());
}

TEST_F(Cli, KnnRejectsKBeyondVocabulary) {
  fs::create_directories(work_ / "tiny");
  write("tiny/train.tsv", "\U0000E021\U0000E042\tEconomics\n\U0000E063\tArts\n");
  ASSERT_EQ(run("train --corpus tiny --out run --epochs 0"), 0) << err();
  EXPECT_EQ(run("analyze --checkpoint run/model.ckpt --mode knn --chars U+E021 --out an"), 2);
  EXPECT_NE(err().find("k = 6"), std::string::npos) << err();
  EXPECT_EQ(run("analyze --checkpoint run/model.ckpt --mode knn --chars U+E021 --k 2 --out an"), 0) << err();
  EXPECT_EQ(line_count(work_ / "an/knn_U+E021.tsv"), 3u);
}

TEST_F(Cli, RenderDumpsGlyphs) {
  ASSERT_EQ(run("render --chars U+E021 --out g"), 0) << err();
  const auto img = ge::read_pgm((work_ / "g/U+E021.pgm").string());
  EXPECT_GT(img.ink_coverage(), 0.0);
  ASSERT_EQ(run("render --font " + (kData / "fonts/ipaexg.ttf").string() + " --chars 山 --out f"), 0) << err();
  const auto ink = ge::read_pgm((work_ / "f/U+5C71.pgm").string()).ink_coverage();
  EXPECT_GT(ink, 0.0);
  EXPECT_LT(ink, 0.8);
  EXPECT_EQ(run("render --font missing.ttf --chars 山"), 3);
  EXPECT_EQ(run("render --fixture-set nope --chars U+E021"), 2);
}

}  // namespace
