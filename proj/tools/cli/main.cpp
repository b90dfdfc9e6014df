// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "glyphembed/error.hpp"

namespace ge = glyphembed;
namespace cli = glyphembed::cli;

int main(int argc, char** argv) {
  CLI::App app{"glyphembed: glyph-based character embeddings for short-title classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "glyphembed 0.1.0");

  cli::DatasetOptions ds;
  auto* dataset = app.add_subcommand("dataset", "Filter, label and split a category graph into corpus files");
  dataset->add_option("--graph", ds.graph, "parent<TAB>child category edges")->required();
  dataset->add_option("--memberships", ds.memberships, "article<TAB>category lines")->required();
  dataset->add_option("--out", ds.out, "Output directory")->capture_default_str();
  dataset->add_option("--seed", ds.seed, "Split seed")->capture_default_str();
  dataset->add_option("--categories", ds.categories, "Root categories (default: the twelve main ones)")
      ->delimiter(',');

  cli::TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train a model and write the best-validation checkpoint");
  train->add_option("--config", tr.config, "JSON run config");
  train->add_option("--corpus", tr.corpus_dir, "Directory with train.tsv and valid.tsv");
  train->add_option("--out", tr.out, "Output directory");
  train->add_option("--seed", tr.seed);
  train->add_option("--model", tr.model)->check(CLI::IsMember({"lookup", "visual", "early"}));
  train->add_option("--epochs", tr.epochs);
  train->add_option("--batch-size", tr.batch_size);
  train->add_option("--seq-len", tr.seq_len);
  train->add_option("--d-c", tr.d_c);
  train->add_option("--d-h", tr.d_h);
  train->add_option("--eta", tr.eta);
  train->add_option("--chunk-size", tr.chunk_size);
  train->add_option("--font", tr.font, "TrueType/OpenType font for glyph rendering");
  train->add_option("--pixel-size", tr.pixel_size);
  train->add_option("--fixture-set", tr.fixture_set, "Procedural glyph set when no font is given");
  train->add_option("--warm-start", tr.warm_start, "Checkpoint(s) to copy matching parameters from");

  cli::EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Accuracy, k-rarest table and rarity curve for one or two checkpoints");
  eval->add_option("--checkpoint", ev.checkpoints, "One checkpoint, or two for fusion")->required();
  eval->add_option("--config", ev.config, "JSON run config");
  eval->add_option("--corpus", ev.corpus_dir, "Corpus directory");
  eval->add_option("--split", ev.split, "Split file to evaluate in the corpus directory")->capture_default_str();
  eval->add_option("--data", ev.data, "Explicit title<TAB>category file");
  eval->add_option("--out", ev.out, "Output directory");
  eval->add_option("--fusion", ev.fusion)->check(CLI::IsMember({"none", "late", "fallback"}));
  eval->add_option("--threshold", ev.threshold, "Fallback average-frequency threshold");

  cli::AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Occlusion heatmaps or nearest neighbours per query character");
  analyze->add_option("--checkpoint", an.checkpoint)->required();
  analyze->add_option("--mode", an.mode)->required()->check(CLI::IsMember({"occlusion", "knn"}));
  analyze->add_option("--chars", an.chars, "Query characters (text or U+XXXX)");
  analyze->add_option("--chars-file", an.chars_file);
  analyze->add_option("--k", an.k, "Neighbours per query")->capture_default_str();
  analyze->add_option("--out", an.out)->capture_default_str();

  cli::RenderOptions rd;
  auto* render = app.add_subcommand("render", "Dump rendered glyphs as PGM files");
  render->add_option("--chars", rd.chars, "Characters (text or U+XXXX)");
  render->add_option("--chars-file", rd.chars_file);
  render->add_option("--font", rd.font);
  render->add_option("--pixel-size", rd.pixel_size)->capture_default_str();
  render->add_option("--fixture-set", rd.fixture_set)->capture_default_str();
  render->add_option("--out", rd.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (*dataset) return cli::run_dataset(ds);
    if (*train) return cli::run_train(tr);
    if (*eval) return cli::run_eval(ev);
    if (*analyze) return cli::run_analyze(an);
    if (*render) return cli::run_render(rd);
  } catch (const ge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const ge::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return cli::kDataError;
  } catch (const ge::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return cli::kContractViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUnexpected;
  }
  return cli::kUnexpected;
}
