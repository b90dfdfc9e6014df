// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace glyphembed::cli {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfigError = 2,
  kDataError = 3,
  kContractViolation = 4,
};

struct DatasetOptions {
  std::string graph;
  std::string memberships;
  std::string out = "data";
  std::uint64_t seed = 1;
  std::vector<std::string> categories;  // empty = the default twelve
};

// Optional fields override the config file (or the built-in defaults).
struct TrainOptions {
  std::optional<std::string> config;
  std::optional<std::string> corpus_dir;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> seq_len;
  std::optional<std::size_t> d_c;
  std::optional<std::size_t> d_h;
  std::optional<double> eta;
  std::optional<std::size_t> chunk_size;
  std::optional<std::string> font;
  std::optional<int> pixel_size;
  std::optional<std::string> fixture_set;
  std::vector<std::string> warm_start;
};

struct EvalOptions {
  std::vector<std::string> checkpoints;
  std::optional<std::string> config;
  std::optional<std::string> corpus_dir;
  std::optional<std::string> data;  // explicit TSV, overrides corpus_dir + split
  std::string split = "test";
  std::optional<std::string> out;
  std::optional<std::string> fusion;
  std::optional<double> threshold;
};

struct AnalyzeOptions {
  std::string checkpoint;
  std::string mode;
  std::vector<std::string> chars;
  std::optional<std::string> chars_file;
  std::size_t k = 6;
  std::string out = "analysis";
};

struct RenderOptions {
  std::vector<std::string> chars;
  std::optional<std::string> chars_file;
  std::optional<std::string> font;
  int pixel_size = 36;
  std::string fixture_set = "radicals";
  std::string out = "glyphs";
};

/// Query characters: literal UTF-8 text, or U+XXXX tokens. Commas and whitespace separate.
std::vector<char32_t> parse_char_list(const std::vector<std::string>& args, const std::optional<std::string>& file);

int run_dataset(const DatasetOptions& o);
int run_train(const TrainOptions& o);
int run_eval(const EvalOptions& o);
int run_analyze(const AnalyzeOptions& o);
int run_render(const RenderOptions& o);

}  // namespace glyphembed::cli
