// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "glyphembed/error.hpp"
#include "glyphembed/utf8.hpp"

namespace glyphembed {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

char hex_digit(unsigned v) { return "0123456789ABCDEF"[v & 0xF]; }

std::string codepoint_label(char32_t cp) {
  std::string s = "U+";
  const int digits = cp > 0xFFFF ? 6 : 4;
  for (int i = digits - 1; i >= 0; --i) s.push_back(hex_digit(static_cast<unsigned>(cp >> (4 * i))));
  return s;
}

}  // namespace

DatasetBuild build_dataset(const CategoryGraph& graph, const Memberships& memberships, std::uint64_t seed) {
  DatasetBuild build;
  build.categories = graph.roots();

  Memberships kept;
  for (const auto& m : memberships) {
    if (is_special_title(m.first)) {
      ++build.dropped_special;
    } else {
      kept.push_back(m);
    }
  }
  const auto labeled = assign_labels_min_depth(graph, kept);
  build.dropped_unreachable = kept.size() - labeled.size();
  if (labeled.size() < 5) throw DataError("need at least 5 labeled titles to split, got " + std::to_string(labeled.size()));

  const auto splits = split_corpus(labeled.size(), seed);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    build.instances.push_back({utf8::decode(labeled[i].title), labeled[i].label, splits[i]});
  }
  build.train_frequencies = char_frequency_table(build.instances);
  return build;
}

void write_dataset(const DatasetBuild& build, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());

  for (Split split : {Split::train, Split::valid, Split::test}) {
    std::vector<Instance> part;
    for (const auto& inst : build.instances) {
      if (inst.split == split) part.push_back(inst);
    }
    auto out = open_output(root / (std::string(to_string(split)) + ".tsv"));
    write_corpus_tsv(out, part, build.categories);
  }

  {
    auto out = open_output(root / "splits.tsv");
    for (const auto& inst : build.instances) out << title_hash(utf8::encode(inst.title)) << '\t' << to_string(inst.split) << '\n';
  }

  {
    std::vector<std::pair<char32_t, std::uint64_t>> ranked(build.train_frequencies.counts().begin(),
                                                           build.train_frequencies.counts().end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    auto out = open_output(root / "freq.tsv");
    out << "rank\tchar\tcodepoint\tcount\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      out << i + 1 << '\t' << utf8::encode(ranked[i].first) << '\t' << codepoint_label(ranked[i].first) << '\t'
          << ranked[i].second << '\n';
    }
  }

  nlohmann::ordered_json summary;
  summary["instances"] = build.instances.size();
  summary["dropped_special_titles"] = build.dropped_special;
  summary["dropped_unreachable_titles"] = build.dropped_unreachable;
  std::vector<std::size_t> per_category(build.categories.size(), 0);
  std::array<std::size_t, 3> per_split{};
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& inst : build.instances) {
    ++per_category[inst.label];
    ++per_split[static_cast<std::size_t>(inst.split)];
    const auto len = static_cast<double>(inst.title.size());
    sum += len;
    sum_sq += len * len;
  }
  const double n = static_cast<double>(build.instances.size());
  const double mean = sum / n;
  const double sd = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1))) : 0.0;
  summary["splits"] = {{"train", per_split[0]}, {"valid", per_split[1]}, {"test", per_split[2]}};
  for (std::size_t c = 0; c < build.categories.size(); ++c) summary["per_category"][build.categories[c]] = per_category[c];
  summary["title_length"] = {{"mean", mean}, {"sd", sd}};
  summary["train_vocabulary"] = build.train_frequencies.distinct();
  summary["train_characters"] = build.train_frequencies.total();
  auto out = open_output(root / "summary.json");
  out << summary.dump(2) << '\n';
}

}  // namespace glyphembed
