// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace glyphembed {

/// The twelve main categories, in tie-break priority order.
const std::vector<std::string>& default_categories();

enum class Split { train, valid, test };
std::string_view to_string(Split split);

struct Instance {
  std::u32string title;
  std::size_t label = 0;
  Split split = Split::train;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Category hierarchy with designated roots. Cycles are allowed.
class CategoryGraph {
 public:
  explicit CategoryGraph(std::vector<std::string> roots);

  void add_edge(const std::string& parent, const std::string& child);
  bool contains(std::string_view name) const { return children_.contains(std::string(name)); }
  const std::vector<std::string>& roots() const { return roots_; }
  std::size_t node_count() const { return children_.size(); }

  /// BFS depth of every category reachable from root `root_index` (the root itself is 0).
  std::unordered_map<std::string, std::size_t> depths_from(std::size_t root_index) const;

  /// `parent<TAB>child` per line. Throws DataError with the line number on malformed lines.
  static CategoryGraph load_tsv(std::istream& in, std::vector<std::string> roots);
  static CategoryGraph load_tsv(const std::string& path, std::vector<std::string> roots);

 private:
  std::vector<std::string> roots_;
  std::map<std::string, std::vector<std::string>> children_;
};

/// Article title → member categories, in first-appearance order of the articles.
using Memberships = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// `article<TAB>category` per line; repeated articles accumulate categories. With a graph,
/// categories missing from it are rejected with the line number.
Memberships load_memberships_tsv(std::istream& in, const CategoryGraph* graph = nullptr);
Memberships load_memberships_tsv(const std::string& path, const CategoryGraph* graph = nullptr);

struct LabeledArticle {
  std::string title;
  std::size_t label = 0;
  /// 1 + BFS depth of the closest member category from the winning root.
  std::size_t depth = 0;
};

/// Labels each article with the root minimizing its depth; ties go to the earlier root.
/// Articles reachable from no root are dropped. Throws DataError listing unknown categories.
std::vector<LabeledArticle> assign_labels_min_depth(const CategoryGraph& graph, const Memberships& memberships);

/// True for titles matching `.*:.*`.
bool is_special_title(std::string_view title);
std::vector<std::string> filter_titles(std::vector<std::string> titles);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

/// 6:2:2 with floor for valid/test and the remainder going to train.
SplitSizes split_sizes(std::size_t count);

/// Split assignment per instance index. Requires at least 5 instances.
std::vector<Split> split_corpus(std::size_t count, std::uint64_t seed);

/// Character occurrence counts over training titles.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::map<char32_t, std::uint64_t> counts);

  /// Throws DataError when there are no titles or no characters.
  static FrequencyTable from_titles(std::span<const std::u32string> titles);

  std::uint64_t count(char32_t codepoint) const;
  bool contains(char32_t codepoint) const { return counts_.contains(codepoint); }
  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  const std::map<char32_t, std::uint64_t>& counts() const { return counts_; }
  std::vector<char32_t> chars() const;

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;

 private:
  std::map<char32_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Frequency table over the train-split instances of `instances`.
FrequencyTable char_frequency_table(std::span<const Instance> instances);

/// `title<TAB>category-name` lines; split is left as train. Errors name the offending line.
std::vector<Instance> load_corpus_tsv(std::istream& in, const std::vector<std::string>& categories);
std::vector<Instance> load_corpus_tsv(const std::string& path, const std::vector<std::string>& categories);
void write_corpus_tsv(std::ostream& out, std::span<const Instance> instances, const std::vector<std::string>& categories);
void write_corpus_tsv(const std::string& path, std::span<const Instance> instances,
                      const std::vector<std::string>& categories);

/// 16 hex digits of FNV-1a over the UTF-8 title; used in split manifests.
std::string title_hash(std::string_view utf8_title);

}  // namespace glyphembed
