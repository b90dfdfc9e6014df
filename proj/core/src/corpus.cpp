// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "glyphembed/error.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/utf8.hpp"

namespace glyphembed {
namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

// Splits a TSV line into exactly two non-empty fields; strips a trailing CR.
bool split_pair(std::string line, std::string& left, std::string& right) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) return false;
  left = line.substr(0, tab);
  right = line.substr(tab + 1);
  return !left.empty() && !right.empty();
}

bool blank_line(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r' || c == '\t'; });
}

}  // namespace

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> names = {
      "Geography", "Sports", "Arts", "Military", "Economics", "Transportation", "Medical/Health Science",
      "Education", "Food and Culture", "Religion and Belief", "Agriculture", "Electronics"};
  return names;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

CategoryGraph::CategoryGraph(std::vector<std::string> roots) : roots_(std::move(roots)) {
  for (const auto& r : roots_) children_.try_emplace(r);
}

void CategoryGraph::add_edge(const std::string& parent, const std::string& child) {
  children_[parent].push_back(child);
  children_.try_emplace(child);
}

std::unordered_map<std::string, std::size_t> CategoryGraph::depths_from(std::size_t root_index) const {
  GLYPHEMBED_EXPECT(root_index < roots_.size(), "root index out of range");
  std::unordered_map<std::string, std::size_t> depth;
  std::deque<const std::string*> queue;
  depth.emplace(roots_[root_index], 0);
  queue.push_back(&roots_[root_index]);
  while (!queue.empty()) {
    const std::string& current = *queue.front();
    queue.pop_front();
    const std::size_t d = depth.at(current);
    auto it = children_.find(current);
    if (it == children_.end()) continue;
    // Children visited in name order so the traversal does not depend on edge-file order.
    std::vector<const std::string*> next;
    for (const auto& child : it->second) next.push_back(&child);
    std::sort(next.begin(), next.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* child : next) {
      if (depth.try_emplace(*child, d + 1).second) queue.push_back(&children_.find(*child)->first);
    }
  }
  return depth;
}

CategoryGraph CategoryGraph::load_tsv(std::istream& in, std::vector<std::string> roots) {
  CategoryGraph graph(std::move(roots));
  std::string line, parent, child;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    if (!split_pair(line, parent, child)) {
      throw DataError("category graph line " + std::to_string(line_no) + ": expected 'parent<TAB>child'");
    }
    graph.add_edge(parent, child);
  }
  return graph;
}

CategoryGraph CategoryGraph::load_tsv(const std::string& path, std::vector<std::string> roots) {
  auto in = open_input(path);
  return load_tsv(in, std::move(roots));
}

Memberships load_memberships_tsv(std::istream& in, const CategoryGraph* graph) {
  Memberships out;
  std::unordered_map<std::string, std::size_t> position;
  std::string line, article, category;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    if (!split_pair(line, article, category)) {
      throw DataError("membership line " + std::to_string(line_no) + ": expected 'article<TAB>category'");
    }
    if (graph != nullptr && !graph->contains(category)) {
      throw DataError("membership line " + std::to_string(line_no) + ": unknown category '" + category + "'");
    }
    auto [it, inserted] = position.try_emplace(article, out.size());
    if (inserted) out.emplace_back(article, std::vector<std::string>{});
    out[it->second].second.push_back(category);
  }
  return out;
}

Memberships load_memberships_tsv(const std::string& path, const CategoryGraph* graph) {
  auto in = open_input(path);
  return load_memberships_tsv(in, graph);
}

std::vector<LabeledArticle> assign_labels_min_depth(const CategoryGraph& graph, const Memberships& memberships) {
  std::set<std::string> unknown;
  for (const auto& [article, categories] : memberships) {
    for (const auto& c : categories) {
      if (!graph.contains(c)) unknown.insert(c);
    }
  }
  if (!unknown.empty()) {
    std::string names;
    for (const auto& u : unknown) names += (names.empty() ? "" : ", ") + u;
    throw DataError("memberships reference unknown categories: " + names);
  }

  std::vector<std::unordered_map<std::string, std::size_t>> depth_by_root;
  for (std::size_t r = 0; r < graph.roots().size(); ++r) depth_by_root.push_back(graph.depths_from(r));

  std::vector<LabeledArticle> out;
  for (const auto& [article, categories] : memberships) {
    std::size_t best_root = graph.roots().size();
    std::size_t best_depth = SIZE_MAX;
    for (std::size_t r = 0; r < depth_by_root.size(); ++r) {
      std::size_t closest = SIZE_MAX;
      for (const auto& c : categories) {
        if (auto it = depth_by_root[r].find(c); it != depth_by_root[r].end()) closest = std::min(closest, it->second);
      }
      if (closest == SIZE_MAX) continue;
      if (closest + 1 < best_depth) {
        best_depth = closest + 1;
        best_root = r;
      }
    }
    if (best_root < graph.roots().size()) out.push_back({article, best_root, best_depth});
  }
  return out;
}

bool is_special_title(std::string_view title) { return title.find(':') != std::string_view::npos; }

std::vector<std::string> filter_titles(std::vector<std::string> titles) {
  std::erase_if(titles, [](const std::string& t) { return is_special_title(t); });
  return titles;
}

SplitSizes split_sizes(std::size_t count) {
  SplitSizes s;
  s.valid = count * 2 / 10;
  s.test = count * 2 / 10;
  s.train = count - s.valid - s.test;
  return s;
}

std::vector<Split> split_corpus(std::size_t count, std::uint64_t seed) {
  GLYPHEMBED_EXPECT(count >= 5, "splitting needs at least 5 instances");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  CounterRng rng = CounterRng(seed).split(0x73706c6974ULL);
  rng.shuffle(order);
  const SplitSizes sizes = split_sizes(count);
  std::vector<Split> out(count, Split::train);
  for (std::size_t k = 0; k < count; ++k) {
    if (k < sizes.train) {
      out[order[k]] = Split::train;
    } else if (k < sizes.train + sizes.valid) {
      out[order[k]] = Split::valid;
    } else {
      out[order[k]] = Split::test;
    }
  }
  return out;
}

FrequencyTable::FrequencyTable(std::map<char32_t, std::uint64_t> counts) : counts_(std::move(counts)) {
  for (const auto& [cp, n] : counts_) {
    GLYPHEMBED_EXPECT(n >= 1, "frequency table entries must be positive");
    total_ += n;
  }
}

FrequencyTable FrequencyTable::from_titles(std::span<const std::u32string> titles) {
  std::map<char32_t, std::uint64_t> counts;
  for (const auto& t : titles) {
    for (char32_t cp : t) ++counts[cp];
  }
  if (counts.empty()) throw DataError("cannot build a frequency table from an empty training split");
  return FrequencyTable(std::move(counts));
}

std::uint64_t FrequencyTable::count(char32_t codepoint) const {
  auto it = counts_.find(codepoint);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<char32_t> FrequencyTable::chars() const {
  std::vector<char32_t> out;
  out.reserve(counts_.size());
  for (const auto& [cp, n] : counts_) out.push_back(cp);
  return out;
}

FrequencyTable char_frequency_table(std::span<const Instance> instances) {
  std::vector<std::u32string> titles;
  for (const auto& inst : instances) {
    if (inst.split == Split::train) titles.push_back(inst.title);
  }
  return FrequencyTable::from_titles(titles);
}

std::vector<Instance> load_corpus_tsv(std::istream& in, const std::vector<std::string>& categories) {
  std::unordered_map<std::string, std::size_t> label_of;
  for (std::size_t i = 0; i < categories.size(); ++i) label_of.emplace(categories[i], i);

  std::vector<Instance> out;
  std::string line, title, category;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    const std::string where = "corpus line " + std::to_string(line_no);
    if (!split_pair(line, title, category)) throw DataError(where + ": expected 'title<TAB>category' with a nonempty title");
    auto it = label_of.find(category);
    if (it == label_of.end()) throw DataError(where + ": unknown category '" + category + "'");
    std::u32string decoded;
    try {
      decoded = utf8::decode(title);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(Instance{std::move(decoded), it->second, Split::train});
  }
  return out;
}

std::vector<Instance> load_corpus_tsv(const std::string& path, const std::vector<std::string>& categories) {
  auto in = open_input(path);
  return load_corpus_tsv(in, categories);
}

void write_corpus_tsv(std::ostream& out, std::span<const Instance> instances, const std::vector<std::string>& categories) {
  for (const auto& inst : instances) {
    GLYPHEMBED_EXPECT(inst.label < categories.size(), "instance label out of range");
    GLYPHEMBED_EXPECT(!inst.title.empty(), "cannot write an empty title");
    out << utf8::encode(inst.title) << '\t' << categories[inst.label] << '\n';
  }
}

void write_corpus_tsv(const std::string& path, std::span<const Instance> instances,
                      const std::vector<std::string>& categories) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_corpus_tsv(out, instances, categories);
}

std::string title_hash(std::string_view utf8_title) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : utf8_title) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace glyphembed
