// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "glyphembed/corpus.hpp"
#include "glyphembed/dataset.hpp"
#include "glyphembed/error.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/synthetic.hpp"
#include "glyphembed/utf8.hpp"
#include "support/oracles.hpp"

namespace {

namespace ge = glyphembed;
namespace fs = std::filesystem;
const std::string kData = GLYPHEMBED_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Categories, DefaultTwelve) {
  const auto& c = ge::default_categories();
  ASSERT_EQ(c.size(), 12u);
  EXPECT_EQ(c.front(), "Geography");
  EXPECT_EQ(c[6], "Medical/Health Science");
  EXPECT_EQ(c.back(), "Electronics");
}

TEST(MinDepth, DirectChildOfRoot) {
  ge::CategoryGraph g({"A", "B"});
  g.add_edge("A", "x");
  g.add_edge("B", "y");
  const ge::Memberships m = {{"t1", {"x"}}, {"t2", {"y"}}, {"t3", {"B"}}};
  const auto labels = ge::assign_labels_min_depth(g, m);
  ASSERT_EQ(labels.size(), 3u);
  EXPECT_EQ(labels[0].label, 0u);
  EXPECT_EQ(labels[0].depth, 2u);
  EXPECT_EQ(labels[1].label, 1u);
  EXPECT_EQ(labels[2].depth, 1u);
}

TEST(MinDepth, TwoStepsFromSportsBeatsThreeFromArts) {
  const auto graph = ge::CategoryGraph::load_tsv(kData + "/toy_graph.tsv", ge::default_categories());
  const ge::Memberships m = {{"舞球", {"Dance", "Ball games"}}};
  const auto labels = ge::assign_labels_min_depth(graph, m);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(ge::default_categories()[labels[0].label], "Sports");
  EXPECT_EQ(labels[0].depth, 2u);
}

TEST(MinDepth, TiesGoToEarlierRootAndCyclesTerminate) {
  ge::CategoryGraph g({"A", "B"});
  g.add_edge("A", "x");
  g.add_edge("B", "y");
  g.add_edge("x", "A");  // cycle
  g.add_edge("y", "x");
  const ge::Memberships m = {{"both", {"x", "y"}}, {"only-y-child", {"x"}}};
  const auto labels = ge::assign_labels_min_depth(g, m);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0].label, 0u);
  EXPECT_EQ(labels[0].depth, 2u);
}

TEST(MinDepth, UnreachableDroppedUnknownRejected) {
  ge::CategoryGraph g({"A"});
  g.add_edge("A", "x");
  g.add_edge("island", "z");
  const auto labels = ge::assign_labels_min_depth(g, {{"lost", {"z"}}, {"kept", {"x"}}});
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].title, "kept");
  EXPECT_THROW(ge::assign_labels_min_depth(g, {{"bad", {"nowhere"}}}), ge::DataError);
}

TEST(MinDepth, MatchesAllPairsShortestPaths) {
  ge::CounterRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<std::string> roots = {"R0", "R1", "R2"};
    std::vector<std::string> nodes = roots;
    for (int i = 0; i < 47; ++i) nodes.push_back("n" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> edges;
    ge::CategoryGraph g(roots);
    // Edges only go from lower to higher index, so the graph is a DAG.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = std::max<std::size_t>(i + 1, 3); j < nodes.size(); ++j) {
        if (rng.uniform() < 0.06) {
          edges.emplace_back(nodes[i], nodes[j]);
          g.add_edge(nodes[i], nodes[j]);
        }
      }
    }
    ge::Memberships m;
    for (int a = 0; a < 40; ++a) {
      std::vector<std::string> cats;
      for (std::size_t k = 0, n = 1 + rng.below(3); k < n; ++k) cats.push_back(nodes[3 + rng.below(47)]);
      m.emplace_back("article" + std::to_string(a), cats);
    }
    // Make sure every member category exists in the graph.
    for (const auto& n : nodes) {
      if (!g.contains(n)) {
        edges.emplace_back(n, n + "-leaf");
        g.add_edge(n, n + "-leaf");
      }
    }
    const auto want = oracle::min_depth_labels(edges, roots, m);
    const auto got = ge::assign_labels_min_depth(g, m);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& a : got) {
      const auto& w = want.at(a.title);
      ASSERT_EQ(a.label, w.first) << a.title;
      ASSERT_EQ(a.depth, w.second) << a.title;
    }
  }
}

TEST(CategoryGraph, LoadErrorsNameTheLine) {
  std::istringstream bad("A\tB\nno-tab-here\n");
  try {
    ge::CategoryGraph::load_tsv(bad, {"A"});
    FAIL() << "expected DataError";
  } catch (const ge::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream ok("\nA\tB\n");
  const auto g = ge::CategoryGraph::load_tsv(ok, {"A"});
  EXPECT_TRUE(g.contains("B"));
}

TEST(Memberships, AccumulateAndValidate) {
  std::istringstream in("t1\tA\nt2\tB\nt1\tB\n");
  const auto m = ge::load_memberships_tsv(in);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].second, (std::vector<std::string>{"A", "B"}));

  ge::CategoryGraph g({"A"});
  g.add_edge("A", "B");
  std::istringstream bad("t1\tA\nt2\tC\n");
  try {
    ge::load_memberships_tsv(bad, &g);
    FAIL() << "expected DataError";
  } catch (const ge::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(FilterTitles, ColonTitlesDropped) {
  EXPECT_TRUE(ge::is_special_title("title:agriculture"));
  EXPECT_FALSE(ge::is_special_title("economics"));
  EXPECT_TRUE(ge::is_special_title(":"));
  const auto kept = ge::filter_titles({"a", "b:c", "d", "Category:x", "e"});
  EXPECT_EQ(kept, (std::vector<std::string>{"a", "d", "e"}));
}

TEST(Split, SixTwoTwoArithmetic) {
  auto check = [](std::size_t n, std::size_t tr, std::size_t va, std::size_t te) {
    const auto s = ge::split_sizes(n);
    EXPECT_EQ(s.train, tr) << n;
    EXPECT_EQ(s.valid, va) << n;
    EXPECT_EQ(s.test, te) << n;
    const auto a = ge::split_corpus(n, 5);
    std::size_t counts[3] = {0, 0, 0};
    for (auto x : a) ++counts[static_cast<int>(x)];
    EXPECT_EQ(counts[0], tr);
    EXPECT_EQ(counts[1], va);
    EXPECT_EQ(counts[2], te);
  };
  check(10, 6, 2, 2);
  check(11, 7, 2, 2);
  check(14, 10, 2, 2);
  check(15, 9, 3, 3);
  check(1000, 600, 200, 200);
  EXPECT_THROW(ge::split_corpus(4, 1), ge::ContractViolation);
}

TEST(Split, DeterministicPerSeed) {
  EXPECT_EQ(ge::split_corpus(50, 3), ge::split_corpus(50, 3));
  EXPECT_NE(ge::split_corpus(50, 3), ge::split_corpus(50, 4));
}

TEST(FrequencyTable, Counts) {
  const std::vector<std::u32string> titles = {U"ab", U"ab"};
  const auto t = ge::FrequencyTable::from_titles(titles);
  EXPECT_EQ(t.count(U'a'), 2u);
  EXPECT_EQ(t.count(U'b'), 2u);
  EXPECT_EQ(t.count(U'c'), 0u);
  EXPECT_EQ(t.total(), 4u);
  EXPECT_EQ(t.distinct(), 2u);
  EXPECT_THROW(ge::FrequencyTable::from_titles({}), ge::DataError);
  const std::vector<std::u32string> blank = {U""};
  EXPECT_THROW(ge::FrequencyTable::from_titles(blank), ge::DataError);
}

TEST(FrequencyTable, OnlyTrainSplitCounts) {
  const auto corpus = ge::synthetic::radical_corpus({});
  const auto table = ge::char_frequency_table(corpus.instances);
  std::map<char32_t, std::uint64_t> recount;
  for (const auto& i : corpus.instances) {
    if (i.split != ge::Split::train) continue;
    for (char32_t c : i.title) ++recount[c];
  }
  EXPECT_EQ(table.counts(), recount);
}

TEST(CorpusTsv, LoadRoundTripAndErrors) {
  const auto& cats = ge::default_categories();
  std::istringstream three("長江\tGeography\n足球\tSports\n芭蕾\tArts\n");
  const auto loaded = ge::load_corpus_tsv(three, cats);
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[1].title, U"足球");
  EXPECT_EQ(loaded[1].label, 1u);

  std::istringstream bad("長江\tGeography\n足球\tSpotrs\n");
  try {
    ge::load_corpus_tsv(bad, cats);
    FAIL() << "expected DataError";
  } catch (const ge::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }

  const auto corpus = ge::synthetic::overfit_fixture();
  std::stringstream s;
  ge::write_corpus_tsv(s, corpus.instances, corpus.categories);
  const auto back = ge::load_corpus_tsv(s, corpus.categories);
  EXPECT_EQ(back, corpus.instances);
}

TEST(CorpusTsv, CommittedOverfitFixtureIsCurrent) {
  const auto corpus = ge::synthetic::overfit_fixture();
  std::ostringstream s;
  ge::write_corpus_tsv(s, corpus.instances, corpus.categories);
  EXPECT_EQ(s.str(), slurp(kData + "/overfit64.tsv"));
  EXPECT_EQ(corpus.instances.size(), 64u);
}

TEST(Utf8, RoundTripAndMalformedInput) {
  const std::string text = "漢字 ascii \xF0\x9F\x98\x80";
  EXPECT_EQ(ge::utf8::encode(ge::utf8::decode(text)), text);
  EXPECT_THROW(ge::utf8::decode("\xC3"), ge::DataError);
  EXPECT_THROW(ge::utf8::decode("\xED\xA0\x80"), ge::DataError);  // surrogate
  EXPECT_THROW(ge::utf8::decode("\xC0\x80"), ge::DataError);      // overlong
}

TEST(Dataset, ToyGraphBuild) {
  const auto graph = ge::CategoryGraph::load_tsv(kData + "/toy_graph.tsv", ge::default_categories());
  const auto members = ge::load_memberships_tsv(kData + "/toy_memberships.tsv", &graph);
  const auto build = ge::build_dataset(graph, members, 1);
  EXPECT_EQ(build.dropped_special, 2u);
  EXPECT_EQ(build.dropped_unreachable, 1u);
  ASSERT_EQ(build.instances.size(), 23u);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& i : build.instances) ++counts[static_cast<int>(i.split)];
  EXPECT_EQ(counts[0], 15u);
  EXPECT_EQ(counts[1], 4u);
  EXPECT_EQ(counts[2], 4u);
  EXPECT_EQ(build.instances[0].title, U"舞球");
  EXPECT_EQ(build.categories[build.instances[0].label], "Sports");
  for (const auto& i : build.instances) EXPECT_EQ(ge::utf8::encode(i.title).find(':'), std::string::npos);
}

TEST(Dataset, WrittenFilesAreByteIdenticalAcrossRuns) {
  const auto graph = ge::CategoryGraph::load_tsv(kData + "/toy_graph.tsv", ge::default_categories());
  const auto members = ge::load_memberships_tsv(kData + "/toy_memberships.tsv", &graph);
  const fs::path root = fs::temp_directory_path() / "glyphembed_dataset_test";
  fs::remove_all(root);
  ge::write_dataset(ge::build_dataset(graph, members, 4), (root / "a").string());
  ge::write_dataset(ge::build_dataset(graph, members, 4), (root / "b").string());
  for (const char* f : {"train.tsv", "valid.tsv", "test.tsv", "splits.tsv", "freq.tsv", "summary.json"}) {
    const auto a = slurp(root / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(root / "b" / f)) << f;
  }
  fs::remove_all(root);
}

TEST(Synthetic, RadicalCorpusHoldsOutTestCharacters) {
  const ge::synthetic::RadicalCorpusOptions o;
  const auto corpus = ge::synthetic::radical_corpus(o);
  std::set<char32_t> seen;
  std::size_t test = 0;
  for (const auto& i : corpus.instances) {
    if (i.split != ge::Split::test) seen.insert(i.title.begin(), i.title.end());
  }
  for (const auto& i : corpus.instances) {
    if (i.split != ge::Split::test) continue;
    ++test;
    for (char32_t c : i.title) ASSERT_FALSE(seen.contains(c));
  }
  EXPECT_EQ(test, 12 * 2 * o.test_titles_per_cell);
}

}  // namespace
