// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glyphembed/analysis.hpp"
#include "glyphembed/checkpoint.hpp"
#include "glyphembed/corpus.hpp"
#include "glyphembed/dataset.hpp"
#include "glyphembed/error.hpp"
#include "glyphembed/fusion.hpp"
#include "glyphembed/glyph.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/run_config.hpp"
#include "glyphembed/utf8.hpp"

namespace glyphembed::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string cp_tag(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::vector<Instance> load_split(const fs::path& path, const std::vector<std::string>& categories, Split split) {
  auto instances = load_corpus_tsv(path.string(), categories);
  for (auto& i : instances) i.split = split;
  return instances;
}

std::shared_ptr<const GlyphProvider> provider_for(const RunConfig& cfg) {
  if (cfg.train.kind == ModelKind::lookup) return nullptr;
  return std::make_shared<const GlyphProvider>(cfg.glyph_source());
}

bool parse_hex_token(const std::string& token, char32_t& cp) {
  if (token.size() < 3 || (token[0] != 'U' && token[0] != 'u') || token[1] != '+') return false;
  std::uint32_t v = 0;
  for (std::size_t i = 2; i < token.size(); ++i) {
    const auto c = static_cast<unsigned char>(token[i]);
    if (!std::isxdigit(c) || i > 9) throw ConfigError("bad codepoint token '" + token + "'");
    v = v * 16 + static_cast<std::uint32_t>(std::isdigit(c) ? c - '0' : std::tolower(c) - 'a' + 10);
  }
  if (!utf8::is_scalar_value(v)) throw ConfigError("'" + token + "' is not a Unicode scalar value");
  cp = v;
  return true;
}

struct Row {
  std::string name;
  std::vector<EvalRecord> records;
  std::optional<std::pair<std::size_t, std::size_t>> routing;  // lookup, visual
};

ordered_json summarize(const Row& row, const fs::path& dir, const std::vector<std::string>& categories) {
  ordered_json j;
  j["name"] = row.name;
  j["instances"] = row.records.size();
  j["accuracy"] = accuracy(row.records);
  ordered_json table = ordered_json::object();
  for (std::size_t k : {100, 1000, 10000}) {
    if (k <= row.records.size()) table[std::to_string(k)] = k_rarest_accuracy(row.records, k);
  }
  j["k_rarest"] = table;
  if (row.routing) {
    j["routing"] = {{"lookup", row.routing->first}, {"visual", row.routing->second}};
  }
  {
    auto out = open_out(dir / (row.name + ".records.jsonl"));
    write_eval_records(out, row.records, categories);
  }
  {
    auto out = open_out(dir / (row.name + ".curve.tsv"));
    const auto curve = cumulative_rarity_curve(row.records);
    write_curve_tsv(out, curve);
  }
  return j;
}

}  // namespace

std::vector<char32_t> parse_char_list(const std::vector<std::string>& args, const std::optional<std::string>& file) {
  std::vector<std::string> chunks = args;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw DataError("cannot read " + *file);
    std::string line;
    while (std::getline(in, line)) chunks.push_back(line);
  }
  std::vector<char32_t> out;
  for (const auto& chunk : chunks) {
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      char32_t cp = 0;
      if (parse_hex_token(token, cp)) {
        out.push_back(cp);
      } else {
        for (char32_t c : utf8::decode(token)) out.push_back(c);
      }
      token.clear();
    };
    for (char ch : chunk) {
      if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        flush();
      } else {
        token.push_back(ch);
      }
    }
    flush();
  }
  if (out.empty()) throw ConfigError("no query characters given");
  return out;
}

int run_dataset(const DatasetOptions& o) {
  const auto roots = o.categories.empty() ? default_categories() : o.categories;
  const auto graph = CategoryGraph::load_tsv(o.graph, roots);
  const auto members = load_memberships_tsv(o.memberships, &graph);
  const auto build = build_dataset(graph, members, o.seed);
  write_dataset(build, o.out);

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& i : build.instances) ++counts[static_cast<std::size_t>(i.split)];
  std::cout << "kept " << build.instances.size() << " titles (dropped " << build.dropped_special << " special, "
            << build.dropped_unreachable << " unreachable)\n"
            << "split train/valid/test = " << counts[0] << "/" << counts[1] << "/" << counts[2] << "\n"
            << "training vocabulary " << build.train_frequencies.distinct() << " characters\n"
            << "wrote " << o.out << "\n";
  return kOk;
}

int run_train(const TrainOptions& o) {
  RunConfig cfg = o.config ? load_run_config(*o.config) : parse_run_config("{}");
  if (o.corpus_dir) cfg.corpus_dir = *o.corpus_dir;
  if (o.out) cfg.out_dir = *o.out;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.model) cfg.train.kind = parse_model_kind(*o.model);
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.seq_len) cfg.train.seq_len = *o.seq_len;
  if (o.d_c) cfg.train.d_c = *o.d_c;
  if (o.d_h) cfg.train.d_h = *o.d_h;
  if (o.eta) cfg.train.eta = *o.eta;
  if (o.chunk_size) cfg.train.chunk_size = *o.chunk_size;
  if (o.font) cfg.font = *o.font;
  if (o.pixel_size) cfg.pixel_size = *o.pixel_size;
  if (o.fixture_set) cfg.fixture_set = *o.fixture_set;
  if (!o.warm_start.empty()) cfg.warm_start = o.warm_start;
  cfg.validate();
  if (cfg.corpus_dir.empty()) throw ConfigError("corpus_dir is not set");
  if (cfg.train.chunk_size == 0) throw ConfigError("chunk_size must be positive");

  // Everything that can fail on configuration or input happens before the first epoch.
  const fs::path corpus(cfg.corpus_dir);
  const auto train = load_split(corpus / "train.tsv", cfg.categories, Split::train);
  std::vector<Instance> valid;
  if (fs::exists(corpus / "valid.tsv")) valid = load_split(corpus / "valid.tsv", cfg.categories, Split::valid);
  if (train.empty()) throw DataError("training split is empty");

  auto glyphs = provider_for(cfg);
  Model model(model_config(cfg.train), char_frequency_table(train), cfg.categories, glyphs, cfg.train.seed);
  for (const auto& path : cfg.warm_start) {
    auto source = load_checkpoint(path, glyphs);
    if (source.model.categories() != cfg.categories) {
      throw ConfigError("warm-start checkpoint " + path + " has different categories");
    }
    const std::size_t copied = model.copy_matching_params(source.model);
    std::cout << "warm start: " << copied << " tensors from " << path << "\n";
  }

  ensure_dir(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  {
    auto f = open_out(out / "config.json");
    f << dump_run_config(cfg);
  }
  auto log = open_out(out / "epochs.jsonl");
  const auto result = train_model(model, train, valid, cfg.train, [&](const EpochReport& r) {
    ordered_json j;
    j["epoch"] = r.epoch;
    j["mean_loss"] = r.mean_loss;
    j["train_accuracy"] = r.train_accuracy;
    j["valid_accuracy"] = r.valid_accuracy ? ordered_json(*r.valid_accuracy) : ordered_json(nullptr);
    log << j.dump() << '\n' << std::flush;
    std::cout << "epoch " << r.epoch << "  loss " << std::fixed << std::setprecision(4) << r.mean_loss
              << "  train " << r.train_accuracy;
    if (r.valid_accuracy) std::cout << "  valid " << *r.valid_accuracy;
    std::cout << std::defaultfloat << "\n";
  });

  save_checkpoint((out / "model.ckpt").string(), model, cfg.train);
  ordered_json summary;
  summary["model"] = std::string(to_string(cfg.train.kind));
  summary["epochs"] = result.epochs.size();
  summary["best_epoch"] = result.best_epoch;
  summary["best_valid_accuracy"] =
      result.best_valid_accuracy ? ordered_json(*result.best_valid_accuracy) : ordered_json(nullptr);
  summary["final_train_accuracy"] = evaluate_accuracy(model, train);
  summary["train_instances"] = train.size();
  summary["valid_instances"] = valid.size();
  {
    auto f = open_out(out / "train.json");
    f << summary.dump(2) << '\n';
  }
  std::cout << "best epoch " << result.best_epoch << ", checkpoint " << (out / "model.ckpt").string() << "\n";
  return kOk;
}

int run_eval(const EvalOptions& o) {
  if (o.checkpoints.empty() || o.checkpoints.size() > 2) throw ConfigError("eval takes one or two checkpoints");
  RunConfig cfg = o.config ? load_run_config(*o.config) : parse_run_config("{}");
  if (o.corpus_dir) cfg.corpus_dir = *o.corpus_dir;
  if (o.out) cfg.out_dir = *o.out;
  if (o.fusion) cfg.fusion = parse_fusion_kind(*o.fusion);
  if (o.threshold) cfg.threshold = *o.threshold;
  if (!(cfg.threshold >= 0.0)) throw ConfigError("threshold must be nonnegative");
  if (cfg.fusion != FusionKind::none && o.checkpoints.size() != 2) {
    throw ConfigError(std::string(to_string(cfg.fusion)) + " fusion needs two checkpoints");
  }

  std::vector<LoadedCheckpoint> loaded;
  for (const auto& path : o.checkpoints) loaded.push_back(load_checkpoint(path));
  const auto& categories = loaded.front().model.categories();
  for (const auto& l : loaded) {
    if (l.model.categories() != categories) throw ConfigError("checkpoints were trained on different categories");
  }
  if (loaded.size() == 2 && loaded[0].model.frequencies() != loaded[1].model.frequencies()) {
    throw ConfigError("checkpoints were trained on different training vocabularies");
  }

  fs::path data;
  if (o.data) {
    data = *o.data;
  } else {
    if (cfg.corpus_dir.empty()) throw ConfigError("give --data or a corpus directory");
    if (o.split != "test" && o.split != "valid" && o.split != "train") {
      throw ConfigError("unknown split '" + o.split + "'");
    }
    data = fs::path(cfg.corpus_dir) / (o.split + ".tsv");
  }
  const auto instances = load_split(data, categories, Split::test);
  if (instances.empty()) throw DataError(data.string() + " holds no instances");

  std::vector<Row> rows;
  std::vector<std::vector<ProbDist>> predictions;
  std::vector<std::u32string> titles;
  for (const auto& i : instances) titles.push_back(i.title);
  for (std::size_t m = 0; m < loaded.size(); ++m) {
    const Model& model = loaded[m].model;
    Row row;
    row.name = std::string(to_string(model.kind()));
    if (loaded.size() == 2 && loaded[0].model.kind() == loaded[1].model.kind()) row.name += "_" + std::to_string(m + 1);
    predictions.push_back(model.predict_all(titles));
    for (std::size_t i = 0; i < instances.size(); ++i) {
      row.records.push_back(make_record(instances[i].title, instances[i].label, predictions[m][i],
                                        avg_char_frequency(instances[i].title, model.frequencies())));
    }
    rows.push_back(std::move(row));
  }

  if (cfg.fusion == FusionKind::late) {
    Row row{"late", {}, std::nullopt};
    const auto& table = loaded[0].model.frequencies();
    for (std::size_t i = 0; i < instances.size(); ++i) {
      row.records.push_back(make_record(instances[i].title, instances[i].label,
                                        late_fuse_predict(predictions[0][i], predictions[1][i]),
                                        avg_char_frequency(instances[i].title, table)));
    }
    rows.push_back(std::move(row));
  } else if (cfg.fusion == FusionKind::fallback) {
    // The lookup side is the lookup-kind checkpoint when exactly one is; otherwise the first.
    std::size_t lk = 0;
    if (loaded[0].model.has_visual() && !loaded[1].model.has_visual()) lk = 1;
    const Model& lookup = loaded[lk].model;
    const Model& visual = loaded[1 - lk].model;
    if (!visual.has_visual()) throw ConfigError("fallback fusion needs a visual checkpoint");
    Row row{"fallback", {}, std::pair<std::size_t, std::size_t>{0, 0}};
    const FallbackPolicy policy{cfg.threshold};
    for (const auto& inst : instances) {
      auto r = fallback_predict(inst.title, lookup, visual, policy, lookup.frequencies());
      (r.route == Route::lookup ? row.routing->first : row.routing->second)++;
      row.records.push_back(make_record(inst.title, inst.label, std::move(r.probs), r.avg_frequency, r.route));
    }
    rows.push_back(std::move(row));
  }

  ensure_dir(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  ordered_json report;
  report["data"] = data.string();
  report["instances"] = instances.size();
  report["fusion"] = std::string(to_string(cfg.fusion));
  if (cfg.fusion == FusionKind::fallback) report["threshold"] = cfg.threshold;
  report["checkpoints"] = o.checkpoints;
  report["rows"] = ordered_json::array();
  for (const auto& row : rows) report["rows"].push_back(summarize(row, out, categories));
  {
    auto f = open_out(out / "report.json");
    f << report.dump(2) << '\n';
  }

  std::cout << std::left << std::setw(12) << "model" << std::setw(10) << "accuracy";
  for (std::size_t k : {100, 1000, 10000}) {
    if (k <= instances.size()) std::cout << std::setw(10) << ("k=" + std::to_string(k));
  }
  std::cout << "\n" << std::fixed << std::setprecision(4);
  for (const auto& j : report["rows"]) {
    std::cout << std::setw(12) << j["name"].get<std::string>() << std::setw(10) << j["accuracy"].get<double>();
    for (const auto& item : j["k_rarest"].items()) std::cout << std::setw(10) << item.value().get<double>();
    if (j.contains("routing")) {
      std::cout << "routed lookup " << j["routing"]["lookup"].get<std::size_t>() << ", visual "
                << j["routing"]["visual"].get<std::size_t>();
    }
    std::cout << "\n";
  }
  std::cout << std::defaultfloat << "wrote " << (out / "report.json").string() << "\n";
  return kOk;
}

int run_analyze(const AnalyzeOptions& o) {
  if (o.mode != "occlusion" && o.mode != "knn") throw ConfigError("unknown analysis mode '" + o.mode + "'");
  const auto queries = parse_char_list(o.chars, o.chars_file);
  auto loaded = load_checkpoint(o.checkpoint);
  const Model& model = loaded.model;
  if (o.mode == "occlusion" && !model.has_visual()) {
    throw ConfigError("occlusion analysis needs a visual or early checkpoint, got " +
                      std::string(to_string(model.kind())));
  }
  ensure_dir(o.out);
  const fs::path out(o.out);

  if (o.mode == "occlusion") {
    for (char32_t cp : queries) {
      const GlyphImage glyph = model.glyphs()->render(cp);
      const auto heatmap = occlusion_heatmap(model, glyph);
      const std::string stem = "occlusion_" + cp_tag(cp);
      write_pgm((out / (stem + ".pgm")).string(), heatmap.overlay);
      write_pgm((out / (stem + ".overlay.pgm")).string(), overlay_render(heatmap, glyph));
      auto side = open_out(out / (stem + ".json"));
      write_heatmap_sidecar(side, cp, heatmap);
      std::cout << cp_tag(cp) << " " << utf8::encode(cp) << std::fixed << std::setprecision(3)
                << "  TL " << heatmap.corners[top_left] << "  TR " << heatmap.corners[top_right] << "  BL "
                << heatmap.corners[bottom_left] << "  BR " << heatmap.corners[bottom_right] << std::defaultfloat
                << "\n";
    }
    return kOk;
  }

  const auto vocab = model.frequencies().chars();
  for (char32_t cp : queries) {
    const std::size_t candidates =
        vocab.size() - static_cast<std::size_t>(std::count(vocab.begin(), vocab.end(), cp));
    if (o.k == 0 || o.k > candidates) {
      throw ConfigError("k = " + std::to_string(o.k) + " but only " + std::to_string(candidates) +
                        " candidate characters exist besides " + cp_tag(cp));
    }
    const auto neighbors = knn_chars(model, vocab, cp, o.k);
    auto f = open_out(out / ("knn_" + cp_tag(cp) + ".tsv"));
    f << "rank\tchar\tcodepoint\tdistance\n";
    std::cout << cp_tag(cp) << " " << utf8::encode(cp) << ":";
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const auto& n = neighbors[i];
      f << (i + 1) << '\t' << utf8::encode(n.codepoint) << '\t' << cp_tag(n.codepoint) << '\t'
        << std::setprecision(17) << n.distance << '\n';
      std::cout << " " << utf8::encode(n.codepoint);
    }
    std::cout << "\n";
  }
  return kOk;
}

int run_render(const RenderOptions& o) {
  const auto chars = parse_char_list(o.chars, o.chars_file);
  GlyphSourceConfig source = ProceduralSource{o.fixture_set};
  if (o.font) source = FontSource{*o.font, o.pixel_size};
  const GlyphProvider provider(source);
  ensure_dir(o.out);
  for (char32_t cp : chars) {
    const auto img = provider.render(cp);
    const auto path = fs::path(o.out) / (cp_tag(cp) + ".pgm");
    write_pgm(path.string(), img);
    std::cout << cp_tag(cp) << " " << utf8::encode(cp) << "  ink " << std::fixed << std::setprecision(4)
              << img.ink_coverage() << std::defaultfloat << "  " << path.string() << "\n";
  }
  return kOk;
}

}  // namespace glyphembed::cli
