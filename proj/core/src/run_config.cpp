// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "glyphembed/corpus.hpp"
#include "glyphembed/error.hpp"
#include <nlohmann/json.hpp>

namespace glyphembed {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "batch_size", "seq_len",     "d_c",        "d_h",    "eta",       "epochs",     "seed",
      "model",      "chunk_size",  "corpus_dir", "out",    "font",      "pixel_size", "fixture_set",
      "fusion",     "threshold",   "categories", "warm_start"};
  return keys;
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_count(const json& j, const char* key, std::size_t& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  dst = v.get<std::size_t>();
}

}  // namespace

std::string_view to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::none: return "none";
    case FusionKind::late: return "late";
    case FusionKind::fallback: return "fallback";
  }
  return "?";
}

FusionKind parse_fusion_kind(std::string_view name) {
  if (name == "none") return FusionKind::none;
  if (name == "late") return FusionKind::late;
  if (name == "fallback") return FusionKind::fallback;
  throw ConfigError("unknown fusion kind '" + std::string(name) + "' (expected none, late or fallback)");
}

GlyphSourceConfig RunConfig::glyph_source() const {
  if (!font.empty()) return FontSource{font, pixel_size};
  return ProceduralSource{fixture_set};
}

void RunConfig::validate() const {
  if (train.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (train.seq_len == 0) throw ConfigError("seq_len must be positive");
  if (train.d_c == 0 || train.d_h == 0) throw ConfigError("d_c and d_h must be positive");
  if (!(train.eta >= 0.0)) throw ConfigError("eta must be nonnegative");
  if (train.kind != ModelKind::lookup && train.d_c != kVisualEmbeddingWidth) {
    throw ConfigError("visual and early models require d_c = " + std::to_string(kVisualEmbeddingWidth));
  }
  if (pixel_size <= 0) throw ConfigError("pixel_size must be positive");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be nonnegative");
  if (categories.size() < 2) throw ConfigError("at least 2 categories are required");
  std::set<std::string> seen;
  for (const auto& c : categories) {
    if (c.empty() || !seen.insert(c).second) throw ConfigError("category names must be nonempty and distinct");
  }
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }

  RunConfig c;
  c.categories = default_categories();
  read_count(j, "batch_size", c.train.batch_size);
  read_count(j, "seq_len", c.train.seq_len);
  read_count(j, "d_c", c.train.d_c);
  read_count(j, "d_h", c.train.d_h);
  read_count(j, "epochs", c.train.epochs);
  read_count(j, "chunk_size", c.train.chunk_size);
  read(j, "eta", c.train.eta);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config key 'seed' must be a nonnegative integer");
    c.train.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("model")) {
    std::string name;
    read(j, "model", name);
    c.train.kind = parse_model_kind(name);
  }
  if (j.contains("fusion")) {
    std::string name;
    read(j, "fusion", name);
    c.fusion = parse_fusion_kind(name);
  }
  read(j, "corpus_dir", c.corpus_dir);
  read(j, "out", c.out_dir);
  read(j, "font", c.font);
  read(j, "pixel_size", c.pixel_size);
  read(j, "fixture_set", c.fixture_set);
  read(j, "threshold", c.threshold);
  read(j, "categories", c.categories);
  read(j, "warm_start", c.warm_start);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["batch_size"] = c.train.batch_size;
  j["seq_len"] = c.train.seq_len;
  j["d_c"] = c.train.d_c;
  j["d_h"] = c.train.d_h;
  j["eta"] = c.train.eta;
  j["epochs"] = c.train.epochs;
  j["seed"] = c.train.seed;
  j["model"] = to_string(c.train.kind);
  j["chunk_size"] = c.train.chunk_size;
  j["corpus_dir"] = c.corpus_dir;
  j["out"] = c.out_dir;
  j["font"] = c.font;
  j["pixel_size"] = c.pixel_size;
  j["fixture_set"] = c.fixture_set;
  j["fusion"] = to_string(c.fusion);
  j["threshold"] = c.threshold;
  j["categories"] = c.categories;
  j["warm_start"] = c.warm_start;
  return j.dump(2) + "\n";
}

}  // namespace glyphembed
