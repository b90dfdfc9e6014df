// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "glyphembed/error.hpp"
#include <nlohmann/json.hpp>

namespace glyphembed {
namespace {

using nlohmann::json;

constexpr const char* kMagic = "GLYPHEMBED-CHECKPOINT";

json glyph_source_json(const GlyphSourceConfig& source) {
  if (const auto* font = std::get_if<FontSource>(&source)) {
    return json{{"mode", "font"}, {"path", font->path}, {"pixel_size", font->pixel_size}};
  }
  return json{{"mode", "procedural"}, {"fixture_set", std::get<ProceduralSource>(source).fixture_set}};
}

GlyphSourceConfig glyph_source_from_json(const json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "font") return FontSource{j.at("path").get<std::string>(), j.at("pixel_size").get<int>()};
  if (mode == "procedural") return ProceduralSource{j.at("fixture_set").get<std::string>()};
  throw DataError("checkpoint has unknown glyph source mode '" + mode + "'");
}

json train_config_json(const TrainConfig& c) {
  return json{{"batch_size", c.batch_size}, {"seq_len", c.seq_len}, {"d_c", c.d_c},     {"d_h", c.d_h},
              {"eta", c.eta},               {"epochs", c.epochs},   {"seed", c.seed},   {"model", to_string(c.kind)},
              {"chunk_size", c.chunk_size}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seq_len = j.at("seq_len").get<std::size_t>();
  c.d_c = j.at("d_c").get<std::size_t>();
  c.d_h = j.at("d_h").get<std::size_t>();
  c.eta = j.at("eta").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.kind = parse_model_kind(j.at("model").get<std::string>());
  c.chunk_size = j.value("chunk_size", std::size_t{16});
  return c;
}

void put_f32(std::ostream& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                         static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
  out.write(bytes, 4);
}

double get_f32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError("checkpoint tensor data is truncated");
  const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[3]) << 24);
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

void round_to_storage_precision(ParameterStore& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double& v : params[i].value().values()) v = static_cast<double>(static_cast<float>(v));
  }
}

void save_checkpoint(std::ostream& out, const Model& model, const std::optional<TrainConfig>& train_config) {
  json header;
  header["format"] = "glyphembed-checkpoint";
  header["version"] = kCheckpointVersion;
  header["model"] = to_string(model.kind());
  header["d_c"] = model.config().d_c;
  header["d_h"] = model.config().d_h;
  header["seq_len"] = model.config().seq_len;
  header["categories"] = model.categories();
  json vocab = json::array();
  for (const auto& [cp, count] : model.frequencies().counts()) vocab.push_back({static_cast<std::uint32_t>(cp), count});
  header["vocab"] = std::move(vocab);
  header["glyph_source"] = model.glyphs() ? glyph_source_json(model.glyphs()->config()) : json(nullptr);
  header["train_config"] = train_config ? train_config_json(*train_config) : json(nullptr);

  json tensors = json::array();
  std::size_t offset = 0;
  const ParameterStore& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({{"name", params[i].name()}, {"shape", params[i].shape()}, {"offset", offset}});
    offset += params[i].size() * 4;
  }
  header["tensors"] = std::move(tensors);

  const std::string text = header.dump(2) + "\n";
  out << kMagic << ' ' << kCheckpointVersion << '\n' << text.size() << '\n' << text;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double v : params[i].value().values()) put_f32(out, v);
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const Model& model, const std::optional<TrainConfig>& train_config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  save_checkpoint(out, model, train_config);
}

LoadedCheckpoint load_checkpoint(std::istream& in, std::shared_ptr<const GlyphProvider> glyphs) {
  std::string magic_line, size_line;
  if (!std::getline(in, magic_line) || !std::getline(in, size_line)) throw DataError("checkpoint header missing");
  std::istringstream magic_stream(magic_line);
  std::string magic;
  int version = 0;
  magic_stream >> magic >> version;
  if (magic != kMagic) throw DataError("not a glyphembed checkpoint");
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));

  std::size_t header_size = 0;
  try {
    header_size = std::stoull(size_line);
  } catch (const std::exception&) {
    throw DataError("malformed checkpoint header size");
  }
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) throw DataError("checkpoint header truncated");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  }

  try {
    ModelConfig config;
    config.kind = parse_model_kind(header.at("model").get<std::string>());
    config.d_c = header.at("d_c").get<std::size_t>();
    config.d_h = header.at("d_h").get<std::size_t>();
    config.seq_len = header.at("seq_len").get<std::size_t>();
    auto categories = header.at("categories").get<std::vector<std::string>>();
    std::map<char32_t, std::uint64_t> counts;
    for (const auto& entry : header.at("vocab")) {
      counts.emplace(static_cast<char32_t>(entry.at(0).get<std::uint32_t>()), entry.at(1).get<std::uint64_t>());
    }
    if (!glyphs && config.kind != ModelKind::lookup) {
      if (header.at("glyph_source").is_null()) throw DataError("checkpoint lacks a glyph source");
      glyphs = std::make_shared<const GlyphProvider>(glyph_source_from_json(header.at("glyph_source")));
    }
    std::optional<TrainConfig> train_config;
    if (header.contains("train_config") && !header.at("train_config").is_null()) {
      train_config = train_config_from_json(header.at("train_config"));
    }

    Model model(config, FrequencyTable(std::move(counts)), std::move(categories),
                config.kind == ModelKind::lookup ? nullptr : glyphs, 0);
    const auto& tensors = header.at("tensors");
    if (tensors.size() != model.params().size()) throw DataError("checkpoint tensor count does not match the model");
    for (const auto& t : tensors) {
      const std::string name = t.at("name").get<std::string>();
      Parameter* p = model.params().find(name);
      if (p == nullptr) throw DataError("checkpoint has unexpected tensor " + name);
      if (t.at("shape").get<Shape>() != p->shape()) throw DataError("checkpoint tensor " + name + " has the wrong shape");
      for (double& v : p->value().values()) v = get_f32(in);
    }
    return LoadedCheckpoint{std::move(model), train_config};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path, std::shared_ptr<const GlyphProvider> glyphs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return load_checkpoint(in, std::move(glyphs));
}

}  // namespace glyphembed
