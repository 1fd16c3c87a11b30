#include "morphtag/model_io.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

namespace morphtag {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "morphtag-model";
constexpr int kVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  // data is column-major, Eigen's default storage order
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

void matrix_from_json(const json& j, const std::string& name, double* dst,
                      Eigen::Index rows, Eigen::Index cols) {
  if (j.at("rows").get<Eigen::Index>() != rows ||
      j.at("cols").get<Eigen::Index>() != cols) {
    throw std::runtime_error("model file: parameter '" + name +
                             "' has unexpected shape");
  }
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("model file: parameter '" + name +
                             "' has inconsistent data length");
  }
  for (size_t i = 0; i < data.size(); ++i) dst[i] = data[i].get<double>();
}

json emitter_to_json(const EmitterParams& params) {
  json j;
  j["char_dim"] = params.char_dim;
  j["hidden_dim"] = params.hidden_dim;
  j["num_layers"] = params.num_layers();
  j["output_dim"] = params.output_dim;
  std::vector<uint32_t> chars;
  for (char32_t c : params.vocab.chars()) chars.push_back(c);
  j["vocab"] = chars;
  json tables = json::object();
  for_each_parameter(const_cast<EmitterParams&>(params),
                     [&](const std::string& name, auto& mat) {
                       tables[name] = matrix_to_json(mat);
                     });
  j["params"] = tables;
  return j;
}

EmitterParams emitter_from_json(const json& j,
                                const std::vector<std::string>& languages) {
  std::vector<char32_t> chars;
  for (const auto& c : j.at("vocab")) chars.push_back(c.get<uint32_t>());
  EmitterConfig cfg;
  cfg.char_dim = j.at("char_dim").get<int>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.num_layers = j.at("num_layers").get<int>();
  Rng dummy(0);
  EmitterParams params = init_emitter(CharVocab(std::move(chars)), languages,
                                      j.at("output_dim").get<int>(), cfg, dummy);
  const json& tables = j.at("params");
  size_t seen = 0;
  for_each_parameter(params, [&](const std::string& name, auto& mat) {
    auto it = tables.find(name);
    if (it == tables.end()) {
      throw std::runtime_error("model file: missing parameter '" + name + "'");
    }
    matrix_from_json(*it, name, mat.data(), mat.rows(), mat.cols());
    ++seen;
  });
  if (seen != tables.size()) {
    throw std::runtime_error("model file: extra parameter tables present");
  }
  return params;
}

json factor_to_json(const FactorWeights& weights) {
  json tables = json::object();
  for_each_table(const_cast<FactorWeights&>(weights),
                 [&](const std::string& name, Eigen::MatrixXd& t) {
                   tables[name] = matrix_to_json(t);
                 });
  return tables;
}

FactorWeights factor_from_json(const json& tables, const TagSchema& schema,
                               const std::vector<std::string>& languages) {
  FactorWeights weights = init_factor_weights(schema, languages);
  size_t seen = 0;
  for_each_table(weights, [&](const std::string& name, Eigen::MatrixXd& t) {
    auto it = tables.find(name);
    if (it == tables.end()) {
      throw std::runtime_error("model file: missing weight table '" + name + "'");
    }
    matrix_from_json(*it, name, t.data(), t.rows(), t.cols());
    ++seen;
  });
  if (seen != tables.size()) {
    throw std::runtime_error("model file: extra weight tables present");
  }
  return weights;
}

std::vector<std::string> head_languages(const EmitterParams& params) {
  std::vector<std::string> languages;
  for (const auto& [lang, _] : params.heads) languages.push_back(lang);
  return languages;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1, '\t') << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void save_common(const std::string& path, json j, const TagSchema& schema,
                 const nlohmann::json& config_echo) {
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["schema"] = schema_to_json(schema);
  j["config"] = config_echo;
  write_json(path, j);
  write_json(path + ".schema.json",
             json{{"format", "morphtag-schema"},
                  {"version", kVersion},
                  {"tag_types", schema_to_json(schema)["tag_types"]}});
}

}  // namespace

nlohmann::json schema_to_json(const TagSchema& schema) {
  json types = json::array();
  for (const auto& tt : schema.tag_types()) {
    types.push_back(json{{"name", tt.name}, {"labels", tt.labels}});
  }
  return json{{"tag_types", types}};
}

TagSchema schema_from_json(const nlohmann::json& j) {
  std::vector<TagType> types;
  for (const auto& tj : j.at("tag_types")) {
    TagType tt;
    tt.name = tj.at("name").get<std::string>();
    tt.labels = tj.at("labels").get<std::vector<std::string>>();
    types.push_back(std::move(tt));
  }
  return TagSchema(std::move(types));
}

void save_fcrf(const std::string& path, const FcrfModel& model,
               const nlohmann::json& config_echo) {
  json j;
  j["type"] = "fcrf";
  j["topology"] = json{{"pairwise", model.topology.use_pairwise},
                       {"transition", model.topology.use_transition}};
  j["languages"] = head_languages(model.emitter);
  j["factor"] = factor_to_json(model.factor);
  j["emitter"] = emitter_to_json(model.emitter);
  save_common(path, std::move(j), model.schema, config_echo);
}

void save_baseline(const std::string& path, const BaselineModel& model,
                   const nlohmann::json& config_echo) {
  json j;
  j["type"] = "baseline";
  j["languages"] = head_languages(model.emitter);
  json tagsets = json::array();
  for (const auto& ts : model.tagsets.tagsets()) tagsets.push_back(ts.labels);
  j["tagsets"] = std::move(tagsets);
  j["emitter"] = emitter_to_json(model.emitter);
  save_common(path, std::move(j), model.schema, config_echo);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model file '" + path + "' is not valid JSON: " +
                             e.what());
  }
  if (j.value("format", "") != kFormat) {
    throw std::runtime_error("'" + path + "' is not a morphtag model file");
  }
  if (j.at("version").get<int>() != kVersion) {
    throw std::runtime_error("model file version " +
                             j.at("version").dump() + " unsupported");
  }

  LoadedModel loaded;
  loaded.type = j.at("type").get<std::string>();
  loaded.config_echo = j.value("config", json::object());
  TagSchema schema = schema_from_json(j.at("schema"));
  auto languages = j.at("languages").get<std::vector<std::string>>();

  if (loaded.type == "fcrf") {
    loaded.fcrf.schema = schema;
    loaded.fcrf.topology.use_pairwise =
        j.at("topology").at("pairwise").get<bool>();
    loaded.fcrf.topology.use_transition =
        j.at("topology").at("transition").get<bool>();
    loaded.fcrf.factor = factor_from_json(j.at("factor"), schema, languages);
    loaded.fcrf.emitter = emitter_from_json(j.at("emitter"), languages);
    if (loaded.fcrf.emitter.output_dim != schema.total_labels()) {
      throw std::runtime_error("model file: emitter width does not match schema");
    }
  } else if (loaded.type == "baseline") {
    loaded.baseline.schema = schema;
    std::vector<TagAssignment> tagsets;
    for (const auto& ts : j.at("tagsets")) {
      tagsets.push_back(TagAssignment{ts.get<std::vector<int>>()});
    }
    loaded.baseline.tagsets = TagSetVocabulary(std::move(tagsets));
    loaded.baseline.emitter = emitter_from_json(j.at("emitter"), languages);
    if (loaded.baseline.emitter.output_dim != loaded.baseline.tagsets.size()) {
      throw std::runtime_error(
          "model file: emitter width does not match tag-set vocabulary");
    }
  } else {
    throw std::runtime_error("model file: unknown model type '" + loaded.type +
                             "'");
  }
  return loaded;
}

}  // namespace morphtag
