#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "morphtag/baseline.hpp"
#include "morphtag/training.hpp"

namespace morphtag {

// Models persist as a single versioned JSON file (schema, every parameter
// table with shape headers, and an opaque echo of the run config), plus a
// sidecar <path>.schema.json carrying just the schema. Doubles are written
// with nlohmann::json's shortest-round-trip formatting, so save/load is
// bit-exact.

void save_fcrf(const std::string& path, const FcrfModel& model,
               const nlohmann::json& config_echo);
void save_baseline(const std::string& path, const BaselineModel& model,
                   const nlohmann::json& config_echo);

struct LoadedModel {
  std::string type;  // "fcrf" or "baseline"
  FcrfModel fcrf;
  BaselineModel baseline;
  nlohmann::json config_echo;
};

// Throws with a one-line message on missing files, unknown format/version,
// or parameter tables whose names or shapes do not match the declared
// architecture.
LoadedModel load_model(const std::string& path);

nlohmann::json schema_to_json(const TagSchema& schema);
TagSchema schema_from_json(const nlohmann::json& j);

}  // namespace morphtag
